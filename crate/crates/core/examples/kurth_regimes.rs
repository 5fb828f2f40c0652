//! The analytic Kurth family: static, periodic and two dispersive radius
//! histories, with the period and growth rates they imply.
//!
//! `cargo run --release --example kurth_regimes`

use vpdisp::classify::{classify, growth_exponent, TimeSeries};
use vpdisp::kurth::{analytic_state, classify_k, kurth_energy, kurth_period, kurth_series};
use vpdisp::model::DiagnosticsConfig;

fn main() -> vpdisp::Result<()> {
    let diag = DiagnosticsConfig::default();
    for k in [0.0, 0.5, 1.0, 1.5] {
        let records = kurth_series(k, 1000.0, 0.5, &diag)?;
        let report = classify(&records, kurth_energy(k), [0.0; 3], 1.0);
        println!("k = {k}: regime {:?}, E_K = {:+.3}, label {}", classify_k(k), kurth_energy(k), report.label);
    }
    println!("period at k = 0.5: {:.6}", kurth_period(0.5)?);

    let times: Vec<f64> = (0..=100).map(|i| 10f64.powf(2.0 + i as f64 / 50.0)).collect();
    for k in [1.0, 1.5] {
        let variance = times.iter().map(|&t| analytic_state(k, t).map(|s| 0.6 * s.phi * s.phi)).collect::<Result<Vec<_>, _>>()?;
        if let Some(e) = growth_exponent(&TimeSeries::new(times.clone(), variance)?) {
            println!("k = {k}: variance grows like t^{:.3}", e.value);
        }
    }
    Ok(())
}
