//! A uniform ball on circular orbits is an exact steady state: energies and
//! the variance stay put and the classifier reports `steady`.
//!
//! `cargo run --release --example static_core [N]`

use std::f64::consts::PI;

use vpdisp::classify::classify;
use vpdisp::dynamics::{run, IntegratorConfig};
use vpdisp::model::DiagnosticsConfig;
use vpdisp::scenarios::{build_circular_core, dynamical_time, CoreSpec};

fn main() -> vpdisp::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let spec = CoreSpec { n, ..CoreSpec::default() };
    let ensemble = build_circular_core(&spec)?;
    let horizon = 20.0 * dynamical_time(&spec);
    println!("N = {n}, dynamical time {:.4}, horizon {horizon:.1}", dynamical_time(&spec));

    let config = IntegratorConfig { t_end: horizon, output_cadence: 1.0, ..IntegratorConfig::default() };
    let sink = run(&ensemble, &config, &DiagnosticsConfig::default(), &[])?;
    println!("expected E_kin = {:.6}, E_pot = {:.6}", 3.0 / (40.0 * PI), 3.0 / (20.0 * PI));
    for rec in sink.records.iter().step_by(10) {
        println!(
            "t = {:5.1}  E_kin = {:.6}  E_pot = {:.6}  var = {:.6}",
            rec.time,
            rec.energy_kinetic.unwrap_or(f64::NAN),
            rec.energy_potential.unwrap_or(f64::NAN),
            rec.variance
        );
    }
    let first = &sink.records[0];
    let report = classify(&sink.records, first.energy_total.unwrap_or(0.0), [0.0; 3], first.mass);
    println!("label: {}", report.label);
    Ok(())
}
