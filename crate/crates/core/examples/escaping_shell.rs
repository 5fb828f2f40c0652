//! A positive-energy shell around nothing: every particle escapes, the inner
//! radius grows linearly and the classifier reports dispersion.
//!
//! `cargo run --release --example escaping_shell`

use vpdisp::classify::classify;
use vpdisp::dynamics::{run, IntegratorConfig};
use vpdisp::model::DiagnosticsConfig;
use vpdisp::scenarios::{build_shell, ShellSpec};

fn main() -> vpdisp::Result<()> {
    let spec = ShellSpec::default();
    let (ensemble, escape) = build_shell(&spec)?;
    println!(
        "threshold {:.4}, escape speed {:.4}, satisfied {}",
        escape.threshold,
        escape.speed().unwrap_or(f64::NAN),
        escape.satisfied
    );

    let config = IntegratorConfig { t_end: 100.0, output_cadence: 0.5, ..IntegratorConfig::default() };
    let sink = run(&ensemble, &config, &DiagnosticsConfig::default(), &[])?;
    for rec in sink.records.iter().step_by(40) {
        println!(
            "t = {:6.1}  R1 = {:8.3}  E_pot = {:.3e}  var = {:.3e}",
            rec.time,
            rec.inner_radius_shell.unwrap_or(rec.inner_radius),
            rec.energy_potential.unwrap_or(f64::NAN),
            rec.variance
        );
    }

    let first = &sink.records[0];
    let report = classify(&sink.records, first.energy_total.unwrap_or(0.0), [0.0; 3], first.mass);
    println!("label: {}", report.label);
    if let Some(e) = report.growth_exponent {
        println!("variance exponent {:.3} +/- {:.3}", e.value, e.band);
    }
    Ok(())
}
