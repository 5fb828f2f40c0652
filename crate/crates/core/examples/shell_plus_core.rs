//! A light fast shell escaping from a bound core: negative total energy yet
//! partial dispersion, with the core mass retained.
//!
//! `cargo run --release --example shell_plus_core`

use vpdisp::classify::classify;
use vpdisp::dynamics::{run, IntegratorConfig};
use vpdisp::model::DiagnosticsConfig;
use vpdisp::scenarios::{build_shell_plus_core, CoreSpec, ShellSpec};

fn main() -> vpdisp::Result<()> {
    let core = CoreSpec::default();
    let shell = ShellSpec { mass: 0.1, r_inner: 2.0, r_outer: 2.5, w_min: 0.35, w_max: 0.45, n: 2000, ..ShellSpec::default() };
    let (ensemble, report) = build_shell_plus_core(&core, &shell)?;
    println!("total energy {:.5}, core energy {:.5}", report.total_energy, report.core_energy);
    println!("shell mass {} (bound {:.4})", shell.mass, report.shell_mass_bound);
    println!("escape satisfied {}, both inequalities {}", report.escape.satisfied, report.double_inequality_satisfied);

    let config = IntegratorConfig { t_end: 1000.0, output_cadence: 5.0, ..IntegratorConfig::default() };
    let sink = run(&ensemble, &config, &DiagnosticsConfig::default(), &[])?;
    let first = &sink.records[0];
    let classified = classify(&sink.records, first.energy_total.unwrap_or(0.0), [0.0; 3], first.mass);
    println!("label: {}", classified.label);
    if let Some(m) = classified.m_infinity {
        println!("retained mass {:.4}", m.value);
    }
    if let Some(e) = classified.growth_exponent {
        println!("variance exponent {:.3}", e.value);
    }
    for c in &classified.consistency {
        println!("  ({}) {:?}: {}", c.id, c.outcome, c.detail);
    }
    Ok(())
}
