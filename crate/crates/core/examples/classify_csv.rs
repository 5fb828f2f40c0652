//! Round trip through the diagnostics CSV: write an analytic series to disk,
//! read it back and classify it as a separate step.
//!
//! `cargo run --example classify_csv`

use vpdisp::cli::{cmd_classify, cmd_kurth, ClassifyInput, DIAGNOSTICS_FILE, REPORT_FILE};

fn main() -> vpdisp::Result<()> {
    let dir = std::env::temp_dir().join("vpdisp-classify-example");
    cmd_kurth(0.5, 300.0, 0.25, &[5.0 / 3.0], &dir)?;
    let csv = dir.join(DIAGNOSTICS_FILE);
    let report = cmd_classify(&csv, &ClassifyInput { energy: None, momentum: [0.0; 3], mass: None }, &dir)?;
    println!("label {} (period {:?})", report.label, report.period);
    println!("report written to {}", dir.join(REPORT_FILE).display());
    Ok(())
}
