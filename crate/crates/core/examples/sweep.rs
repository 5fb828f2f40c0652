//! Parameter sweep over the shell's minimal outward speed, tabulating how
//! the label changes as the escape condition is lost.
//!
//! `cargo run --release --example sweep`

use vpdisp::cli::{cmd_sweep, RunConfig, SUMMARY_FILE};

fn main() -> vpdisp::Result<()> {
    let base = RunConfig::parse("scenario = shell\nshell.n = 2000\nshell.w_max = 1\nt_end = 60\noutput_cadence = 0.5\n")?;
    let values: Vec<String> = ["0", "0.2", "0.4", "0.6", "0.8"].iter().map(|s| s.to_string()).collect();
    let dir = std::env::temp_dir().join("vpdisp-sweep-example");
    let rows = cmd_sweep(&base, "shell.w_min", &values, &dir)?;
    for r in &rows {
        println!(
            "w_min = {:>3}: E = {:+.4}, escape {:?}, label {}",
            r.value,
            r.energy.unwrap_or(f64::NAN),
            r.escape,
            r.label
        );
    }
    println!("summary in {}", dir.join(SUMMARY_FILE).display());
    Ok(())
}
