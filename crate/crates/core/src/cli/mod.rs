//! Batch driver behind the `vpdisp` binary: runs, analytic Kurth series,
//! classification of stored diagnostics and parameter sweeps.
//!
//! Every command writes into its own directory, next to a `manifest.txt`
//! that records the effective configuration.

mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{is_scalar_key, parse_list, parse_number, read_profile_table, RunConfig, Scenario, KEYS};
pub use output::{csv_header, diagnostics_csv, fmt_num, read_diagnostics, write_diagnostics, write_snapshot, Manifest};

use crate::classify::{classify, ClassificationReport, ThresholdCheck};
use crate::dynamics::run;
use crate::error::{Error, Result};
use crate::kurth::{kurth_energy, kurth_series};
use crate::model::{DiagnosticsRecord, Ensemble};
use crate::scenarios::{build_circular_core, build_shell, build_shell_plus_core};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Process exit status for an error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config { .. } => 2,
        Error::Singularity { .. } | Error::Stiffness { .. } | Error::Domain(_) => 3,
        Error::Parse { .. } => 4,
        Error::Io(_) => 1,
    }
}

/// What a completed run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub records: Vec<DiagnosticsRecord>,
    /// Initial ensemble (absent for analytic series).
    pub initial: Option<Ensemble>,
    /// `E` used for classification: simulator energy, or `E_K` for Kurth.
    pub energy: f64,
    pub mass: f64,
    pub escape_satisfied: Option<bool>,
}

fn build_initial(config: &RunConfig, manifest: &mut Manifest) -> Result<(Ensemble, Option<bool>)> {
    match config.scenario {
        Scenario::Shell => {
            let (ens, rep) = build_shell(&config.shell_spec())?;
            manifest.push_num("report.escape_threshold", rep.threshold);
            manifest.push_num("report.escape_margin_sq", rep.margin_sq);
            manifest.push("report.escape_satisfied", rep.satisfied.to_string());
            Ok((ens, Some(rep.satisfied)))
        }
        Scenario::Core => Ok((build_circular_core(&config.core_spec())?, None)),
        Scenario::ShellPlusCore => {
            let (ens, rep) = build_shell_plus_core(&config.core_spec(), &config.shell_spec())?;
            manifest.push_num("report.combined_threshold", rep.combined_threshold);
            manifest.push_num("report.total_energy", rep.total_energy);
            manifest.push_num("report.core_energy", rep.core_energy);
            manifest.push_num("report.shell_mass_bound", rep.shell_mass_bound);
            manifest.push("report.double_inequality_satisfied", rep.double_inequality_satisfied.to_string());
            manifest.push("report.escape_satisfied", rep.escape.satisfied.to_string());
            Ok((ens, Some(rep.escape.satisfied)))
        }
        Scenario::Kurth => unreachable!("analytic scenario has no ensemble"),
    }
}

/// Runs one configuration into `out`: `diagnostics.csv`, snapshots
/// (`snapshot_<t>.csv`) and `manifest.txt`.
pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<RunOutput> {
    config.validate()?;
    fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("run");
    manifest.push("scenario", config.scenario.as_str());
    manifest.push("seed", config.seed.to_string());
    manifest.push_config("config.", &config.to_config_string());
    let diag = &config.diagnostics;

    let output = if config.scenario == Scenario::Kurth {
        let k = config.kurth_k;
        let records = kurth_series(k, config.integrator.t_end, config.integrator.output_cadence, diag)?;
        manifest.push_num("report.kurth_energy", kurth_energy(k));
        RunOutput { dir: out.to_path_buf(), records, initial: None, energy: kurth_energy(k), mass: 1.0, escape_satisfied: None }
    } else {
        let (ens, escape) = build_initial(config, &mut manifest)?;
        let sink = run(&ens, &config.integrator, diag, &config.snapshots)?;
        for snap in &sink.snapshots {
            write_snapshot(&out.join(format!("snapshot_{}.csv", fmt_num(snap.time))), snap)?;
        }
        manifest.push("report.steps", sink.steps.to_string());
        manifest.push("report.rejections", sink.rejections.to_string());
        manifest.push("report.reflections", sink.reflections.iter().sum::<usize>().to_string());
        let energy = sink.records[0].energy_total.unwrap_or(f64::NAN);
        RunOutput { dir: out.to_path_buf(), records: sink.records, mass: ens.total_mass(), initial: Some(ens), energy, escape_satisfied: escape }
    };
    write_diagnostics(&out.join(DIAGNOSTICS_FILE), &output.records, &diag.r_grid, &diag.q_list)?;
    manifest.write(&out.join(MANIFEST_FILE))?;
    Ok(output)
}

/// Analytic Kurth series for `k` in the diagnostics CSV schema.
pub fn cmd_kurth(k: f64, t_end: f64, cadence: f64, q_list: &[f64], out: &Path) -> Result<RunOutput> {
    let mut config = RunConfig { scenario: Scenario::Kurth, kurth_k: k, ..RunConfig::default() };
    config.integrator.t_end = t_end;
    config.integrator.output_cadence = cadence;
    config.diagnostics.q_list = q_list.to_vec();
    cmd_run(&config, out)
}

/// Inputs for classifying a stored CSV; missing values come from its first row.
#[derive(Debug, Clone, Default)]
pub struct ClassifyInput {
    pub energy: Option<f64>,
    pub momentum: [f64; 3],
    pub mass: Option<f64>,
}

/// Classifies `csv` and writes `report.json` into `out`.
pub fn cmd_classify(csv: &Path, input: &ClassifyInput, out: &Path) -> Result<ClassificationReport> {
    let text = fs::read_to_string(csv).map_err(|e| Error::Parse { row: 0, msg: format!("{}: {e}", csv.display()) })?;
    let records = read_diagnostics(&text)?;
    let first = records.first();
    let energy = input.energy.or_else(|| first.and_then(|r| r.energy_total));
    let mass = input.mass.or_else(|| first.map(|r| r.mass));
    let (Some(energy), Some(mass)) = (energy, mass) else {
        return Err(Error::Parse { row: 2, msg: "energy and mass unavailable; supply them explicitly".into() });
    };
    let report = classify(&records, energy, input.momentum, mass);
    fs::create_dir_all(out)?;
    write_json(&out.join(REPORT_FILE), &report)?;
    Ok(report)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: String,
    pub energy: Option<f64>,
    pub threshold: Option<f64>,
    pub label: String,
    pub exponent: Option<f64>,
    pub m_infinity: Option<f64>,
    pub escape: Option<bool>,
}

pub const SUMMARY_HEADER: &str = "value,E,Q2_2M,label,exponent,M_inf,escape";

fn sweep_one(base: &RunConfig, parameter: &str, value: &str, dir: &Path) -> SweepRow {
    let failed = |msg: String| SweepRow {
        value: value.to_string(),
        energy: None,
        threshold: None,
        label: format!("failed: {msg}"),
        exponent: None,
        m_infinity: None,
        escape: None,
    };
    let mut config = base.clone();
    if let Err(e) = config.set(parameter, value) {
        return failed(e.to_string());
    }
    let output = match cmd_run(&config, dir) {
        Ok(o) => o,
        Err(e) => return failed(e.to_string()),
    };
    let momentum = output.initial.as_ref().map_or([0.0; 3], |e| e.linear_momentum());
    let report = classify(&output.records, output.energy, momentum, output.mass);
    if let Err(e) = write_json(&dir.join(REPORT_FILE), &report) {
        return failed(e.to_string());
    }
    let th = ThresholdCheck::new(output.energy, momentum, output.mass);
    SweepRow {
        value: value.to_string(),
        energy: Some(output.energy),
        threshold: Some(th.threshold),
        label: report.label.to_string(),
        exponent: report.growth_exponent.map(|e| e.value),
        m_infinity: report.m_infinity.map(|e| e.value),
        escape: output.escape_satisfied,
    }
}

/// Runs `base` once per value of `parameter` (in `out/run_<i>`), classifies
/// each run and writes `summary.csv` in input order. Failed runs are
/// recorded in the summary and do not stop the sweep.
pub fn cmd_sweep(base: &RunConfig, parameter: &str, values: &[String], out: &Path) -> Result<Vec<SweepRow>> {
    if !is_scalar_key(parameter) {
        return Err(Error::Config { line: 0, msg: format!("'{parameter}' is not a scalar configuration key") });
    }
    base.validate()?;
    fs::create_dir_all(out)?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(i, v)| sweep_one(base, parameter, v, &out.join(format!("run_{i}"))))
        .collect();
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in &rows {
        w.write_record([
            r.value.clone(),
            opt(r.energy),
            opt(r.threshold),
            r.label.clone(),
            opt(r.exponent),
            opt(r.m_infinity),
            r.escape.map(|b| b.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    text.push_str(&String::from_utf8_lossy(&w.into_inner().map_err(|e| Error::Io(e.to_string()))?));
    fs::write(out.join(SUMMARY_FILE), text)?;
    let mut manifest = Manifest::new("sweep");
    manifest.push("parameter", parameter);
    manifest.push("values", values.join(", "));
    manifest.push_config("config.", &base.to_config_string());
    manifest.write(&out.join(MANIFEST_FILE))?;
    Ok(rows)
}
