//! Diagnostics CSV, snapshots and manifests.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{DiagnosticsRecord, Ensemble};

/// Shortest round-trip decimal; scientific notation outside `[1e-5, 1e16)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

const FIXED_COLUMNS: [&str; 11] = ["t", "E", "E_kin", "E_pot", "M", "var_x", "dilation", "conformal", "R1", "R2", "R1_shell"];

/// Header row for the given concentration radii and `L^q` exponents.
pub fn csv_header(r_grid: &[f64], q_list: &[f64]) -> Vec<String> {
    FIXED_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(r_grid.iter().map(|r| format!("conc_R{}", fmt_num(*r))))
        .chain(q_list.iter().map(|q| format!("lq_{}", fmt_num(*q))))
        .collect()
}

fn record_row(rec: &DiagnosticsRecord, r_grid: &[f64], q_list: &[f64]) -> Vec<String> {
    let mut row = vec![
        fmt_num(rec.time),
        fmt_opt(rec.energy_total),
        fmt_opt(rec.energy_kinetic),
        fmt_opt(rec.energy_potential),
        fmt_num(rec.mass),
        fmt_num(rec.variance),
        fmt_opt(rec.dilation_moment),
        fmt_opt(rec.conformal_moment),
        fmt_num(rec.inner_radius),
        fmt_num(rec.outer_radius),
        fmt_opt(rec.inner_radius_shell),
    ];
    row.extend(r_grid.iter().map(|&r| fmt_opt(rec.concentration_at(r))));
    row.extend(q_list.iter().map(|&q| fmt_opt(rec.lq_at(q))));
    row
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Renders records as CSV text (LF line endings).
pub fn diagnostics_csv(records: &[DiagnosticsRecord], r_grid: &[f64], q_list: &[f64]) -> Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record(csv_header(r_grid, q_list)).map_err(csv_err)?;
    for rec in records {
        w.write_record(record_row(rec, r_grid, q_list)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord], r_grid: &[f64], q_list: &[f64]) -> Result<()> {
    fs::write(path, diagnostics_csv(records, r_grid, q_list)?)?;
    Ok(())
}

enum Column {
    Fixed(usize),
    Conc(f64),
    Lq(f64),
}

/// Parses a diagnostics CSV back into records. Row numbers in errors count
/// the header as row 1.
pub fn read_diagnostics(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse { row: 1, msg: e.to_string() })?.clone();
    let columns = header
        .iter()
        .map(|name| {
            if let Some(i) = FIXED_COLUMNS.iter().position(|c| *c == name) {
                Ok(Column::Fixed(i))
            } else if let Some(r) = name.strip_prefix("conc_R") {
                r.parse().map(Column::Conc).map_err(|_| format!("bad concentration column '{name}'"))
            } else if let Some(q) = name.strip_prefix("lq_") {
                q.parse().map(Column::Lq).map_err(|_| format!("bad norm column '{name}'"))
            } else {
                Err(format!("unexpected column '{name}'"))
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|msg| Error::Parse { row: 1, msg })?;
    for (i, name) in FIXED_COLUMNS.iter().enumerate() {
        if !columns.iter().any(|c| matches!(c, Column::Fixed(j) if *j == i)) {
            return Err(Error::Parse { row: 1, msg: format!("missing column '{name}'") });
        }
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 2;
        let row = row.map_err(|e| Error::Parse { row: row_no, msg: e.to_string() })?;
        if row.len() != columns.len() {
            return Err(Error::Parse { row: row_no, msg: format!("expected {} fields, found {}", columns.len(), row.len()) });
        }
        let mut fixed: [Option<f64>; 11] = [None; 11];
        let mut rec = DiagnosticsRecord {
            time: 0.0,
            energy_total: None,
            energy_kinetic: None,
            energy_potential: None,
            mass: 0.0,
            variance: 0.0,
            dilation_moment: None,
            conformal_moment: None,
            inner_radius: 0.0,
            outer_radius: 0.0,
            inner_radius_shell: None,
            concentration: Vec::new(),
            lq_norms: Vec::new(),
        };
        for (col, field) in columns.iter().zip(row.iter()) {
            let value = if field.is_empty() {
                None
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Parse { row: row_no, msg: format!("'{field}' is not a number") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { row: row_no, msg: format!("non-finite value '{field}'") });
                }
                Some(v)
            };
            match col {
                Column::Fixed(j) => fixed[*j] = value,
                Column::Conc(r) => rec.concentration.extend(value.map(|v| (*r, v))),
                Column::Lq(q) => rec.lq_norms.extend(value.map(|v| (*q, v))),
            }
        }
        let required = |j: usize| fixed[j].ok_or_else(|| Error::Parse { row: row_no, msg: format!("empty '{}'", FIXED_COLUMNS[j]) });
        rec.time = required(0)?;
        rec.energy_total = fixed[1];
        rec.energy_kinetic = fixed[2];
        rec.energy_potential = fixed[3];
        rec.mass = required(4)?;
        rec.variance = required(5)?;
        rec.dilation_moment = fixed[6];
        rec.conformal_moment = fixed[7];
        rec.inner_radius = required(8)?;
        rec.outer_radius = required(9)?;
        rec.inner_radius_shell = fixed[10];
        if records.last().is_some_and(|p: &DiagnosticsRecord| !(p.time < rec.time)) {
            return Err(Error::Parse { row: row_no, msg: "times must be strictly increasing".into() });
        }
        records.push(rec);
    }
    Ok(records)
}

/// One line per particle: `r,w,ell,mass,group`.
pub fn write_snapshot(path: &Path, ensemble: &Ensemble) -> Result<()> {
    let mut w = csv_writer(Vec::new());
    w.write_record(["r", "w", "ell", "mass", "group"]).map_err(csv_err)?;
    for p in &ensemble.particles {
        w.write_record([fmt_num(p.r), fmt_num(p.w), fmt_num(p.ell), fmt_num(p.mass), p.group.to_string()])
            .map_err(csv_err)?;
    }
    fs::write(path, w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
    Ok(())
}

/// Ordered `key = value` lines describing how an artifact was produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.push("tool", env!("CARGO_PKG_NAME"));
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn push_num(&mut self, key: &str, value: f64) {
        self.push(key, fmt_num(value));
    }

    /// Appends `text` (canonical config lines) under a prefix.
    pub fn push_config(&mut self, prefix: &str, text: &str) {
        for line in text.lines() {
            if let Some((k, v)) = line.split_once(" = ") {
                self.push(&format!("{prefix}{k}"), v);
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}
