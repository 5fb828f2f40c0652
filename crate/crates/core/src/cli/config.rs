//! Flat `key = value` run configuration.
//!
//! ```text
//! # escaping shell
//! scenario = shell
//! shell.n = 10000
//! diag.q_list = 5/3, 2
//! ```
//!
//! Unknown keys, duplicate keys and malformed values are errors carrying the
//! offending line number.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::model::DiagnosticsConfig;
use crate::scenarios::{CoreProfile, CoreSpec, ShellSpec};

use super::output::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Shell,
    Core,
    ShellPlusCore,
    Kurth,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Shell => "shell",
            Scenario::Core => "core",
            Scenario::ShellPlusCore => "shell_plus_core",
            Scenario::Kurth => "kurth",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "shell" => Ok(Scenario::Shell),
            "core" => Ok(Scenario::Core),
            "shell_plus_core" => Ok(Scenario::ShellPlusCore),
            "kurth" => Ok(Scenario::Kurth),
            other => Err(format!("unknown scenario '{other}' (expected shell, core, shell_plus_core or kurth)")),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub shell: ShellSpec,
    pub core: CoreSpec,
    /// Path the core table was read from, echoed in manifests.
    pub core_table: Option<PathBuf>,
    pub kurth_k: f64,
    pub integrator: IntegratorConfig,
    pub diagnostics: DiagnosticsConfig,
    pub snapshots: Vec<f64>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Shell,
            seed: 1,
            shell: ShellSpec::default(),
            core: CoreSpec::default(),
            core_table: None,
            kurth_k: 0.0,
            integrator: IntegratorConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            snapshots: Vec::new(),
            out_dir: None,
        }
    }
}

/// Keys accepted in configuration files, in canonical order.
pub const KEYS: &[&str] = &[
    "scenario",
    "seed",
    "shell.mass",
    "shell.r_inner",
    "shell.r_outer",
    "shell.w_min",
    "shell.w_max",
    "shell.ell_min",
    "shell.ell_max",
    "shell.n",
    "core.mass",
    "core.radius",
    "core.profile",
    "core.table",
    "core.n",
    "kurth.k",
    "dt_initial",
    "dt_safety",
    "t_end",
    "output_cadence",
    "reflection",
    "diag.r_grid",
    "diag.q_list",
    "diag.n_bins",
    "snapshots",
    "out_dir",
];

/// Keys holding a single number, the ones a sweep may vary.
pub fn is_scalar_key(key: &str) -> bool {
    matches!(
        key,
        "seed"
            | "shell.mass"
            | "shell.r_inner"
            | "shell.r_outer"
            | "shell.w_min"
            | "shell.w_max"
            | "shell.ell_min"
            | "shell.ell_max"
            | "shell.n"
            | "core.mass"
            | "core.radius"
            | "core.n"
            | "kurth.k"
            | "dt_initial"
            | "dt_safety"
            | "t_end"
            | "output_cadence"
            | "diag.n_bins"
    )
}

/// Parses a number, accepting `a/b` fractions such as `5/3`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
            if b == 0.0 {
                return Err(format!("'{s}' divides by zero"));
            }
            a / b
        }
        None => s.parse().map_err(|_| format!("'{s}' is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_number).collect()
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

/// Reads `r M(<r)` pairs, one per line; `#` starts a comment.
pub fn read_profile_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
        let pair = match fields.as_slice() {
            [r, m] => parse_number(r).and_then(|r| parse_number(m).map(|m| (r, m))),
            _ => Err("expected two columns: r and cumulative mass".to_string()),
        };
        points.push(pair.map_err(|msg| Error::Config { line: i + 1, msg: format!("{}: {msg}", path.display()) })?);
    }
    Ok(points)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_with_base(&text, path.parent())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_base(text, None)
    }

    /// Parses config text; relative table paths resolve against `base`.
    pub fn parse_with_base(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config { line: line_no, msg: format!("expected 'key = value', got '{line}'") });
            };
            let key = key.trim();
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::Config { line: line_no, msg: format!("unknown key '{key}'") });
            };
            if seen.contains(&known) {
                return Err(Error::Config { line: line_no, msg: format!("duplicate key '{key}'") });
            }
            seen.push(known);
            config.set_with_base(key, value.trim(), base).map_err(|e| match e {
                Error::Config { msg, .. } => Error::Config { line: line_no, msg },
                Error::Io(msg) => Error::Config { line: line_no, msg },
                other => other,
            })?;
        }
        Ok(config)
    }

    /// Sets one key; used by the parser and by sweeps.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_with_base(key, value, None)
    }

    fn set_with_base(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<()> {
        let bad = |msg: String| Error::Config { line: 0, msg: format!("{key}: {msg}") };
        let num = || parse_number(value).map_err(bad);
        let count = || parse_count(value).map_err(bad);
        match key {
            "scenario" => self.scenario = value.parse().map_err(bad)?,
            "seed" => {
                self.seed = value.trim().parse().map_err(|_| bad(format!("'{value}' is not a non-negative integer")))?
            }
            "shell.mass" => self.shell.mass = num()?,
            "shell.r_inner" => self.shell.r_inner = num()?,
            "shell.r_outer" => self.shell.r_outer = num()?,
            "shell.w_min" => self.shell.w_min = num()?,
            "shell.w_max" => self.shell.w_max = num()?,
            "shell.ell_min" => self.shell.ell_min = num()?,
            "shell.ell_max" => self.shell.ell_max = num()?,
            "shell.n" => self.shell.n = count()?,
            "core.mass" => self.core.mass = num()?,
            "core.radius" => self.core.radius = num()?,
            "core.profile" => match value {
                "uniform" => self.core.profile = CoreProfile::Uniform,
                "table" => {
                    if !matches!(self.core.profile, CoreProfile::Table(_)) {
                        self.core.profile = CoreProfile::Table(Vec::new());
                    }
                }
                other => return Err(bad(format!("unknown profile '{other}' (expected uniform or table)"))),
            },
            "core.table" => {
                let path = match base {
                    Some(b) if Path::new(value).is_relative() => b.join(value),
                    _ => PathBuf::from(value),
                };
                self.core.profile = CoreProfile::Table(read_profile_table(&path)?);
                self.core_table = Some(PathBuf::from(value));
            }
            "core.n" => self.core.n = count()?,
            "kurth.k" => self.kurth_k = num()?,
            "dt_initial" => self.integrator.dt_initial = num()?,
            "dt_safety" => self.integrator.dt_safety = num()?,
            "t_end" => self.integrator.t_end = num()?,
            "output_cadence" => self.integrator.output_cadence = num()?,
            "reflection" => self.integrator.reflection_enabled = parse_bool(value).map_err(bad)?,
            "diag.r_grid" => self.diagnostics.r_grid = parse_list(value).map_err(bad)?,
            "diag.q_list" => self.diagnostics.q_list = parse_list(value).map_err(bad)?,
            "diag.n_bins" => {
                self.diagnostics.n_bins = match value {
                    "auto" => None,
                    v => Some(parse_count(v).map_err(bad)?),
                }
            }
            "snapshots" => self.snapshots = parse_list(value).map_err(bad)?,
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            other => return Err(bad(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Checks every parameter the selected scenario uses, before any compute.
    pub fn validate(&self) -> Result<()> {
        let as_config = |e: Error| match e {
            Error::Domain(msg) => Error::Config { line: 0, msg },
            other => other,
        };
        match self.scenario {
            Scenario::Shell => self.shell_spec().validate().map_err(as_config)?,
            Scenario::Core => self.core_spec().validate().map_err(as_config)?,
            Scenario::ShellPlusCore => {
                self.shell_spec().validate().map_err(as_config)?;
                self.core_spec().validate().map_err(as_config)?;
                if !(self.shell.r_inner > self.core.radius) {
                    return Err(Error::Config { line: 0, msg: "shell.r_inner must exceed core.radius".into() });
                }
            }
            Scenario::Kurth => {
                if !self.kurth_k.is_finite() {
                    return Err(Error::Config { line: 0, msg: "kurth.k must be finite".into() });
                }
            }
        }
        self.integrator.validate(0.0).map_err(as_config)?;
        if let Some(&q) = self.diagnostics.q_list.iter().find(|q| !(**q >= 1.0)) {
            return Err(Error::Config { line: 0, msg: format!("diag.q_list entries must be >= 1, got {q}") });
        }
        if let Some(&r) = self.diagnostics.r_grid.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::Config { line: 0, msg: format!("diag.r_grid entries must be positive, got {r}") });
        }
        if self.diagnostics.n_bins == Some(0) {
            return Err(Error::Config { line: 0, msg: "diag.n_bins must be positive".into() });
        }
        Ok(())
    }

    pub fn shell_spec(&self) -> ShellSpec {
        ShellSpec { seed: self.seed, ..self.shell.clone() }
    }

    pub fn core_spec(&self) -> CoreSpec {
        CoreSpec { seed: self.seed, ..self.core.clone() }
    }

    /// Canonical `key = value` text; parsing it yields the same config.
    pub fn to_config_string(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("scenario", self.scenario.to_string());
        put("seed", self.seed.to_string());
        put("shell.mass", fmt_num(self.shell.mass));
        put("shell.r_inner", fmt_num(self.shell.r_inner));
        put("shell.r_outer", fmt_num(self.shell.r_outer));
        put("shell.w_min", fmt_num(self.shell.w_min));
        put("shell.w_max", fmt_num(self.shell.w_max));
        put("shell.ell_min", fmt_num(self.shell.ell_min));
        put("shell.ell_max", fmt_num(self.shell.ell_max));
        put("shell.n", self.shell.n.to_string());
        put("core.mass", fmt_num(self.core.mass));
        put("core.radius", fmt_num(self.core.radius));
        match (&self.core.profile, &self.core_table) {
            (CoreProfile::Uniform, _) => put("core.profile", "uniform".into()),
            (CoreProfile::Table(_), path) => {
                put("core.profile", "table".into());
                if let Some(p) = path {
                    put("core.table", p.display().to_string());
                }
            }
        }
        put("core.n", self.core.n.to_string());
        put("kurth.k", fmt_num(self.kurth_k));
        put("dt_initial", fmt_num(self.integrator.dt_initial));
        put("dt_safety", fmt_num(self.integrator.dt_safety));
        put("t_end", fmt_num(self.integrator.t_end));
        put("output_cadence", fmt_num(self.integrator.output_cadence));
        put("reflection", self.integrator.reflection_enabled.to_string());
        put("diag.r_grid", list(&self.diagnostics.r_grid));
        put("diag.q_list", list(&self.diagnostics.q_list));
        put("diag.n_bins", self.diagnostics.n_bins.map_or("auto".into(), |n| n.to_string()));
        put("snapshots", list(&self.snapshots));
        if let Some(dir) = &self.out_dir {
            put("out_dir", dir.display().to_string());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_fractions() {
        let cfg = RunConfig::parse(
            "# comment\nscenario = kurth\nkurth.k = 0.5   # trailing\ndiag.q_list = 5/3, 2\nt_end = 100\nreflection = false\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, Scenario::Kurth);
        assert_eq!(cfg.kurth_k, 0.5);
        assert_eq!(cfg.diagnostics.q_list, vec![5.0 / 3.0, 2.0]);
        assert_eq!(cfg.integrator.t_end, 100.0);
        assert!(!cfg.integrator.reflection_enabled);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::parse("seed = 3\n\nshell.nn = 4\n").unwrap_err();
        assert_eq!(err, Error::Config { line: 3, msg: "unknown key 'shell.nn'".into() });
        let err = RunConfig::parse("t_end = abc").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let err = RunConfig::parse("seed = 1\nseed = 2").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        assert!(RunConfig::parse("just words").is_err());
        assert!(RunConfig::parse("scenario = disk").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut cfg = RunConfig::parse("scenario = shell_plus_core\nshell.r_inner = 2\nshell.mass = 0.1\nsnapshots = 1, 2.5\n").unwrap();
        cfg.seed = 77;
        let again = RunConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn validation_catches_bad_values() {
        let cfg = RunConfig::parse("scenario = shell_plus_core\nshell.r_inner = 0.5\n").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::parse("diag.q_list = 0.5").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::parse("output_cadence = 0").unwrap();
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn profile_table_relative_to_config() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("ball.txt"), "# r M\n0.5 0.125\n1.0 1.0\n").unwrap();
        let cfg_path = dir.path().join("run.cfg");
        fs::write(&cfg_path, "scenario = core\ncore.profile = table\ncore.table = ball.txt\n").unwrap();
        let cfg = RunConfig::from_file(&cfg_path).unwrap();
        assert_eq!(cfg.core.profile, CoreProfile::Table(vec![(0.5, 0.125), (1.0, 1.0)]));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn scalar_keys_are_known() {
        assert!(KEYS.iter().filter(|k| is_scalar_key(k)).count() == 18);
        assert!(!is_scalar_key("diag.q_list"));
    }
}
