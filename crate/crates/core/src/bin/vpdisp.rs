use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vpdisp::cli::{self, ClassifyInput, RunConfig};
use vpdisp::Error;

#[derive(Parser)]
#[command(name = "vpdisp", version, about = "Spherical Vlasov-Poisson shell runs and dispersion classification")]
struct Args {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the scenario described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the analytic Kurth series for one initial dilation velocity.
    Kurth {
        /// Optional config; the flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        cadence: Option<f64>,
        /// Comma-separated L^q exponents, fractions allowed (5/3).
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a diagnostics CSV and write report.json.
    Classify {
        csv: PathBuf,
        /// Total energy (default: E column of the first row).
        #[arg(long, allow_negative_numbers = true)]
        energy: Option<f64>,
        /// Total mass (default: M column of the first row).
        #[arg(long)]
        mass: Option<f64>,
        /// Total momentum as qx,qy,qz (default: 0,0,0).
        #[arg(long, allow_negative_numbers = true)]
        momentum: Option<String>,
        /// Output directory (default: next to the CSV).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a run over values of one scalar config key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_negative_numbers = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Path, seed: Option<u64>) -> vpdisp::Result<RunConfig> {
    let mut config = RunConfig::from_file(path).map_err(|e| match e {
        Error::Io(msg) => Error::Config { line: 0, msg },
        other => other,
    })?;
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

fn out_dir(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    flag.or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn config_err(msg: String) -> Error {
    Error::Config { line: 0, msg }
}

fn execute(command: Command) -> Result<(), (Error, bool)> {
    // the flag marks errors that concern classification input
    let plain = |e: Error| (e, false);
    match command {
        Command::Run { config, out, seed } => {
            let cfg = load(&config, seed).map_err(plain)?;
            let dir = out_dir(out, &cfg);
            let output = cli::cmd_run(&cfg, &dir).map_err(plain)?;
            println!("{} records written to {}", output.records.len(), dir.join(cli::DIAGNOSTICS_FILE).display());
        }
        Command::Kurth { config, k, t_end, cadence, q, out } => {
            let mut cfg = match config {
                Some(p) => load(&p, None).map_err(plain)?,
                None => RunConfig { out_dir: None, ..RunConfig::default() },
            };
            cfg.scenario = cli::Scenario::Kurth;
            if let Some(k) = k {
                cfg.kurth_k = k;
            }
            if let Some(t) = t_end {
                cfg.integrator.t_end = t;
            }
            if let Some(c) = cadence {
                cfg.integrator.output_cadence = c;
            }
            if let Some(q) = q {
                cfg.diagnostics.q_list = cli::parse_list(&q).map_err(|m| plain(config_err(format!("--q: {m}"))))?;
            }
            let dir = out_dir(out, &cfg);
            let output = cli::cmd_run(&cfg, &dir).map_err(plain)?;
            println!("{} records written to {}", output.records.len(), dir.join(cli::DIAGNOSTICS_FILE).display());
        }
        Command::Classify { csv, energy, mass, momentum, out } => {
            let momentum = match momentum {
                None => [0.0; 3],
                Some(s) => {
                    let v = cli::parse_list(&s).map_err(|m| plain(config_err(format!("--momentum: {m}"))))?;
                    <[f64; 3]>::try_from(v).map_err(|_| plain(config_err("--momentum needs three components".into())))?
                }
            };
            let dir = out.unwrap_or_else(|| csv.parent().map(Path::to_path_buf).unwrap_or_default());
            let report = cli::cmd_classify(&csv, &ClassifyInput { energy, momentum, mass }, &dir).map_err(|e| (e, true))?;
            println!("{}", report.label);
            for c in &report.consistency {
                println!("  ({}) {:?}: {}", c.id, c.outcome, c.detail);
            }
        }
        Command::Sweep { config, param, values, out, seed } => {
            let cfg = load(&config, seed).map_err(plain)?;
            let dir = out_dir(out, &cfg);
            let values: Vec<String> = if values.trim().is_empty() {
                Vec::new()
            } else {
                values.split(',').map(|v| v.trim().to_string()).collect()
            };
            let rows = cli::cmd_sweep(&cfg, &param, &values, &dir).map_err(plain)?;
            for r in rows {
                println!("{} = {}: {}", param, r.value, r.label);
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(args.command)) {
        Ok(()) => 0,
        Err((e, classify_input)) => {
            eprintln!("error: {e}");
            if classify_input {
                4
            } else {
                cli::exit_code(&e) as u8
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(main_with(std::env::args_os()))
}
