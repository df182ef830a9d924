use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use treecal::harness::verify::{verify, Suite, VerifyOptions};
use treecal::harness::{execute, run_experiment, run_sweep, write_csv, write_json, write_trace, ReportRow, RunConfig};
use treecal::Error;

#[derive(Parser)]
#[command(name = "treecal", version, about = "Online calibration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configuration and report its metrics.
    Run(RunArgs),
    /// Run the Cartesian product of the sweep axes.
    Sweep(RunArgs),
    /// Check the invariant suite.
    Verify(VerifyArgs),
    /// Dump a run's transcript and assignment events as JSON lines.
    Trace(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Flat TOML manifest; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    keys: KeyOverrides,
}

#[allow(non_snake_case)]
#[derive(Args, Default)]
struct KeyOverrides {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    #[arg(long)]
    adversary: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    period: Option<usize>,
    #[arg(long = "vertex_weights", value_delimiter = ',', allow_hyphen_values = true)]
    vertex_weights: Option<Vec<f64>>,
    #[arg(long = "constant_point", value_delimiter = ',', allow_hyphen_values = true)]
    constant_point: Option<Vec<f64>>,
    #[arg(long = "drift_start", value_delimiter = ',', allow_hyphen_values = true)]
    drift_start: Option<Vec<f64>>,
    #[arg(long = "drift_end", value_delimiter = ',', allow_hyphen_values = true)]
    drift_end: Option<Vec<f64>>,
    #[arg(long = "base_point", value_delimiter = ',', allow_hyphen_values = true)]
    base_point: Option<Vec<f64>>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long = "H")]
    H: Option<usize>,
    #[arg(long = "L")]
    L: Option<usize>,
    #[arg(long = "T")]
    T: Option<usize>,
    #[arg(long = "S")]
    S: Option<usize>,
    #[arg(long)]
    regularizer: Option<String>,
    #[arg(long, value_delimiter = ',')]
    norms: Option<Vec<String>>,
    #[arg(long = "sweep_H", value_delimiter = ',')]
    sweep_H: Option<Vec<usize>>,
    #[arg(long = "sweep_L", value_delimiter = ',')]
    sweep_L: Option<Vec<usize>>,
    #[arg(long = "sweep_T", value_delimiter = ',')]
    sweep_T: Option<Vec<usize>>,
    #[arg(long = "sweep_d", value_delimiter = ',')]
    sweep_d: Option<Vec<usize>>,
    #[arg(long = "sweep_seeds", value_delimiter = ',')]
    sweep_seeds: Option<Vec<u64>>,
}

impl KeyOverrides {
    fn apply(self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { cfg.$field = v; } )* };
        }
        macro_rules! set_some {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { cfg.$field = Some(v); } )* };
        }
        set!(seed, domain, d, radius, lo, hi, adversary, alpha, vertex_weights, algorithm, H, L, S, regularizer, norms);
        set!(sweep_H, sweep_L, sweep_T, sweep_d, sweep_seeds);
        set_some!(out, period, constant_point, drift_start, drift_end, base_point, T);
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "fast")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Disable TreeCal's prefix-mean update to confirm the suite catches it.
    #[arg(long)]
    inject_fault: bool,
}

enum Failure {
    Check(String),
    Config(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Unsupported(_) => Failure::Config(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn load(args: RunArgs) -> Result<(RunConfig, Format), Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    args.keys.apply(&mut cfg);
    Ok((cfg, args.format))
}

fn output(cfg: &RunConfig) -> Result<Box<dyn Write>, Failure> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(cfg: &RunConfig, format: Format, rows: &[ReportRow]) -> Result<(), Failure> {
    let mut w = output(cfg)?;
    match format {
        Format::Csv => write_csv(&mut w, rows)?,
        Format::Json => write_json(&mut w, rows)?,
    }
    w.flush()?;
    let failed: Vec<&ReportRow> = rows.iter().filter(|r| r.is_failure()).collect();
    match failed.first() {
        None => Ok(()),
        Some(r) => Err(Failure::Check(format!(
            "{} bound check(s) failed; first: {} {} {}: {} > {}",
            failed.len(),
            r.run_id,
            r.norm,
            r.metric,
            r.value,
            r.bound.unwrap_or(f64::NAN)
        ))),
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run(args) => {
            let (cfg, format) = load(args)?;
            if cfg.has_sweep() {
                log::warn!("sweep axes are ignored by `run`; use `sweep`");
            }
            let rows = run_experiment(&cfg)?;
            emit(&cfg, format, &rows)
        }
        Command::Sweep(args) => {
            let (cfg, format) = load(args)?;
            let rows = run_sweep(&cfg)?;
            emit(&cfg, format, &rows)
        }
        Command::Trace(args) => {
            let (cfg, _) = load(args)?;
            let out = execute(&cfg.resolve()?, true)?;
            let mut w = output(&cfg)?;
            write_trace(&mut w, &out)?;
            w.flush()?;
            Ok(())
        }
        Command::Verify(args) => {
            let suite: Suite = args.suite.parse()?;
            let summary = verify(VerifyOptions { suite, seed: args.seed, inject_fault: args.inject_fault });
            println!("{summary}");
            if summary.passed() {
                Ok(())
            } else {
                Err(Failure::Check("invariant suite failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
