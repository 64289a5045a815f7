//! Command-line front end. Each subcommand is a thin wrapper over a library
//! call: [`cmd_generate`], [`cmd_run`] and [`cmd_eval`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::dataset::{self, Dataset, Manifest};
use crate::error::{Error, Result};
use crate::season::{self, EvalReport, Method, SeasonRun};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "soilscale", version, about = "Disaggregate coarse soil moisture with clustered kernel regression")]
pub struct Cli {
    /// TOML configuration; built-in defaults for anything not set.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Comma-separated days of year, snapped to the nearest scene days.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    pub days: Option<Vec<u32>>,
    #[arg(long, global = true, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Day-level worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic season (default output: ./dataset).
    Generate,
    /// Disaggregate every selected day of a dataset (default output: ./results).
    Run { dataset: PathBuf },
    /// Evaluate a results directory against its dataset.
    Eval { results: PathBuf, dataset: PathBuf },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } => EXIT_USAGE,
        e if e.is_numeric() => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

/// Configuration file (or defaults) with command-line overrides applied.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(d) = &cli.days {
        cfg.run.days = d.clone();
    }
    if let Some(m) = cli.method {
        cfg.run.method = m;
    }
    if let Some(j) = cli.jobs {
        cfg.run.jobs = j;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_generate(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    let days = dataset::select_days(&cfg.run.days);
    dataset::write_dataset(out, &cfg.synth, &cfg.calendar, cfg.run.seed, &days)
}

pub fn cmd_run(dataset_dir: &Path, cfg: &RunConfig, out: &Path) -> Result<SeasonRun> {
    let ds = Dataset::open(dataset_dir)?;
    let days = if cfg.run.days.is_empty() {
        ds.manifest().days.clone()
    } else {
        dataset::select_days(&cfg.run.days)
    };
    let season = season::run_season(&ds, cfg, cfg.run.method, &days, cfg.run.jobs)?;
    season::write_results(out, &season, ds.manifest(), cfg)?;
    Ok(season)
}

pub fn cmd_eval(results: &Path, dataset_dir: &Path, cfg: &RunConfig, out: &Path) -> Result<EvalReport> {
    let ds = Dataset::open(dataset_dir)?;
    let report = season::evaluate_results(results, &ds, &cfg.metrics)?;
    report.write(out)?;
    Ok(report)
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = effective_config(cli)?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(EXIT_OK);
    }
    let out = |default: &str| cli.out.clone().unwrap_or_else(|| PathBuf::from(default));
    match &cli.command {
        None => Err(Error::Config("a subcommand is required (generate, run or eval)".into())),
        Some(Command::Generate) => {
            let dir = out("dataset");
            let m = cmd_generate(&cfg, &dir)?;
            println!("wrote {} scenes to {}", m.days.len(), dir.display());
            Ok(EXIT_OK)
        }
        Some(Command::Run { dataset }) => {
            let dir = out("results");
            let s = cmd_run(dataset, &cfg, &dir)?;
            for d in &s.days {
                for (method, e) in &d.errors {
                    eprintln!("day {} {method}: {e}", d.day);
                }
            }
            println!(
                "processed {} days ({} with failures); results in {}",
                s.days.len(),
                s.failed_days(),
                dir.display()
            );
            if s.all_failed() {
                let code = s.days.iter().flat_map(|d| d.errors.first()).map(|(_, e)| exit_code(e)).next();
                return Ok(code.unwrap_or(EXIT_DATA));
            }
            Ok(EXIT_OK)
        }
        Some(Command::Eval { results, dataset }) => {
            let dir = cli.out.clone().unwrap_or_else(|| results.clone());
            let r = cmd_eval(results, dataset, &cfg, &dir)?;
            print!("{}", r.comparison_table());
            Ok(EXIT_OK)
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
