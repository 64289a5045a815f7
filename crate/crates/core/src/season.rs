//! Season-level driver: run SRRM and/or PRI on every selected day, write the
//! per-day grids and CSV tables, and evaluate results against the truth.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dataset::{Dataset, Manifest, MANIFEST};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::metrics::{self, DayEval, MetricsConfig};
use crate::pri::{self, PriOutcome};
use crate::srrm::{self, DayOutput};
use crate::synth::{self, LandCover};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Srrm,
    Pri,
    Both,
}

impl Method {
    pub fn runs_srrm(self) -> bool {
        self != Method::Pri
    }

    pub fn runs_pri(self) -> bool {
        self != Method::Srrm
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Srrm => "srrm",
            Method::Pri => "pri",
            Method::Both => "both",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "srrm" => Ok(Method::Srrm),
            "pri" => Ok(Method::Pri),
            "both" => Ok(Method::Both),
            _ => Err(Error::Config(format!("unknown method `{s}`; expected srrm, pri or both"))),
        }
    }
}

pub fn result_name(day: u32, method: &str) -> String {
    format!("doy{day:03}_sm_{method}.grid")
}

/// Everything produced for one day. A failed method leaves its slot empty
/// and records the error.
#[derive(Debug)]
pub struct DayRun {
    pub day: u32,
    pub srrm: Option<DayOutput>,
    pub pri: Option<PriOutcome>,
    pub evals: Vec<DayEval>,
    pub errors: Vec<(&'static str, Error)>,
}

#[derive(Debug)]
pub struct SeasonRun {
    pub days: Vec<DayRun>,
    /// Day and per-iteration RMSE of the convergence trace, when requested.
    pub trace: Option<(u32, Vec<f64>)>,
}

impl SeasonRun {
    pub fn evals(&self) -> Vec<DayEval> {
        self.days.iter().flat_map(|d| d.evals.iter().cloned()).collect()
    }

    pub fn metrics_csv(&self) -> String {
        metrics::run_csv(&self.evals())
    }

    /// `day,k,psi,mu,cv_mae` for every SRRM day.
    pub fn params_csv(&self) -> String {
        let mut s = String::from("day,k,psi,mu,cv_mae\n");
        for d in &self.days {
            if let Some(o) = &d.srrm {
                let mae = o.cv_mae.map_or_else(|| "NaN".into(), |v| v.to_string());
                let _ = writeln!(s, "{},{},{},{},{}", d.day, o.params.k, o.params.psi, o.params.mu, mae);
            }
        }
        s
    }

    pub fn trace_csv(&self) -> Option<String> {
        self.trace.as_ref().map(|(day, t)| {
            let mut s = format!("# day {day}\niteration,rmse\n");
            for (i, v) in t.iter().enumerate() {
                let _ = writeln!(s, "{},{v}", i + 1);
            }
            s
        })
    }

    pub fn failed_days(&self) -> usize {
        self.days.iter().filter(|d| !d.errors.is_empty()).count()
    }

    /// True when no day produced any output.
    pub fn all_failed(&self) -> bool {
        !self.days.is_empty() && self.days.iter().all(|d| d.srrm.is_none() && d.pri.is_none())
    }
}

fn run_one(dataset: &Dataset, config: &RunConfig, method: Method, day: u32) -> DayRun {
    let mut out = DayRun {
        day,
        srrm: None,
        pri: None,
        evals: Vec::new(),
        errors: Vec::new(),
    };
    let scene = match dataset.scene(day) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("day {day}: {e}");
            out.errors.push(("data", e));
            return out;
        }
    };
    let record = |name: &'static str, est: Result<&Grid>, out: &mut DayRun| {
        match est.and_then(|g| metrics::evaluate_day(day, name, g, &scene.true_sm, &scene.lc, &config.metrics)) {
            Ok(e) => out.evals.push(e),
            Err(e) => {
                log::warn!("day {day} {name}: {e}");
                out.errors.push((name, e));
            }
        }
    };
    if method.runs_srrm() {
        let r = srrm::run_day(&scene, &config.srrm(), config.run.seed);
        record("srrm", r.as_ref().map(|o| &o.sm).map_err(clone_err), &mut out);
        out.srrm = r.ok();
    }
    if method.runs_pri() {
        let r = pri::run_day(&scene, &config.pri);
        record("pri", r.as_ref().map(|o| &o.sm).map_err(clone_err), &mut out);
        out.pri = r.ok();
    }
    out
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::Dimension(m) => Error::Dimension(m.clone()),
        Error::Domain(m) => Error::Domain(m.clone()),
        Error::DegenerateCluster(m) => Error::DegenerateCluster(m.clone()),
        Error::DegenerateData(m) => Error::DegenerateData(m.clone()),
        Error::Solver(m) => Error::Solver(m.clone()),
        Error::Schema(m) => Error::Schema(m.clone()),
        Error::Numeric(m) => Error::Numeric(m.clone()),
        Error::Config(m) => Error::Config(m.clone()),
        Error::Parse { path, line, message } => Error::Parse {
            path: path.clone(),
            line: *line,
            message: message.clone(),
        },
        Error::Io { path, source } => Error::Io {
            path: path.clone(),
            source: std::io::Error::new(source.kind(), source.to_string()),
        },
    }
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        Ok(f())
    }
}

/// Run the configured method(s) on `days` of `dataset`. `jobs` = 0 uses
/// every available core. Per-day failures are recorded, not returned.
pub fn run_season(dataset: &Dataset, config: &RunConfig, method: Method, days: &[u32], jobs: usize) -> Result<SeasonRun> {
    for d in days {
        if !dataset.manifest().days.contains(d) {
            return Err(Error::Domain(format!("day {d} is not part of the dataset")));
        }
    }
    let runs = with_jobs(jobs, || crate::par::map(days, |&d| run_one(dataset, config, method, d)))?;
    let mut season = SeasonRun { days: runs, trace: None };
    if method.runs_srrm() && config.run.trace_day != 0 && config.run.trace_iterations > 0 {
        let tday = synth::nearest_season_days(&[config.run.trace_day])[0];
        if let Some(params) = season.days.iter().find(|d| d.day == tday).and_then(|d| d.srrm.as_ref()).map(|o| o.params) {
            let scene = dataset.scene(tday)?;
            let t = with_jobs(jobs, || {
                srrm::iteration_trace(&scene, params, &config.srrm(), config.run.seed, config.run.trace_iterations)
            })?;
            match t {
                Ok(t) => season.trace = Some((tday, t)),
                Err(e) => log::warn!("iteration trace for day {tday}: {e}"),
            }
        }
    }
    Ok(season)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write grids, `metrics.csv`, `params.csv`, `iteration_trace.csv` and a copy
/// of the dataset manifest into `out`.
pub fn write_results(out: &Path, season: &SeasonRun, manifest: &Manifest, config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for d in &season.days {
        if let Some(o) = &d.srrm {
            o.sm.save(&out.join(result_name(d.day, "srrm")))?;
        }
        if let Some(o) = &d.pri {
            o.sm.save(&out.join(result_name(d.day, "pri")))?;
        }
    }
    write(&out.join("metrics.csv"), &season.metrics_csv())?;
    write(&out.join("params.csv"), &season.params_csv())?;
    if let Some(t) = season.trace_csv() {
        write(&out.join("iteration_trace.csv"), &t)?;
    }
    write(&out.join("config.toml"), &config.to_toml())?;
    manifest.save(&out.join(MANIFEST))
}

/// Evaluation of a results directory against its dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<DayEval>,
}

const METHODS: [&str; 2] = ["srrm", "pri"];

pub fn evaluate_results(results: &Path, dataset: &Dataset, cfg: &MetricsConfig) -> Result<EvalReport> {
    let recorded = Manifest::load(&results.join(MANIFEST))?;
    if &recorded != dataset.manifest() {
        return Err(Error::Schema(format!(
            "{} was produced from a different dataset",
            results.display()
        )));
    }
    let mut rows = Vec::new();
    for &day in &dataset.manifest().days {
        let present: Vec<&str> = METHODS
            .into_iter()
            .filter(|m| results.join(result_name(day, m)).exists())
            .collect();
        if present.is_empty() {
            continue;
        }
        let scene = dataset.scene(day)?;
        for m in present {
            let est = Grid::load(&results.join(result_name(day, m)))?;
            rows.push(metrics::evaluate_day(day, m, &est, &scene.true_sm, &scene.lc, cfg)?);
        }
    }
    Ok(EvalReport { rows })
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

impl EvalReport {
    pub fn csv(&self) -> String {
        metrics::eval_csv(&self.rows)
    }

    fn get(&self, day: u32, method: &str) -> Option<&DayEval> {
        self.rows.iter().find(|r| r.day == day && r.method == method)
    }

    /// Fixed-width per-day table of both methods side by side.
    pub fn comparison_table(&self) -> String {
        let mut days: Vec<u32> = self.rows.iter().map(|r| r.day).collect();
        days.dedup();
        let mut s = format!(
            "{:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
            "day", "rmse_srrm", "rmse_pri", "sd_srrm", "sd_pri", "f02_srrm", "f02_pri"
        );
        for day in days {
            let (a, b) = (self.get(day, "srrm"), self.get(day, "pri"));
            let _ = writeln!(
                s,
                "{:>5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
                day,
                cell(a.map(|r| r.rmse)),
                cell(b.map(|r| r.rmse)),
                cell(a.map(|r| r.sd)),
                cell(b.map(|r| r.sd)),
                cell(a.map(|r| r.fraction_below)),
                cell(b.map(|r| r.fraction_below)),
            );
        }
        s
    }

    /// `method,landcover,days,rmse,kld`: season means per land cover.
    pub fn landcover_csv(&self) -> String {
        let mut s = String::from("method,landcover,days,rmse,kld\n");
        for m in METHODS {
            for lc in [LandCover::Corn, LandCover::Cotton, LandCover::Bare] {
                let rows: Vec<&DayEval> = self.rows.iter().filter(|r| r.method == m).collect();
                let rmse: Vec<f64> = rows.iter().filter_map(|r| r.rmse_by_class[lc.id()]).collect();
                if rmse.is_empty() {
                    continue;
                }
                let kld = mean(rows.iter().filter_map(|r| r.kld_by_class[lc.id()]));
                let _ = writeln!(
                    s,
                    "{m},{},{},{},{}",
                    lc.name(),
                    rmse.len(),
                    mean(rmse.iter().copied()).expect("non-empty"),
                    kld.map_or_else(|| "NaN".into(), |v| v.to_string())
                );
            }
        }
        s
    }

    pub fn write(&self, out: &Path) -> Result<()> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        write(&out.join("eval_metrics.csv"), &self.csv())?;
        write(&out.join("comparison.txt"), &self.comparison_table())?;
        write(&out.join("kld_landcover.csv"), &self.landcover_csv())
    }
}
