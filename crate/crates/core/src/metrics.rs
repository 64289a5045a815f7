//! Error statistics for disaggregated fields.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::synth::LandCover;

fn check_pair(est: &Grid, truth: &Grid) -> Result<()> {
    if !est.same_shape(truth) {
        return Err(Error::Dimension(format!(
            "estimate is {}x{}, truth is {}x{}",
            est.rows(),
            est.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    Ok(())
}

/// Pixel indices of class `class` in a land-cover grid.
pub fn class_pixels(lc: &Grid, class: LandCover) -> Vec<usize> {
    lc.values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == class.id() as f64)
        .map(|(i, _)| i)
        .collect()
}

fn masked_errors(est: &Grid, truth: &Grid, mask: Option<(&Grid, LandCover)>) -> Result<Vec<f64>> {
    check_pair(est, truth)?;
    let diff = |i: usize| est.values()[i] - truth.values()[i];
    let errs: Vec<f64> = match mask {
        None => (0..est.len()).map(diff).collect(),
        Some((lc, class)) => {
            if !lc.same_shape(truth) {
                return Err(Error::Dimension("land-cover mask does not match the grids".into()));
            }
            class_pixels(lc, class).into_iter().map(diff).collect()
        }
    };
    if errs.is_empty() {
        return Err(Error::Domain("no pixels selected".into()));
    }
    Ok(errs)
}

/// Root mean square error, optionally restricted to one land-cover class.
pub fn rmse(est: &Grid, truth: &Grid, mask: Option<(&Grid, LandCover)>) -> Result<f64> {
    let e = masked_errors(est, truth, mask)?;
    Ok((e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64).sqrt())
}

/// Standard deviation of the pixel errors.
pub fn error_sd(est: &Grid, truth: &Grid, mask: Option<(&Grid, LandCover)>) -> Result<f64> {
    let e = masked_errors(est, truth, mask)?;
    let n = e.len() as f64;
    let mean = e.iter().sum::<f64>() / n;
    Ok((e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// Fraction of pixels with absolute error strictly below `level`.
pub fn error_fraction_below(est: &Grid, truth: &Grid, level: f64) -> Result<f64> {
    let e = masked_errors(est, truth, None)?;
    Ok(e.iter().filter(|x| x.abs() < level).count() as f64 / e.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KldDirection {
    /// KL(p_truth ‖ p_estimate)
    TruthToEstimate,
    /// KL(p_estimate ‖ p_truth)
    EstimateToTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KldOptions {
    pub bins: usize,
    /// Histogram support; the joint sample range when unset.
    pub range: Option<[f64; 2]>,
    pub direction: KldDirection,
    pub epsilon: f64,
}

impl Default for KldOptions {
    fn default() -> Self {
        KldOptions {
            bins: 50,
            range: Some([0.0, 0.5]),
            direction: KldDirection::TruthToEstimate,
            epsilon: 1e-12,
        }
    }
}

fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize, eps: f64) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let width = (hi - lo) / bins as f64;
    for &s in samples {
        let b = if width > 0.0 { ((s - lo) / width).floor() } else { 0.0 };
        h[(b.max(0.0) as usize).min(bins - 1)] += 1.0;
    }
    let total: f64 = h.iter().map(|c| c + eps).sum();
    h.iter().map(|c| (c + eps) / total).collect()
}

/// Histogram KL divergence between the densities of two samples.
pub fn kld(est: &[f64], truth: &[f64], opts: &KldOptions) -> Result<f64> {
    if est.len() < 10 || truth.len() < 10 {
        return Err(Error::Domain("KL divergence needs at least 10 samples per density".into()));
    }
    if opts.bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    if est.iter().chain(truth).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    let (lo, hi) = match opts.range {
        Some([lo, hi]) if lo < hi => (lo, hi),
        Some(r) => return Err(Error::Domain(format!("empty histogram range {r:?}"))),
        None => est
            .iter()
            .chain(truth)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
    };
    let pe = histogram(est, lo, hi, opts.bins, opts.epsilon);
    let pt = histogram(truth, lo, hi, opts.bins, opts.epsilon);
    let (p, q) = match opts.direction {
        KldDirection::TruthToEstimate => (&pt, &pe),
        KldDirection::EstimateToTruth => (&pe, &pt),
    };
    Ok(p.iter().zip(q).map(|(a, b)| a * (a / b).ln()).sum::<f64>().max(0.0))
}

/// One-sided test of `mean |error| < threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZTest {
    pub statistic: f64,
    pub critical: f64,
    pub n: usize,
    /// The null hypothesis was not rejected at the 5% level.
    pub pass: bool,
}

/// Test whether the mean absolute error stays below `threshold`; rejects
/// when `(mean|e| − threshold) / (sd/√n)` exceeds the 95% quantile (normal
/// for `n ≥ 30`, Student t otherwise).
pub fn ztest_threshold(errors: &[f64], threshold: f64) -> Result<ZTest> {
    let n = errors.len();
    if n < 2 {
        return Err(Error::Domain(format!("Z-test needs at least 2 errors, got {n}")));
    }
    let abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    let nf = n as f64;
    let mean = abs.iter().sum::<f64>() / nf;
    let sd = (abs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let diff = mean - threshold;
    let statistic = if sd > 0.0 {
        diff / (sd / nf.sqrt())
    } else if diff > 0.0 {
        f64::INFINITY
    } else if diff < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    let critical = if n >= 30 {
        1.644_853_626_951_472_2
    } else {
        log::warn!("Z-test on {n} errors; using the Student t quantile");
        StudentsT::new(0.0, 1.0, nf - 1.0)
            .map_err(|e| Error::Numeric(e.to_string()))?
            .inverse_cdf(0.95)
    };
    if statistic.is_nan() {
        return Err(Error::Numeric("non-finite Z statistic".into()));
    }
    Ok(ZTest {
        statistic,
        critical,
        n,
        pass: statistic <= critical,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub ztest_threshold: f64,
    pub error_level: f64,
    pub kld: KldOptions,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            ztest_threshold: 0.04,
            error_level: 0.02,
            kld: KldOptions::default(),
        }
    }
}

/// All statistics of one method on one day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayEval {
    pub day: u32,
    pub method: String,
    pub rmse: f64,
    pub sd: f64,
    /// Indexed by land-cover id; `None` when the class is absent.
    pub rmse_by_class: [Option<f64>; 3],
    pub kld_by_class: [Option<f64>; 3],
    pub fraction_below: f64,
    pub ztest: ZTest,
}

pub fn evaluate_day(day: u32, method: &str, est: &Grid, truth: &Grid, lc: &Grid, cfg: &MetricsConfig) -> Result<DayEval> {
    let mut rmse_by_class = [None; 3];
    let mut kld_by_class = [None; 3];
    for class in LandCover::ALL {
        let px = class_pixels(lc, class);
        if px.is_empty() {
            continue;
        }
        rmse_by_class[class.id()] = Some(rmse(est, truth, Some((lc, class)))?);
        if px.len() >= 10 {
            let e: Vec<f64> = px.iter().map(|&i| est.values()[i]).collect();
            let t: Vec<f64> = px.iter().map(|&i| truth.values()[i]).collect();
            kld_by_class[class.id()] = Some(kld(&e, &t, &cfg.kld)?);
        }
    }
    let errors: Vec<f64> = est.values().iter().zip(truth.values()).map(|(a, b)| a - b).collect();
    Ok(DayEval {
        day,
        method: method.to_string(),
        rmse: rmse(est, truth, None)?,
        sd: error_sd(est, truth, None)?,
        rmse_by_class,
        kld_by_class,
        fraction_below: error_fraction_below(est, truth, cfg.error_level)?,
        ztest: ztest_threshold(&errors, cfg.ztest_threshold)?,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |x| x.to_string())
}

/// `day,method,rmse,sd,kld_corn,kld_cotton,kld_bare,ztest_pass`
pub fn eval_csv(rows: &[DayEval]) -> String {
    let mut s = String::from("day,method,rmse,sd,kld_corn,kld_cotton,kld_bare,ztest_pass\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.day,
            r.method,
            r.rmse,
            r.sd,
            opt(r.kld_by_class[LandCover::Corn.id()]),
            opt(r.kld_by_class[LandCover::Cotton.id()]),
            opt(r.kld_by_class[LandCover::Bare.id()]),
            r.ztest.pass
        ));
    }
    s
}

/// `day,method,rmse,sd,rmse_bare,rmse_corn,rmse_cotton,frac_below,z`
pub fn run_csv(rows: &[DayEval]) -> String {
    let mut s = String::from("day,method,rmse,sd,rmse_bare,rmse_corn,rmse_cotton,frac_below,z\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.day,
            r.method,
            r.rmse,
            r.sd,
            opt(r.rmse_by_class[0]),
            opt(r.rmse_by_class[1]),
            opt(r.rmse_by_class[2]),
            r.fraction_below,
            r.ztest.statistic
        ));
    }
    s
}
