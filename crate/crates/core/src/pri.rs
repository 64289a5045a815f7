//! PRI baseline: a discrete naive-Bayes first guess at fine resolution,
//! then Parzen-window optimization of `H(m) + β·KL(p_m ‖ p_initial)`
//! starting from the replicated coarse field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, VariableTag};
use crate::itclust::{silverman_rule, FeatureMatrix};
use crate::synth::{LandCover, Scene};

/// How a feature is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Equal-width bins over the training range.
    Continuous { bins: usize },
    /// Integer class ids `0..classes`.
    Categorical { classes: usize },
}

/// Equal-width (or categorical) discretization of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    pub lo: f64,
    pub width: f64,
    pub bins: usize,
    pub categorical: bool,
}

impl Discretizer {
    fn fit(values: &[f64], kind: FeatureKind) -> Result<Discretizer> {
        match kind {
            FeatureKind::Categorical { classes } => {
                if classes == 0 {
                    return Err(Error::Domain("categorical feature needs at least one class".into()));
                }
                Ok(Discretizer {
                    lo: 0.0,
                    width: 1.0,
                    bins: classes,
                    categorical: true,
                })
            }
            FeatureKind::Continuous { bins } => {
                if bins < 2 {
                    return Err(Error::Domain(format!("at least 2 bins are required, got {bins}")));
                }
                let (lo, hi) = values
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                if hi > lo {
                    Ok(Discretizer {
                        lo,
                        width: (hi - lo) / bins as f64,
                        bins,
                        categorical: false,
                    })
                } else {
                    log::warn!("constant variable; using a single bin");
                    Ok(Discretizer {
                        lo,
                        width: 0.0,
                        bins: 1,
                        categorical: false,
                    })
                }
            }
        }
    }

    /// Bin index; values outside the training range fall into the edge bins.
    pub fn bin(&self, v: f64) -> usize {
        if self.categorical {
            return (v.max(0.0) as usize).min(self.bins - 1);
        }
        if self.width == 0.0 {
            return 0;
        }
        (((v - self.lo) / self.width).floor().max(0.0) as usize).min(self.bins - 1)
    }

    pub fn center(&self, b: usize) -> f64 {
        if self.categorical {
            b as f64
        } else {
            self.lo + (b as f64 + 0.5) * self.width
        }
    }
}

/// Class prior and per-feature conditional tables `p(x_j | y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePosterior {
    pub target: Discretizer,
    pub features: Vec<Discretizer>,
    pub prior: Vec<f64>,
    /// `tables[j][y * bins_j + b] = p(x_j in bin b | y)`.
    pub tables: Vec<Vec<f64>>,
}

pub fn fit_bayes(x: &FeatureMatrix, y: &[f64], k: usize, kinds: &[FeatureKind]) -> Result<DiscretePosterior> {
    if x.n() == 0 || y.len() != x.n() {
        return Err(Error::Dimension(format!("{} targets for {} training rows", y.len(), x.n())));
    }
    if kinds.len() != x.d() {
        return Err(Error::Dimension(format!("{} feature kinds for {} columns", kinds.len(), x.d())));
    }
    let target = Discretizer::fit(y, FeatureKind::Continuous { bins: k })?;
    let features = kinds
        .iter()
        .enumerate()
        .map(|(j, &kind)| Discretizer::fit(&x.column(j), kind))
        .collect::<Result<Vec<_>>>()?;
    let ky = target.bins;
    let labels: Vec<usize> = y.iter().map(|&v| target.bin(v)).collect();
    let mut counts = vec![0.0; ky];
    labels.iter().for_each(|&l| counts[l] += 1.0);
    let n = x.n() as f64;
    let prior = counts.iter().map(|c| c / n).collect();
    let tables = features
        .iter()
        .enumerate()
        .map(|(j, disc)| {
            let kb = disc.bins;
            let mut t = vec![1.0; ky * kb];
            for (i, &l) in labels.iter().enumerate() {
                t[l * kb + disc.bin(x.row(i)[j])] += 1.0;
            }
            for l in 0..ky {
                let total = counts[l] + kb as f64;
                t[l * kb..(l + 1) * kb].iter_mut().for_each(|v| *v /= total);
            }
            t
        })
        .collect();
    Ok(DiscretePosterior {
        target,
        features,
        prior,
        tables,
    })
}

impl DiscretePosterior {
    /// Unnormalized log posterior of every class for one feature vector.
    pub fn log_scores(&self, x: &[f64]) -> Vec<f64> {
        let ky = self.prior.len();
        (0..ky)
            .map(|l| {
                let mut s = self.prior[l].ln();
                for (j, disc) in self.features.iter().enumerate() {
                    s += self.tables[j][l * disc.bins + disc.bin(x[j])].ln();
                }
                s
            })
            .collect()
    }

    /// Normalized class posterior.
    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        let s = self.log_scores(x);
        let top = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = s.iter().map(|v| (v - top).exp()).collect();
        let total: f64 = e.iter().sum();
        e.into_iter().map(|v| v / total).collect()
    }

    /// Center of the maximum a posteriori class; ties go to the lower class.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let s = self.log_scores(x);
        let mut best = 0;
        for (l, &v) in s.iter().enumerate() {
            if v > s[best] {
                best = l;
            }
        }
        self.target.center(best)
    }
}

/// First guess for every row of `x`, as a grid shaped like `like`.
pub fn bayes_initial(model: &DiscretePosterior, x: &FeatureMatrix, like: &Grid) -> Result<Grid> {
    if x.n() != like.len() || x.d() != model.features.len() {
        return Err(Error::Dimension("feature matrix does not match the model or grid".into()));
    }
    let values = (0..x.n()).map(|i| model.predict(x.row(i)).clamp(0.0, 1.0)).collect();
    Grid::new(like.rows(), like.cols(), like.cell_size(), VariableTag::Sm, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriConfig {
    pub beta: f64,
    pub iterations: usize,
    /// Step as a fraction of the standard deviation of the initial estimate.
    pub step_fraction: f64,
    /// Parzen width; Silverman's rule on the initial estimate when unset.
    pub sigma: Option<f64>,
    pub sm_bins: usize,
    pub feature_bins: usize,
}

impl Default for PriConfig {
    fn default() -> Self {
        PriConfig {
            beta: 2.0,
            iterations: 100,
            step_fraction: 0.05,
            sigma: None,
            sm_bins: 20,
            feature_bins: 20,
        }
    }
}

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const GRID_POINTS: usize = 512;
const MAX_HALVINGS: usize = 10;

fn gauss(u: f64, sigma: f64) -> f64 {
    (-0.5 * u * u / (sigma * sigma)).exp() / (sigma * SQRT_2PI)
}

fn gauss_deriv(u: f64, sigma: f64) -> f64 {
    -u / (sigma * sigma) * gauss(u, sigma)
}

/// Parzen density of a sample with few distinct values, evaluated exactly.
#[derive(Debug, Clone)]
struct AnchorDensity {
    centers: Vec<f64>,
    weights: Vec<f64>,
    sigma: f64,
}

impl AnchorDensity {
    fn new(sample: &[f64], sigma: f64) -> AnchorDensity {
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut centers: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for v in sorted {
            match centers.last() {
                Some(&c) if c == v => *weights.last_mut().expect("paired") += 1.0,
                _ => {
                    centers.push(v);
                    weights.push(1.0);
                }
            }
        }
        let n = sample.len() as f64;
        weights.iter_mut().for_each(|w| *w /= n);
        AnchorDensity { centers, weights, sigma }
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        self.centers.iter().zip(&self.weights).fold((0.0, 0.0), |(p, d), (&c, &w)| {
            (p + w * gauss(x - c, self.sigma), d + w * gauss_deriv(x - c, self.sigma))
        })
    }
}

/// Mean log Parzen density of a sample at its own points, and its gradient,
/// via linear binning on a regular grid.
fn self_log_density(m: &[f64], sigma: f64) -> (f64, Vec<f64>) {
    let n = m.len();
    let nf = n as f64;
    let (min, max) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let lo = min - 4.0 * sigma;
    let delta = (max - min + 8.0 * sigma) / (GRID_POINTS - 1) as f64;
    let locate = |x: f64| {
        let t = ((x - lo) / delta).clamp(0.0, (GRID_POINTS - 1) as f64 - 1e-9);
        let i = t.floor() as usize;
        (i, t - i as f64)
    };
    let bin = |w: &dyn Fn(usize) -> f64| {
        let mut g = vec![0.0; GRID_POINTS];
        for (a, &x) in m.iter().enumerate() {
            let (i, f) = locate(x);
            g[i] += w(a) * (1.0 - f);
            g[i + 1] += w(a) * f;
        }
        g
    };
    let half = ((4.0 * sigma / delta).ceil() as usize).min(GRID_POINTS - 1);
    let kern: Vec<f64> = (0..=2 * half).map(|t| gauss((t as f64 - half as f64) * delta, sigma)).collect();
    let dkern: Vec<f64> = (0..=2 * half)
        .map(|t| gauss_deriv((t as f64 - half as f64) * delta, sigma))
        .collect();
    let conv = |g: &[f64], k: &[f64]| {
        let mut out = vec![0.0; GRID_POINTS];
        for (s, &gs) in g.iter().enumerate() {
            if gs == 0.0 {
                continue;
            }
            let t0 = s.saturating_sub(half);
            let t1 = (s + half).min(GRID_POINTS - 1);
            for t in t0..=t1 {
                out[t] += gs * k[t + half - s];
            }
        }
        out
    };
    let interp = |g: &[f64], x: f64| {
        let (i, f) = locate(x);
        g[i] * (1.0 - f) + g[i + 1] * f
    };

    let counts = bin(&|_| 1.0);
    let dens = conv(&counts, &kern);
    let deriv = conv(&counts, &dkern);
    let p: Vec<f64> = m.iter().map(|&x| (interp(&dens, x) / nf).max(f64::MIN_POSITIVE)).collect();
    let a = p.iter().map(|v| v.ln()).sum::<f64>() / nf;
    let inv = bin(&|i| 1.0 / p[i]);
    let cross = conv(&inv, &dkern);
    let grad = m
        .iter()
        .zip(&p)
        .map(|(&x, &pi)| (interp(&deriv, x) / nf / pi + interp(&cross, x) / nf) / nf)
        .collect();
    (a, grad)
}

/// Objective `(β−1)·A − β·C` with `A = mean log p_m(m_i)` and
/// `C = mean log p_initial(m_i)`; equals `H(m) + β·KL(p_m ‖ p_initial)` for
/// the plug-in entropy and divergence estimates.
fn objective(m: &[f64], anchor: &AnchorDensity, beta: f64, sigma: f64) -> (f64, Vec<f64>) {
    let nf = m.len() as f64;
    let (a, grad_a) = self_log_density(m, sigma);
    let mut c = 0.0;
    let grad = m
        .iter()
        .zip(&grad_a)
        .map(|(&x, &ga)| {
            let (p0, d0) = anchor.eval(x);
            let p0 = p0.max(f64::MIN_POSITIVE);
            c += p0.ln();
            (beta - 1.0) * ga - beta * d0 / p0 / nf
        })
        .collect();
    ((beta - 1.0) * a - beta * c / nf, grad)
}

/// Direct `O(N²)` evaluation of the PRI objective, for checking.
pub fn pri_objective(m: &[f64], initial: &[f64], beta: f64, sigma: f64) -> f64 {
    let nf = m.len() as f64;
    let pm = |x: f64| m.iter().map(|&y| gauss(x - y, sigma)).sum::<f64>() / nf;
    let p0 = |x: f64| initial.iter().map(|&y| gauss(x - y, sigma)).sum::<f64>() / initial.len() as f64;
    let h = -m.iter().map(|&x| pm(x).ln()).sum::<f64>() / nf;
    let kl = m.iter().map(|&x| (pm(x) / p0(x)).ln()).sum::<f64>() / nf;
    h + beta * kl
}

/// Result of [`pri_optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct PriOutcome {
    pub sm: Grid,
    /// Objective after initialization and after every accepted step.
    pub objective: Vec<f64>,
    pub sigma: f64,
}

fn sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Morph the replicated coarse field towards the density of `initial`
/// while keeping its entropy high.
pub fn pri_optimize(initial: &Grid, coarse: &Grid, config: &PriConfig) -> Result<PriOutcome> {
    if !(config.beta >= 0.0) {
        return Err(Error::Domain(format!("beta must be non-negative, got {}", config.beta)));
    }
    if coarse.rows() == 0 || !initial.rows().is_multiple_of(coarse.rows()) || !initial.cols().is_multiple_of(coarse.cols()) {
        return Err(Error::Dimension("coarse grid does not tile the initial estimate".into()));
    }
    let factor = initial.rows() / coarse.rows();
    if initial.cols() / coarse.cols() != factor {
        return Err(Error::Dimension("anisotropic coarse factor".into()));
    }
    let init = initial.values();
    let spread = sd(init);
    let sigma = match config.sigma {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(Error::Domain(format!("Parzen width must be positive, got {s}"))),
        None => {
            let s = silverman_rule(spread, init.len(), 1);
            if s > 0.0 && s.is_finite() {
                s
            } else {
                0.01
            }
        }
    };
    let anchor = AnchorDensity::new(init, sigma);
    let mut m: Vec<f64> = grid::replicate(coarse, factor)?.into_values();
    let step0 = config.step_fraction * spread;
    let (mut f, mut g) = objective(&m, &anchor, config.beta, sigma);
    if !f.is_finite() {
        return Err(Error::Numeric("non-finite PRI objective at initialization".into()));
    }
    let mut trace = vec![f];
    for _ in 0..config.iterations {
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(gmax > 0.0) || !(step0 > 0.0) {
            break;
        }
        let mut step = step0;
        let mut accepted = None;
        let mut non_finite = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = m.iter().zip(&g).map(|(x, d)| x - step * d / gmax).collect();
            let (fc, gc) = objective(&cand, &anchor, config.beta, sigma);
            if fc.is_finite() && fc < f {
                accepted = Some((cand, fc, gc));
                break;
            }
            non_finite = !fc.is_finite();
            step *= 0.5;
        }
        match accepted {
            Some((cand, fc, gc)) => {
                m = cand;
                f = fc;
                g = gc;
                trace.push(f);
            }
            None if non_finite => {
                return Err(Error::Numeric(format!(
                    "PRI objective not finite after {MAX_HALVINGS} step halvings"
                )))
            }
            None => break,
        }
    }
    let values = m.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(PriOutcome {
        sm: Grid::new(initial.rows(), initial.cols(), initial.cell_size(), VariableTag::Sm, values)?,
        objective: trace,
        sigma,
    })
}

/// `[LST, PPT, LAI, LC]` for every fine pixel.
pub fn pri_features(scene: &Scene) -> Result<FeatureMatrix> {
    let n = scene.n_pixels();
    let mut v = Vec::with_capacity(n * 4);
    for i in 0..n {
        v.extend([
            scene.lst.values()[i],
            scene.ppt.values()[i],
            scene.lai.values()[i],
            scene.lc.values()[i],
        ]);
    }
    FeatureMatrix::new(n, 4, v)
}

/// Bayes first guess from the in-situ pixels followed by PRI optimization.
pub fn run_day(scene: &Scene, config: &PriConfig) -> Result<PriOutcome> {
    let x = pri_features(scene)?;
    let train: Vec<usize> = scene.insitu.iter().map(|o| o.pixel).collect();
    let y: Vec<f64> = scene.insitu.iter().map(|o| o.value).collect();
    let kinds = [
        FeatureKind::Continuous { bins: config.feature_bins },
        FeatureKind::Continuous { bins: config.feature_bins },
        FeatureKind::Continuous { bins: config.feature_bins },
        FeatureKind::Categorical { classes: LandCover::ALL.len() },
    ];
    let model = fit_bayes(&x.select(&train), &y, config.sm_bins, &kinds)?;
    let initial = bayes_initial(&model, &x, &scene.true_sm)?;
    pri_optimize(&initial, &scene.coarse_sm, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn sm_grid(rows: usize, values: Vec<f64>) -> Grid {
        let cols = values.len() / rows;
        Grid::new(rows, cols, 1000.0, VariableTag::Sm, values).unwrap()
    }

    #[test]
    fn tables_are_normalized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<Vec<f64>> = (0..300).map(|_| vec![rng.random::<f64>(), rng.random_range(0..3) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 0.1 + 0.2 * r[0]).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let kinds = [FeatureKind::Continuous { bins: 20 }, FeatureKind::Categorical { classes: 3 }];
        let model = fit_bayes(&x, &y, 20, &kinds).unwrap();
        assert!((model.prior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (t, d) in model.tables.iter().zip(&model.features) {
            for row in t.chunks(d.bins) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn diagonal_mapping_is_recovered() {
        // ten balanced bins, y is the bin of x
        let rows: Vec<Vec<f64>> = (0..200).map(|i| vec![(i % 10) as f64 + 0.5]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let model = fit_bayes(&x, &y, 10, &[FeatureKind::Continuous { bins: 10 }]).unwrap();
        for r in &rows {
            let want = model.target.center(model.target.bin(r[0]));
            assert_eq!(model.predict(r), want);
        }
    }

    #[test]
    fn single_class_gives_constant_output() {
        let x = FeatureMatrix::new(5, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let model = fit_bayes(&x, &[0.2; 5], 20, &[FeatureKind::Continuous { bins: 4 }]).unwrap();
        for v in [0.0, 2.5, 9.0] {
            assert_eq!(model.predict(&[v]), 0.2);
        }
    }

    #[test]
    fn binned_objective_matches_direct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m: Vec<f64> = (0..400).map(|_| 0.1 + 0.2 * rng.random::<f64>()).collect();
        let init: Vec<f64> = (0..400).map(|i| 0.12 + 0.02 * (i % 7) as f64).collect();
        let sigma = 0.02;
        let anchor = AnchorDensity::new(&init, sigma);
        let (f, g) = objective(&m, &anchor, 2.0, sigma);
        let direct = pri_objective(&m, &init, 2.0, sigma);
        assert!((f - direct).abs() < 1e-3 * direct.abs().max(1.0), "{f} vs {direct}");
        // gradient against central differences of the direct objective
        let h = 1e-6;
        for i in [0, 17, 311] {
            let mut up = m.clone();
            let mut dn = m.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (pri_objective(&up, &init, 2.0, sigma) - pri_objective(&dn, &init, 2.0, sigma)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 0.02 * fd.abs().max(1e-3), "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn zero_iterations_return_replicated_coarse() {
        let coarse = sm_grid(2, vec![0.1, 0.2, 0.3, 0.4]);
        let init = sm_grid(10, (0..100).map(|i| 0.1 + 0.003 * i as f64).collect());
        let cfg = PriConfig { iterations: 0, ..Default::default() };
        let out = pri_optimize(&init, &coarse, &cfg).unwrap();
        assert_eq!(out.sm.values(), grid::replicate(&coarse, 5).unwrap().values());
    }

    #[test]
    fn objective_never_increases() {
        let coarse = sm_grid(2, vec![0.1, 0.2, 0.3, 0.25]);
        let init = sm_grid(10, (0..100).map(|i| 0.05 + 0.02 * (i % 9) as f64).collect());
        let out = pri_optimize(&init, &coarse, &PriConfig::default()).unwrap();
        assert!(out.objective.len() > 1);
        assert!(out.objective.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!(out.sm.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn rejects_bad_input() {
        let coarse = sm_grid(3, vec![0.1; 9]);
        let init = sm_grid(10, vec![0.1; 100]);
        assert!(matches!(pri_optimize(&init, &coarse, &PriConfig::default()), Err(Error::Dimension(_))));
        let coarse = sm_grid(2, vec![0.1; 4]);
        let cfg = PriConfig { beta: -1.0, ..Default::default() };
        assert!(matches!(pri_optimize(&init, &coarse, &cfg), Err(Error::Domain(_))));
    }
}
