//! Kernel ridge regression in dual form.
//!
//! Features and targets are standardized over the training set, each feature
//! vector is augmented with a constant 1, and the dual weights solve
//! `(μI + K) w = y` by Cholesky factorization.

use faer::linalg::solvers::Solve;
use faer::{Col, Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itclust::{exp_neg, silverman_rule, FeatureMatrix};

/// Per-column location and scale; constant columns keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &FeatureMatrix) -> Standardizer {
        let n = x.n().max(1) as f64;
        let (mut mean, mut scale) = (Vec::new(), Vec::new());
        for j in 0..x.d() {
            let col = x.column(j);
            let m = col.iter().sum::<f64>() / n;
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            mean.push(m);
            scale.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    /// Standardized row with the constant feature appended.
    fn augment(&self, row: &[f64], out: &mut Vec<f64>) {
        out.extend(row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s));
        out.push(1.0);
    }
}

fn target_scale(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    (mean, if sd > 0.0 { sd } else { 1.0 })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    /// Augmented standardized training inputs, row-major `n × (d+1)`.
    pub x_train: Vec<f64>,
    pub d: usize,
    pub weights: Vec<f64>,
    pub sigma: f64,
    pub mu: f64,
    pub features: Standardizer,
    pub y_mean: f64,
    pub y_scale: f64,
}

impl KernelModel {
    pub fn n_train(&self) -> usize {
        self.weights.len()
    }

    /// Kernel part of the prediction on the standardized target scale.
    pub fn predict_standardized(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::Domain(format!("model expects {} features, got {}", self.d, x.len())));
        }
        let mut z = Vec::with_capacity(self.d + 1);
        self.features.augment(x, &mut z);
        let c = -0.5 / (self.sigma * self.sigma);
        Ok(self
            .x_train
            .chunks(self.d + 1)
            .zip(&self.weights)
            .map(|(xt, w)| w * exp_neg(c * sq_dist(xt, &z)))
            .sum())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.y_mean + self.y_scale * self.predict_standardized(x)?)
    }

    pub fn predict_many(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        (0..x.n()).map(|i| self.predict(x.row(i))).collect()
    }
}

/// Training set with its Gram matrix, solvable for several ridge constants.
#[derive(Debug, Clone)]
pub struct KernelSystem {
    x_aug: Vec<f64>,
    d: usize,
    gram: Mat<f64>,
    y_std: Col<f64>,
    sigma: f64,
    features: Standardizer,
    y_mean: f64,
    y_scale: f64,
}

impl KernelSystem {
    /// `sigma = None` uses Silverman's rule on the standardized inputs.
    pub fn new(x: &FeatureMatrix, y: &[f64], sigma: Option<f64>) -> Result<KernelSystem> {
        let n = x.n();
        if n == 0 {
            return Err(Error::Domain("kernel regression needs at least one training sample".into()));
        }
        if y.len() != n {
            return Err(Error::Dimension(format!("{} targets for {n} training rows", y.len())));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite regression target".into()));
        }
        let features = Standardizer::fit(x);
        let d = x.d();
        let mut x_aug = Vec::with_capacity(n * (d + 1));
        for i in 0..n {
            features.augment(x.row(i), &mut x_aug);
        }
        let sigma = match sigma {
            Some(s) if s > 0.0 && s.is_finite() => s,
            Some(s) => return Err(Error::Domain(format!("kernel width must be positive, got {s}"))),
            None => default_sigma(&x_aug, n, d + 1),
        };
        let c = -0.5 / (sigma * sigma);
        let mut gram = Mat::zeros(n, n);
        for i in 0..n {
            gram[(i, i)] = 1.0;
            let xi = &x_aug[i * (d + 1)..(i + 1) * (d + 1)];
            for j in 0..i {
                let k = exp_neg(c * sq_dist(xi, &x_aug[j * (d + 1)..(j + 1) * (d + 1)]));
                gram[(i, j)] = k;
                gram[(j, i)] = k;
            }
        }
        let (y_mean, y_scale) = target_scale(y);
        let y_std = Col::from_fn(n, |i| (y[i] - y_mean) / y_scale);
        Ok(KernelSystem {
            x_aug,
            d,
            gram,
            y_std,
            sigma,
            features,
            y_mean,
            y_scale,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn weights(&self, mu: f64) -> Result<Vec<f64>> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("ridge constant must be non-negative, got {mu}")));
        }
        let mut a = self.gram.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += mu;
        }
        let chol = a.llt(Side::Lower).map_err(|_| {
            Error::Solver(format!(
                "kernel system is not positive definite at mu = {mu:e}; duplicate training rows need mu > 0"
            ))
        })?;
        let w = chol.solve(&self.y_std);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite dual weights at mu = {mu:e}; increase mu")));
        }
        Ok(w.iter().copied().collect())
    }

    pub fn solve(&self, mu: f64) -> Result<KernelModel> {
        Ok(KernelModel {
            x_train: self.x_aug.clone(),
            d: self.d,
            weights: self.weights(mu)?,
            sigma: self.sigma,
            mu,
            features: self.features.clone(),
            y_mean: self.y_mean,
            y_scale: self.y_scale,
        })
    }

    /// Predictions at the rows of `x` for every ridge constant in `mus`;
    /// the kernel between `x` and the training set is computed once.
    pub fn predict_path(&self, mus: &[f64], x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        if x.d() != self.d {
            return Err(Error::Domain(format!("model expects {} features, got {}", self.d, x.d())));
        }
        let n = self.y_std.nrows();
        let c = -0.5 / (self.sigma * self.sigma);
        let mut z = Vec::with_capacity(self.d + 1);
        let mut kx = Vec::with_capacity(x.n() * n);
        for i in 0..x.n() {
            z.clear();
            self.features.augment(x.row(i), &mut z);
            kx.extend(self.x_aug.chunks(self.d + 1).map(|xt| exp_neg(c * sq_dist(xt, &z))));
        }
        mus.iter()
            .map(|&mu| {
                let w = self.weights(mu)?;
                Ok(kx
                    .chunks(n.max(1))
                    .take(x.n())
                    .map(|row| self.y_mean + self.y_scale * row.iter().zip(&w).map(|(k, w)| k * w).sum::<f64>())
                    .collect())
            })
            .collect()
    }
}

fn default_sigma(x_aug: &[f64], n: usize, width: usize) -> f64 {
    // the appended constant carries no variance
    let d = width - 1;
    if n < 2 || d == 0 {
        return 1.0;
    }
    let var = (0..d)
        .map(|j| {
            let m = (0..n).map(|i| x_aug[i * width + j]).sum::<f64>() / n as f64;
            (0..n).map(|i| (x_aug[i * width + j] - m).powi(2)).sum::<f64>() / n as f64
        })
        .sum::<f64>()
        / d as f64;
    if var > 0.0 {
        silverman_rule(var.sqrt(), n, d)
    } else {
        1.0
    }
}

/// Fit a model with ridge constant `mu` and kernel width `sigma`.
pub fn fit(x: &FeatureMatrix, y: &[f64], mu: f64, sigma: f64) -> Result<KernelModel> {
    KernelSystem::new(x, y, Some(sigma))?.solve(mu)
}

/// Fit with the kernel width from Silverman's rule.
pub fn fit_auto(x: &FeatureMatrix, y: &[f64], mu: f64) -> Result<KernelModel> {
    KernelSystem::new(x, y, None)?.solve(mu)
}

pub fn predict(model: &KernelModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}
