//! Gaussian kernel primitives, feature storage and bandwidth rules.

use crate::error::{Error, Result};

/// `exp(-‖x−y‖² / (2σ²))`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("kernel width must be positive, got {sigma}")));
    }
    if x.len() != y.len() {
        return Err(Error::Domain(format!("kernel arguments of length {} and {}", x.len(), y.len())));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-d2 / (2.0 * sigma * sigma)).exp())
}

/// Branch-free `exp` for arguments in `(-inf, 0]`; relative error below 1e-13,
/// and exactly zero below `EXP_CUTOFF` so that products never go subnormal.
pub(crate) const EXP_CUTOFF: f64 = -40.0;

#[inline(always)]
pub(crate) fn exp_neg(x: f64) -> f64 {
    const SHIFT: f64 = 6_755_399_441_055_744.0;
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    let x = x.clamp(-708.0, 0.0);
    let shifted = x * std::f64::consts::LOG2_E + SHIFT;
    let n = shifted - SHIFT;
    let r = (x - n * LN2_HI) - n * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    for c in [
        1.0 / 39_916_800.0,
        1.0 / 3_628_800.0,
        1.0 / 362_880.0,
        1.0 / 40_320.0,
        1.0 / 5_040.0,
        1.0 / 720.0,
        1.0 / 120.0,
        1.0 / 24.0,
        1.0 / 6.0,
        0.5,
        1.0,
        1.0,
    ] {
        p = p * r + c;
    }
    let scale = f64::from_bits(shifted.to_bits().wrapping_add(1023) << 52);
    if x < EXP_CUTOFF {
        0.0
    } else {
        p * scale
    }
}

/// Row-major `n × d` feature matrix without missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * d {
            return Err(Error::Dimension(format!("{} values for a {n}x{d} feature matrix", values.len())));
        }
        if d == 0 {
            return Err(Error::Dimension("feature matrix needs at least one column".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("feature matrix contains non-finite values".into()));
        }
        Ok(FeatureMatrix { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("ragged feature rows".into()));
        }
        FeatureMatrix::new(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.values[i * self.d + j]).collect()
    }

    /// Rows selected by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> FeatureMatrix {
        let values = idx.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        FeatureMatrix {
            n: idx.len(),
            d: self.d,
            values,
        }
    }

    /// Mean of the per-column (population) variances.
    pub fn mean_variance(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        (0..self.d)
            .map(|j| {
                let col = self.column(j);
                let mean = col.iter().sum::<f64>() / n;
                col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
            })
            .sum::<f64>()
            / self.d as f64
    }
}

/// Silverman's rule for a `d`-dimensional sample of size `n` with average
/// per-dimension standard deviation `sd`.
pub fn silverman_rule(sd: f64, n: usize, d: usize) -> f64 {
    let (n, d) = (n as f64, d as f64);
    sd * (4.0 / (n * (2.0 * d + 1.0))).powf(1.0 / (d + 4.0))
}

/// Silverman bandwidth of a feature matrix.
pub fn silverman_sigma(x: &FeatureMatrix) -> Result<f64> {
    if x.n() < 2 {
        return Err(Error::Domain(format!("bandwidth needs at least 2 samples, got {}", x.n())));
    }
    let var = x.mean_variance();
    if !(var > 0.0) {
        return Err(Error::DegenerateData("all features are constant".into()));
    }
    Ok(silverman_rule(var.sqrt(), x.n(), x.d()))
}

/// Column-major copy of a feature matrix for vectorized distance rows.
pub(crate) struct Columns {
    cols: Vec<Vec<f64>>,
}

impl Columns {
    pub fn new(x: &FeatureMatrix) -> Self {
        Columns {
            cols: (0..x.d()).map(|j| x.column(j)).collect(),
        }
    }

    /// Kernel values between point `i` and every point, written to `out`;
    /// returns their sum.
    pub fn gram_row(&self, i: usize, sigma: f64, out: &mut [f64]) -> f64 {
        out.fill(0.0);
        for col in &self.cols {
            let xi = col[i];
            for (o, &xj) in out.iter_mut().zip(col) {
                let t = xj - xi;
                *o += t * t;
            }
        }
        let c = -0.5 / (sigma * sigma);
        let mut sum = 0.0;
        for o in out.iter_mut() {
            *o = exp_neg(*o * c);
            sum += *o;
        }
        sum
    }
}
