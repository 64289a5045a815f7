//! Regularized Cauchy–Schwarz clustering with soft memberships.
//!
//! Memberships are parameterized as `m_ik = v_ik²` with `‖v_i‖ = 1`, so the
//! simplex constraint becomes a unit-norm constraint handled by a Lagrange
//! multiplier. The kernel width is annealed linearly from Silverman's value
//! down to a quarter of it, and each iteration updates a random subsample of
//! the rows.

mod kernel;
mod optimize;

pub use kernel::{gaussian_kernel, silverman_rule, silverman_sigma, FeatureMatrix};
pub(crate) use kernel::exp_neg;
pub use optimize::{cluster, cluster_many, cluster_observed, ClusterParams};

use crate::error::{Error, Result};

/// Floor applied inside `log m` for zero memberships.
pub const LOG_FLOOR: f64 = 1e-12;

/// `n × K` soft memberships stored through their square roots.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    n: usize,
    k: usize,
    v: Vec<f64>,
}

impl MembershipMatrix {
    /// From unit-norm rows `v_i` (row-major).
    pub fn from_v(n: usize, k: usize, v: Vec<f64>) -> Result<Self> {
        if k == 0 || v.len() != n * k {
            return Err(Error::Dimension(format!("{} entries for {n} rows of {k} clusters", v.len())));
        }
        for row in v.chunks(k) {
            let norm2: f64 = row.iter().map(|x| x * x).sum();
            if !((norm2 - 1.0).abs() < 1e-9) {
                return Err(Error::Domain(format!("membership row has squared norm {norm2}")));
            }
        }
        Ok(MembershipMatrix { n, k, v })
    }

    /// From memberships on the simplex (row-major).
    pub fn from_memberships(n: usize, k: usize, m: &[f64]) -> Result<Self> {
        if m.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Domain("memberships must be non-negative".into()));
        }
        MembershipMatrix::from_v(n, k, m.iter().map(|x| x.sqrt()).collect())
    }

    /// One-hot memberships from labels.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        let mut m = vec![0.0; labels.len() * k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::Domain(format!("label {l} out of range for {k} clusters")));
            }
            m[i * k + l] = 1.0;
        }
        MembershipMatrix::from_memberships(labels.len(), k, &m)
    }

    pub fn uniform(n: usize, k: usize) -> Self {
        MembershipMatrix {
            n,
            k,
            v: vec![(1.0 / k as f64).sqrt(); n * k],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn m(&self, i: usize, k: usize) -> f64 {
        let x = self.v[i * self.k + k];
        x * x
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.v[i * self.k..(i + 1) * self.k].iter().map(|x| x * x).collect()
    }

    /// All memberships, row-major.
    pub fn memberships(&self) -> Vec<f64> {
        self.v.iter().map(|x| x * x).collect()
    }

    /// Hard labels by maximum membership; ties go to the lowest index.
    pub fn labels(&self) -> Vec<usize> {
        (0..self.n).map(|i| argmax(&self.row(i))).collect()
    }

    /// Reorder clusters: new cluster `c` is old cluster `perm[c]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.k];
        if perm.len() != self.k || perm.iter().any(|&p| p >= self.k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Domain("not a permutation of the cluster indices".into()));
        }
        let v = (0..self.n)
            .flat_map(|i| perm.iter().map(move |&p| (i, p)))
            .map(|(i, p)| self.v[i * self.k + p])
            .collect();
        Ok(MembershipMatrix { n: self.n, k: self.k, v })
    }

    /// Largest deviation of a row sum from one.
    pub fn simplex_error(&self) -> f64 {
        self.v
            .chunks(self.k)
            .map(|r| (r.iter().map(|x| x * x).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn check_gram(m: &MembershipMatrix, gram: &[f64]) -> Result<()> {
    if gram.len() != m.n * m.n {
        return Err(Error::Dimension(format!(
            "Gram matrix has {} entries, expected {}",
            gram.len(),
            m.n * m.n
        )));
    }
    Ok(())
}

/// `U`, `(v_k)` and `(GM)` for a full Gram matrix.
fn cs_terms(m: &MembershipMatrix, gram: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let (n, k) = (m.n, m.k);
    let mm = m.memberships();
    let mut gm = vec![0.0; n * k];
    let mut u = 0.0;
    let mut vk = vec![0.0; k];
    for i in 0..n {
        let row = &gram[i * n..(i + 1) * n];
        let mut s = 0.0;
        for (j, &g) in row.iter().enumerate() {
            s += g;
            for c in 0..k {
                gm[i * k + c] += g * mm[j * k + c];
            }
        }
        let mut within = 0.0;
        for c in 0..k {
            within += mm[i * k + c] * gm[i * k + c];
            vk[c] += mm[i * k + c] * gm[i * k + c];
        }
        u += 0.5 * (s - within);
    }
    (u, vk, gm)
}

fn sqrt_product(vk: &[f64]) -> Result<f64> {
    if vk.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateCluster("a cluster has zero kernel mass".into()));
    }
    Ok((0.5 * vk.iter().map(|v| v.ln()).sum::<f64>()).exp())
}

fn entropy_term(m: &[f64]) -> f64 {
    m.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum()
}

/// Regularized Cauchy–Schwarz objective `U/V − ψ Σ m log m`.
pub fn jcs_estimate(m: &MembershipMatrix, gram: &[f64], psi: f64) -> Result<f64> {
    check_gram(m, gram)?;
    let (u, vk, _) = cs_terms(m, gram);
    let v = sqrt_product(&vk)?;
    Ok(u / v - psi * entropy_term(&m.memberships()))
}

/// Gradient of [`jcs_estimate`] with respect to every `m_ik` (row-major).
pub fn jcs_gradient(m: &MembershipMatrix, gram: &[f64], psi: f64) -> Result<Vec<f64>> {
    check_gram(m, gram)?;
    let (u, vk, gm) = cs_terms(m, gram);
    let v = sqrt_product(&vk)?;
    let j = u / v;
    let k = m.k;
    let mm = m.memberships();
    Ok(gm
        .iter()
        .zip(&mm)
        .enumerate()
        .map(|(idx, (&g, &x))| -g * (1.0 / v + j / vk[idx % k]) - psi * (1.0 + x.max(LOG_FLOOR).ln()))
        .collect())
}

/// Chain rule from `∂J/∂m_i` to `∂J/∂v_i` with `Γ = diag(2√(m_ik + α))`.
pub fn gradient_wrt_v(m_row: &[f64], grad_m: &[f64], alpha: f64) -> Vec<f64> {
    m_row
        .iter()
        .zip(grad_m)
        .map(|(&m, &g)| 2.0 * (m + alpha).sqrt() * g)
        .collect()
}

/// Lagrangian step `v⁺ = −∂J/∂v / (2λ)` with `λ = ½‖∂J/∂v‖`.
///
/// Returns the new row and whether the gradient vanished (the row is then
/// kept as is).
pub fn update_membership_row(v: &[f64], grad_v: &[f64]) -> (Vec<f64>, bool) {
    let lambda = 0.5 * grad_v.iter().map(|g| g * g).sum::<f64>().sqrt();
    if !(lambda > 0.0) || !lambda.is_finite() {
        return (v.to_vec(), true);
    }
    (grad_v.iter().map(|g| -g / (2.0 * lambda)).collect(), false)
}

/// Linear kernel-width schedule from `σ_SIL` to `σ_SIL / 4` over `n_iters`
/// iterations.
pub fn anneal_schedule(sigma_sil: f64, n_iters: usize) -> Vec<f64> {
    if n_iters <= 1 {
        return vec![sigma_sil; n_iters];
    }
    let rate = 3.0 * sigma_sil / (4.0 * (n_iters - 1) as f64);
    let mut s: Vec<f64> = (0..n_iters).map(|t| sigma_sil - rate * t as f64).collect();
    s[n_iters - 1] = sigma_sil / 4.0;
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_row_worked_example() {
        let (v, done) = update_membership_row(&[0.5, 0.5], &[0.3, 0.4]);
        assert!(!done);
        assert!((v[0] + 0.6).abs() < 1e-15 && (v[1] + 0.8).abs() < 1e-15);
        let m: Vec<f64> = v.iter().map(|x| x * x).collect();
        assert!((m[0] - 0.36).abs() < 1e-15 && (m[1] - 0.64).abs() < 1e-15);
        let (w, _) = update_membership_row(&[0.5, 0.5], &[3.0, 4.0]);
        assert_eq!(v, w);
    }

    #[test]
    fn update_row_zero_gradient_keeps_row() {
        let v = [0.6, 0.8];
        let (w, done) = update_membership_row(&v, &[0.0, 0.0]);
        assert!(done);
        assert_eq!(w, v);
    }

    #[test]
    fn anneal_endpoints() {
        let s = anneal_schedule(2.0, 30);
        assert_eq!(s.len(), 30);
        assert_eq!(s[0], 2.0);
        assert!((s[29] - 0.5).abs() < 1e-12);
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(anneal_schedule(2.0, 1), vec![2.0]);
    }

    #[test]
    fn k1_objective_is_zero() {
        let m = MembershipMatrix::uniform(3, 1);
        let g = vec![1.0, 0.5, 0.2, 0.5, 1.0, 0.3, 0.2, 0.3, 1.0];
        assert_eq!(jcs_estimate(&m, &g, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn separated_hard_clusters_have_zero_objective() {
        // pairs {0,1} and {2,3}; no cross-pair kernel mass
        let g = vec![
            1.0, 0.4, 0.0, 0.0, //
            0.4, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.6, //
            0.0, 0.0, 0.6, 1.0,
        ];
        let m = MembershipMatrix::from_labels(&[0, 0, 1, 1], 2).unwrap();
        assert_eq!(jcs_estimate(&m, &g, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn empty_cluster_is_degenerate() {
        let m = MembershipMatrix::from_labels(&[0, 0], 2).unwrap();
        let g = vec![1.0, 0.5, 0.5, 1.0];
        assert!(matches!(jcs_estimate(&m, &g, 0.0), Err(Error::DegenerateCluster(_))));
    }

    #[test]
    fn entropy_gradient_at_one_is_minus_psi() {
        // K = 1 keeps the data term at zero only through U; check the entropy part alone
        let m = MembershipMatrix::from_labels(&[0, 1], 2).unwrap();
        let g = vec![1.0, 0.0, 0.0, 1.0];
        let grad = jcs_gradient(&m, &g, 0.25).unwrap();
        let without = jcs_gradient(&m, &g, 0.0).unwrap();
        assert!((grad[0] - without[0] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn symmetric_points_get_equal_gradients() {
        // points 0 and 1 are interchangeable
        let g = vec![
            1.0, 0.3, 0.5, //
            0.3, 1.0, 0.5, //
            0.5, 0.5, 1.0,
        ];
        let m = MembershipMatrix::uniform(3, 2);
        let grad = jcs_gradient(&m, &g, 0.0).unwrap();
        assert_eq!(&grad[0..2], &grad[2..4]);
    }

    #[test]
    fn permutation_and_labels() {
        let m = MembershipMatrix::from_memberships(2, 3, &[0.2, 0.5, 0.3, 0.4, 0.4, 0.2]).unwrap();
        assert_eq!(m.labels(), vec![1, 0]);
        let p = m.permuted(&[2, 0, 1]).unwrap();
        assert!((p.m(0, 0) - 0.3).abs() < 1e-15);
        assert!(m.permuted(&[0, 0, 1]).is_err());
        assert!(MembershipMatrix::from_memberships(1, 2, &[0.5, 0.6]).is_err());
    }
}
