//! Annealed, subsampled fixed-point optimization of the clustering objective.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::kernel::{silverman_sigma, Columns, FeatureMatrix};
use super::{anneal_schedule, update_membership_row, MembershipMatrix, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::par;
use crate::seed::{self, stream};

/// Tunables of one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    pub k: usize,
    /// Entropy weight, relative to the typical magnitude of the data
    /// gradient of the current iteration.
    pub psi: f64,
    pub iterations: usize,
    pub sample_fraction: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
    /// Fixed kernel width; annealed from Silverman's rule when unset.
    pub sigma: Option<f64>,
    pub max_restarts: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            k: 2,
            psi: 0.01,
            iterations: 30,
            sample_fraction: 0.33,
            alpha: 0.05,
            gamma: 1e-3,
            seed: 0,
            sigma: None,
            max_restarts: 3,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        if self.k == 0 || self.k > n {
            return bad(format!("cluster count {} must lie in 1..={n}", self.k));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return bad(format!("sample fraction {} outside (0, 1]", self.sample_fraction));
        }
        if self.iterations == 0 {
            return bad("at least one iteration is required".into());
        }
        if !(self.psi >= 0.0 && self.psi.is_finite()) || !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("psi and alpha must be finite and non-negative".into());
        }
        if !(self.gamma > 0.0) {
            return bad("gamma must be positive".into());
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("kernel width {s} must be positive"));
            }
        }
        Ok(())
    }

    fn sample_size(&self, n: usize) -> usize {
        ((self.sample_fraction * n as f64).ceil() as usize).clamp(1, n)
    }

    fn lockstep_key(&self) -> LockstepKey {
        (self.seed, self.iterations, self.sample_fraction.to_bits(), self.sigma.map(f64::to_bits))
    }
}

type LockstepKey = (u64, usize, u64, Option<u64>);

fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    if attempt == 0 {
        seed
    } else {
        seed::derive(seed, &[attempt as u64])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    const L: usize = 16;
    let mut acc = [0.0; L];
    let (ca, cb) = (a.chunks_exact(L), b.chunks_exact(L));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..L {
            acc[l] += x[l] * y[l];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Gram rows are produced in blocks of this many rows, small enough to stay
/// in cache while every run consumes them.
const BLOCK: usize = 32;

/// Membership roots below this are flushed to zero.
const TINY: f64 = 1e-100;

/// State of one optimization run.
struct Run {
    k: usize,
    psi: f64,
    alpha: f64,
    v: Vec<f64>,
    /// Memberships, cluster-major.
    mcol: Vec<f64>,
    /// Subsampled `(GM)`, cluster-major.
    gm: Vec<f64>,
    failed: Option<Error>,
}

impl Run {
    fn new(n: usize, p: &ClusterParams, seed: u64) -> Run {
        let k = p.k;
        let mut rng = seed::rng(seed, &[stream::CLUSTER_INIT]);
        let mut v = vec![0.0; n * k];
        for row in v.chunks_mut(k) {
            for x in row.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *x = (p.gamma * z).abs();
            }
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            } else {
                row.fill((1.0 / k as f64).sqrt());
            }
        }
        let mut run = Run {
            k,
            psi: p.psi,
            alpha: p.alpha,
            v,
            mcol: vec![0.0; n * k],
            gm: Vec::new(),
            failed: None,
        };
        run.sync_columns(n);
        run
    }

    fn sync_columns(&mut self, n: usize) {
        for i in 0..n {
            for c in 0..self.k {
                let x = self.v[i * self.k + c];
                self.mcol[c * n + i] = x * x;
            }
        }
    }

    fn begin(&mut self, n: usize) {
        self.gm.clear();
        self.gm.resize(n * self.k, 0.0);
    }

    /// Adds the contribution of sampled points `sample[first..]` (one Gram
    /// row each in `block`) to the cluster-major `(GM)` of every point.
    fn accumulate(&mut self, n: usize, first: usize, sample: &[usize], block: &[f64]) {
        if self.failed.is_some() {
            return;
        }
        for (b, row) in block.chunks_exact(n).enumerate() {
            let j = sample[first + b];
            for c in 0..self.k {
                let w = self.mcol[c * n + j];
                if w == 0.0 {
                    continue;
                }
                let out = &mut self.gm[c * n..(c + 1) * n];
                for (o, g) in out.iter_mut().zip(row) {
                    *o += w * g;
                }
            }
        }
    }

    fn finish(&mut self, n: usize, ms: usize, mass: f64) {
        if self.failed.is_none() {
            if let Err(e) = self.try_finish(n, ms, mass) {
                self.failed = Some(e);
            }
        }
    }

    fn try_finish(&mut self, n: usize, ms: usize, mass: f64) -> Result<()> {
        let k = self.k;
        let scale = n as f64 / ms as f64;
        self.gm.iter_mut().for_each(|g| *g *= scale);
        let vk: Vec<f64> = (0..k)
            .map(|c| dot(&self.mcol[c * n..(c + 1) * n], &self.gm[c * n..(c + 1) * n]))
            .collect();
        let u = 0.5 * (scale * mass - vk.iter().sum::<f64>());
        let (lo, hi) = vk.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if !hi.is_finite() || !(lo > 0.0) || lo / hi < 1e-12 {
            return Err(Error::DegenerateCluster(format!("cluster mass ratio {:e}", lo / hi)));
        }
        let v_big = (0.5 * vk.iter().map(|x| x.ln()).sum::<f64>()).exp();
        let j = u / v_big;
        if !j.is_finite() || !v_big.is_finite() {
            return Err(Error::Numeric("non-finite clustering objective".into()));
        }
        let coef: Vec<f64> = vk.iter().map(|&x| 1.0 / v_big + j / x).collect();

        // data gradient in place of gm
        for c in 0..k {
            self.gm[c * n..(c + 1) * n].iter_mut().for_each(|g| *g *= -coef[c]);
        }
        let ent_scale: f64 = (0..n)
            .map(|i| (0..k).map(|c| self.gm[c * n + i].abs()).fold(0.0, f64::max))
            .sum();
        let psi = self.psi * ent_scale / n as f64;

        let mut grad_v = vec![0.0; k];
        for i in 0..n {
            for c in 0..k {
                let m = self.mcol[c * n + i];
                let g = self.gm[c * n + i] - psi * (1.0 + m.max(LOG_FLOOR).ln());
                grad_v[c] = 2.0 * (m + self.alpha).sqrt() * g;
            }
            let (new_v, _) = update_membership_row(&self.v[i * k..(i + 1) * k], &grad_v);
            for c in 0..k {
                if !new_v[c].is_finite() {
                    return Err(Error::Numeric("non-finite membership update".into()));
                }
                let x = if new_v[c].abs() < TINY { 0.0 } else { new_v[c] };
                self.v[i * k + c] = x;
                self.mcol[c * n + i] = x * x;
            }
        }
        Ok(())
    }

    fn memberships(&self, n: usize) -> MembershipMatrix {
        MembershipMatrix {
            n,
            k: self.k,
            v: self.v.clone(),
        }
    }
}

/// Point sample of iteration `t`; depends only on the seed and `t`.
fn sample_rows(seed: u64, t: usize, n: usize, size: usize) -> Vec<usize> {
    if size == n {
        return (0..n).collect();
    }
    let mut rng = seed::rng(seed, &[stream::CLUSTER_SAMPLE, t as u64]);
    let mut idx = rand::seq::index::sample(&mut rng, n, size).into_vec();
    idx.sort_unstable();
    idx
}

fn schedule(x: &FeatureMatrix, p: &ClusterParams) -> Result<Vec<f64>> {
    Ok(match p.sigma {
        Some(s) => vec![s; p.iterations],
        None => anneal_schedule(silverman_sigma(x)?, p.iterations),
    })
}

type Observer<'a> = &'a mut dyn FnMut(usize, usize, &MembershipMatrix);

/// Runs sharing seed, iteration count, sample fraction and kernel width
/// advanced together so that each iteration's Gram rows are computed once.
fn lockstep(
    x: &FeatureMatrix,
    cols: &Columns,
    base: &ClusterParams,
    seed: u64,
    runs: &mut [Run],
    total_iters: usize,
    mut observer: Option<(usize, Observer)>,
) -> Result<()> {
    let n = x.n();
    let sigmas = schedule(x, base)?;
    let size = base.sample_size(n);
    let mut block = vec![0.0; BLOCK * n];
    for t in 0..total_iters {
        let sigma = sigmas[t.min(sigmas.len() - 1)];
        let sample = sample_rows(seed, t, n, size);
        runs.iter_mut().for_each(|r| r.begin(n));
        let mut mass = 0.0;
        for first in (0..size).step_by(BLOCK) {
            let rows = &sample[first..(first + BLOCK).min(size)];
            let block = &mut block[..rows.len() * n];
            par::chunks_mut(block, n, |b, out| {
                cols.gram_row(rows[b], sigma, out);
            });
            mass += block.iter().sum::<f64>();
            let block = &*block;
            par::for_each_mut(runs, |r| r.accumulate(n, first, &sample, block));
        }
        par::for_each_mut(runs, |r| r.finish(n, size, mass));
        if runs.iter().all(|r| r.failed.is_some()) {
            break;
        }
        if let Some((attempt, obs)) = observer.as_mut() {
            if runs[0].failed.is_none() {
                obs(*attempt, t, &runs[0].memberships(n));
            }
        }
    }
    Ok(())
}

fn solo(x: &FeatureMatrix, cols: &Columns, p: &ClusterParams, first_attempt: usize, total_iters: usize, mut observer: Option<Observer>) -> Result<MembershipMatrix> {
    let n = x.n();
    let mut last = None;
    for attempt in first_attempt..=p.max_restarts {
        let seed = attempt_seed(p.seed, attempt);
        let mut runs = [Run::new(n, p, seed)];
        let obs = observer.as_mut().map(|o| (attempt, &mut **o as Observer));
        lockstep(x, cols, p, seed, &mut runs, total_iters, obs)?;
        let [run] = runs;
        match run.failed {
            None => return Ok(run.memberships(n)),
            Some(e) => {
                log::debug!("clustering attempt {attempt} (K = {}) failed: {e}", p.k);
                last = Some(e);
            }
        }
    }
    let reason = last.map_or_else(String::new, |e| e.to_string());
    Err(Error::DegenerateCluster(format!(
        "K = {} collapsed after {} restarts: {reason}",
        p.k, p.max_restarts
    )))
}

/// Cluster the rows of `x` into `params.k` soft clusters.
pub fn cluster(x: &FeatureMatrix, params: &ClusterParams) -> Result<MembershipMatrix> {
    params.validate(x.n())?;
    solo(x, &Columns::new(x), params, 0, params.iterations, None)
}

/// As [`cluster`], running `total_iters ≥ params.iterations` iterations
/// (the kernel width stays at its final value past the schedule) and calling
/// `observer(attempt, iteration, memberships)` after every iteration.
/// A collapsed attempt is restarted, and its iterations are reported again
/// under the next attempt number.
pub fn cluster_observed(
    x: &FeatureMatrix,
    params: &ClusterParams,
    total_iters: usize,
    observer: &mut dyn FnMut(usize, usize, &MembershipMatrix),
) -> Result<MembershipMatrix> {
    params.validate(x.n())?;
    solo(x, &Columns::new(x), params, 0, total_iters.max(params.iterations), Some(observer))
}

/// Cluster the same data under several parameter sets. Results equal those
/// of [`cluster`] called on each set in turn.
pub fn cluster_many(x: &FeatureMatrix, params: &[ClusterParams]) -> Vec<Result<MembershipMatrix>> {
    let n = x.n();
    let cols = Columns::new(x);
    let mut out: Vec<Option<Result<MembershipMatrix>>> = params.iter().map(|_| None).collect();
    let mut groups: Vec<(LockstepKey, Vec<usize>)> = Vec::new();
    for (idx, p) in params.iter().enumerate() {
        if let Err(e) = p.validate(n) {
            out[idx] = Some(Err(e));
            continue;
        }
        match groups.iter_mut().find(|(key, _)| *key == p.lockstep_key()) {
            Some((_, members)) => members.push(idx),
            None => groups.push((p.lockstep_key(), vec![idx])),
        }
    }
    for (_, members) in groups {
        let base = &params[members[0]];
        let mut runs: Vec<Run> = members.iter().map(|&i| Run::new(n, &params[i], base.seed)).collect();
        if let Err(e) = lockstep(x, &cols, base, base.seed, &mut runs, base.iterations, None) {
            for &i in &members {
                out[i] = Some(Err(clone_error(&e)));
            }
            continue;
        }
        for (run, &i) in runs.into_iter().zip(&members) {
            out[i] = Some(match run.failed {
                None => Ok(run.memberships(n)),
                Some(_) => solo(x, &cols, &params[i], 1, params[i].iterations, None),
            });
        }
    }
    out.into_iter().map(|r| r.expect("every parameter set handled")).collect()
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::DegenerateData(m) => Error::DegenerateData(m.clone()),
        other => Error::Domain(other.to_string()),
    }
}
