//! Independent reference implementations shared by the integration tests
//! and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soilscale::itclust::FeatureMatrix;

pub struct Instance {
    pub n: usize,
    pub k: usize,
    pub x: Vec<Vec<f64>>,
    pub m: Vec<f64>,
    pub sigma: f64,
    pub psi: f64,
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=8);
    let k = rng.random_range(1..=3);
    let d = rng.random_range(1..=3);
    let x = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut m = Vec::new();
    for _ in 0..n {
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        m.extend(raw.iter().map(|r| r / s));
    }
    Instance {
        n,
        k,
        x,
        m,
        sigma: rng.random_range(0.3..1.5),
        psi: rng.random_range(0.0..0.5),
    }
}

pub fn gram(x: &[Vec<f64>], sigma: f64) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d2: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b).powi(2)).sum();
            g[i * n + j] = (-d2 / (2.0 * sigma * sigma)).exp();
        }
    }
    g
}

/// Direct evaluation of the regularized objective with explicit loops.
pub fn objective(n: usize, k: usize, m: &[f64], g: &[f64], psi: f64) -> f64 {
    let mut u = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut dot = 0.0;
            for c in 0..k {
                dot += m[i * k + c] * m[j * k + c];
            }
            u += 0.5 * (1.0 - dot) * g[i * n + j];
        }
    }
    let mut prod = 1.0;
    for c in 0..k {
        let mut vk = 0.0;
        for i in 0..n {
            for j in 0..n {
                vk += m[i * k + c] * m[j * k + c] * g[i * n + j];
            }
        }
        prod *= vk;
    }
    let mut ent = 0.0;
    for x in m {
        if *x > 0.0 {
            ent += x * x.ln();
        }
    }
    u / prod.sqrt() - psi * ent
}

/// Two 100-point unit Gaussian blobs, 10σ apart.
pub fn blobs(seed: u64) -> (FeatureMatrix, Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..2 {
        for _ in 0..100 {
            let a: f64 = rng.sample(normal);
            let b: f64 = rng.sample(normal);
            rows.push(vec![a + 10.0 * c as f64, b]);
            labels.push(c);
        }
    }
    (FeatureMatrix::from_rows(&rows).unwrap(), rows, labels)
}

