use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soilscale::grid::{self, Grid, VariableTag};
use soilscale::itclust::FeatureMatrix;
use soilscale::pri::{self, FeatureKind, PriConfig};

fn bin(v: f64, lo: f64, hi: f64, k: usize) -> usize {
    if hi == lo {
        return 0;
    }
    (((v - lo) / ((hi - lo) / k as f64)).floor().max(0.0) as usize).min(k - 1)
}

/// Exhaustive argmax over classes with tables counted from scratch.
fn brute_force(rows: &[Vec<f64>], y: &[f64], k: usize, kj: usize, q: &[f64]) -> f64 {
    let range = |v: &mut dyn Iterator<Item = f64>| v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (ylo, yhi) = range(&mut y.iter().copied());
    let d = q.len();
    let xr: Vec<(f64, f64)> = (0..d).map(|j| range(&mut rows.iter().map(|r| r[j]))).collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for c in 0..k {
        let members: Vec<usize> = (0..y.len()).filter(|&i| bin(y[i], ylo, yhi, k) == c).collect();
        if members.is_empty() {
            continue;
        }
        let mut p = members.len() as f64 / y.len() as f64;
        for j in 0..d {
            let b = bin(q[j], xr[j].0, xr[j].1, kj);
            let hits = members.iter().filter(|&&i| bin(rows[i][j], xr[j].0, xr[j].1, kj) == b).count();
            p *= (hits as f64 + 1.0) / (members.len() as f64 + kj as f64);
        }
        if p > best.0 {
            best = (p, c);
        }
    }
    ylo + (best.1 as f64 + 0.5) * (yhi - ylo) / k as f64
}

#[test]
fn argmax_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows: Vec<Vec<f64>> = (0..400).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<f64> = rows.iter().map(|r| 0.1 + 0.2 * r[0] * r[1] + 0.05 * rng.random::<f64>()).collect();
    let kinds = [FeatureKind::Continuous { bins: 6 }; 3];
    let model = pri::fit_bayes(&FeatureMatrix::from_rows(&rows).unwrap(), &y, 8, &kinds).unwrap();
    for _ in 0..300 {
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(-0.1..1.1)).collect();
        let a = model.predict(&q);
        let b = brute_force(&rows, &y, 8, 6, &q);
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn independent_target_keeps_the_prior() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows: Vec<Vec<f64>> = (0..10_000).map(|_| vec![rng.random::<f64>()]).collect();
    let y: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    let model = pri::fit_bayes(&FeatureMatrix::from_rows(&rows).unwrap(), &y, 5, &[FeatureKind::Continuous { bins: 5 }]).unwrap();
    for b in 0..5 {
        let post = model.posterior(&[0.1 + 0.2 * b as f64]);
        for (p, q) in post.iter().zip(&model.prior) {
            assert!((p - q).abs() < 0.05);
        }
    }
}

#[test]
fn initial_estimate_uses_bin_centers() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..100).map(|_| vec![rng.random::<f64>(), rng.random_range(0..3) as f64]).collect();
    let y: Vec<f64> = rows.iter().map(|r| 0.1 + 0.3 * r[0]).collect();
    let x = FeatureMatrix::from_rows(&rows).unwrap();
    let kinds = [FeatureKind::Continuous { bins: 20 }, FeatureKind::Categorical { classes: 3 }];
    let model = pri::fit_bayes(&x, &y, 20, &kinds).unwrap();
    let like = Grid::filled(10, 10, 1000.0, VariableTag::Sm, 0.0).unwrap();
    let init = pri::bayes_initial(&model, &x, &like).unwrap();
    let centers: Vec<f64> = (0..20).map(|b| model.target.center(b)).collect();
    assert!(init.values().iter().all(|v| centers.iter().any(|c| (c - v).abs() < 1e-15)));
}

fn kl_direct(m: &[f64], init: &[f64], sigma: f64) -> f64 {
    let dens = |s: &[f64], x: f64| s.iter().map(|&y| (-(x - y).powi(2) / (2.0 * sigma * sigma)).exp()).sum::<f64>() / s.len() as f64;
    m.iter().map(|&x| (dens(m, x) / dens(init, x)).ln()).sum::<f64>() / m.len() as f64
}

fn test_grids() -> (Grid, Grid) {
    let init: Vec<f64> = (0..400).map(|i| [0.1, 0.15, 0.3][(i * 7 + i / 20) % 3]).collect();
    let coarse = vec![0.18, 0.22, 0.2, 0.16];
    (
        Grid::new(20, 20, 1000.0, VariableTag::Sm, init).unwrap(),
        Grid::new(2, 2, 10_000.0, VariableTag::Sm, coarse).unwrap(),
    )
}

#[test]
fn heavy_anchor_weight_moves_towards_the_initial_density() {
    let (init, coarse) = test_grids();
    let cfg = PriConfig {
        beta: 1e3,
        ..PriConfig::default()
    };
    let out = pri::pri_optimize(&init, &coarse, &cfg).unwrap();
    let start = grid::replicate(&coarse, 10).unwrap();
    let before = kl_direct(start.values(), init.values(), out.sigma);
    let after = kl_direct(out.sm.values(), init.values(), out.sigma);
    assert!(after < before, "{after} vs {before}");
}

#[test]
fn optimization_is_deterministic_and_monotone() {
    let (init, coarse) = test_grids();
    let a = pri::pri_optimize(&init, &coarse, &PriConfig::default()).unwrap();
    let b = pri::pri_optimize(&init, &coarse, &PriConfig::default()).unwrap();
    assert_eq!(a, b);
    assert!(a.objective.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    let direct_start = pri::pri_objective(grid::replicate(&coarse, 10).unwrap().values(), init.values(), 2.0, a.sigma);
    let direct_end = pri::pri_objective(a.sm.values(), init.values(), 2.0, a.sigma);
    assert!(direct_end < direct_start);
}
