//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Criteria 7–10 process the full default synthetic season twice.

mod common;

use std::time::{Duration, Instant};

use common::oracles::{blobs, gram, instance, objective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soilscale::config::RunConfig;
use soilscale::dataset::{self, Dataset};
use soilscale::grid::{self, Grid, VariableTag};
use soilscale::itclust::{
    anneal_schedule, cluster, cluster_observed, jcs_estimate, jcs_gradient, silverman_rule, silverman_sigma,
    ClusterParams, FeatureMatrix, MembershipMatrix,
};
use soilscale::kridge;
use soilscale::metrics::DayEval;
use soilscale::season::{self, Method, SeasonRun};
use soilscale::srrm;
use soilscale::synth::{CropCalendar, LandCover, SceneGenerator, SceneSpec};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn check(results: &mut Vec<bool>, id: usize, name: &str, f: impl FnOnce() -> Verdict) {
    let t = Instant::now();
    let v = f();
    println!(
        "[{}] {id:>2}. {name}: {} ({:.1} s)",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail,
        t.elapsed().as_secs_f64()
    );
    results.push(v.pass);
}

fn oracle_equivalence() -> Verdict {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let c = instance(seed);
        let g = gram(&c.x, c.sigma);
        let m = MembershipMatrix::from_memberships(c.n, c.k, &c.m).unwrap();
        let got = jcs_estimate(&m, &g, c.psi).unwrap();
        let want = objective(c.n, c.k, &c.m, &g, c.psi);
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
    }
    let el = t.elapsed();
    verdict(worst <= 1e-10 && el < Duration::from_secs(5), format!("100 instances, max deviation {worst:.1e}"))
}

fn gradient_correctness() -> Verdict {
    let t = Instant::now();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let c = instance(1000 + seed);
        let g = gram(&c.x, c.sigma);
        let m = MembershipMatrix::from_memberships(c.n, c.k, &c.m).unwrap();
        let grad = jcs_gradient(&m, &g, c.psi).unwrap();
        for i in 0..c.m.len() {
            let (mut up, mut dn) = (c.m.clone(), c.m.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (objective(c.n, c.k, &up, &g, c.psi) - objective(c.n, c.k, &dn, &g, c.psi)) / (2.0 * h);
            worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-8));
        }
    }
    let el = t.elapsed();
    verdict(worst < 1e-4 && el < Duration::from_secs(10), format!("50 instances, max relative error {worst:.1e}"))
}

fn membership_simplex() -> Verdict {
    let mut worst_sum: f64 = 0.0;
    let mut min_m = f64::INFINITY;
    let mut iterations = 0;
    let mut observe = |x: &FeatureMatrix, p: &ClusterParams| {
        cluster_observed(x, p, p.iterations, &mut |_, _, m| {
            worst_sum = worst_sum.max(m.simplex_error());
            min_m = min_m.min(m.memberships().into_iter().fold(f64::INFINITY, f64::min));
            iterations += 1;
        })
        .unwrap();
    };
    for seed in 0..10 {
        let (x, _, _) = blobs(seed);
        for k in [2, 3] {
            observe(&x, &ClusterParams { k, seed, ..Default::default() });
        }
    }
    let spec = SceneSpec {
        region_cells: 100,
        n_fields: 12,
        ..SceneSpec::default()
    };
    let scene = SceneGenerator::new(&spec, &CropCalendar::default()).unwrap().scene(157, 3).unwrap();
    let f = srrm::build_features(&scene).unwrap();
    for k in 2..=5 {
        observe(&f.cluster, &ClusterParams { k, psi: 0.1, seed: 3, ..Default::default() });
    }
    verdict(
        worst_sum < 1e-9 && min_m >= 0.0,
        format!("{iterations} iterations, max |sum - 1| {worst_sum:.1e}, min membership {min_m:.1e}"),
    )
}

fn clustering_recovery() -> Verdict {
    let t = Instant::now();
    let mut good = 0;
    for seed in 0..100 {
        let (x, _, truth) = blobs(seed);
        let labels = cluster(&x, &ClusterParams { k: 2, seed, ..Default::default() }).unwrap().labels();
        let same = labels.iter().zip(&truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64;
        if same.max(1.0 - same) >= 0.95 {
            good += 1;
        }
    }
    let el = t.elapsed();
    verdict(good >= 95 && el < Duration::from_secs(30), format!("{good}/100 seeds with >= 95% agreement"))
}

fn kernel_interpolation() -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..2).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let smooth: Vec<f64> = rows.iter().map(|r| r[0].sin() + r[1].cos()).collect();
        let rough: Vec<f64> = smooth.iter().map(|v| v + rng.random_range(-0.1..0.1)).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let auto = kridge::fit_auto(&x, &smooth, 1e-10).unwrap();
        let narrow = kridge::fit(&x, &rough, 1e-10, 0.1).unwrap();
        for (i, r) in rows.iter().enumerate() {
            worst = worst.max((auto.predict(r).unwrap() - smooth[i]).abs());
            worst = worst.max((narrow.predict(r).unwrap() - rough[i]).abs());
        }
    }
    verdict(worst < 1e-6, format!("n = 200, mu = 1e-10, max training residual {worst:.1e}"))
}

fn annealing_schedule() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let n = rng.random_range(2..60);
        let d = rng.random_range(1..6);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let var: f64 = (0..d)
            .map(|j| {
                let m = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
                rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n as f64
            })
            .sum::<f64>()
            / d as f64;
        let direct = var.sqrt() * (4.0 / (n as f64 * (2.0 * d as f64 + 1.0))).powf(1.0 / (d as f64 + 4.0));
        let sigma = silverman_sigma(&x).unwrap();
        worst = worst.max((sigma - direct).abs());
        let iters = rng.random_range(2..80);
        let s = anneal_schedule(sigma, iters);
        worst = worst.max((s[0] - sigma).abs()).max((s[iters - 1] - sigma / 4.0).abs());
    }
    let spec_value = silverman_rule(1.0, 100, 1);
    worst = worst.max((spec_value - (4.0f64 / 300.0).powf(0.2)).abs());
    verdict(worst <= 1e-12, format!("50 random sets, max deviation {worst:.1e}"))
}

fn conservation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (r, c, f) = (rng.random_range(1..8), rng.random_range(1..8), rng.random_range(1..6));
        let coarse: Vec<f64> = (0..r * c).map(|_| rng.random::<f64>()).collect();
        let cg = Grid::new(r, c, 1000.0 * f as f64, VariableTag::Sm, coarse).unwrap();
        let back = grid::aggregate(&grid::replicate(&cg, f).unwrap(), f).unwrap();
        worst = back.values().iter().zip(cg.values()).fold(worst, |w, (a, b)| w.max((a - b).abs()));
        let fine: Vec<f64> = (0..r * c * f * f).map(|_| rng.random_range(250.0..330.0)).collect();
        let fg = Grid::new(r * f, c * f, 1000.0, VariableTag::Lst, fine).unwrap();
        let agg = grid::aggregate(&fg, f).unwrap();
        worst = worst.max((agg.mean() - fg.mean()).abs() / fg.mean());
        for (bi, &v) in agg.values().iter().enumerate() {
            let (br, bc) = (bi / c, bi % c);
            let mut s = 0.0;
            for i in 0..f {
                for j in 0..f {
                    s += fg.get(br * f + i, bc * f + j);
                }
            }
            worst = worst.max((s / (f * f) as f64 - v).abs() / v.abs());
        }
    }
    verdict(worst <= 1e-12, format!("200 random grids, max deviation {worst:.1e}"))
}

fn evals<'a>(rows: &'a [DayEval], method: &str) -> Vec<&'a DayEval> {
    rows.iter().filter(|r| r.method == method).collect()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn end_to_end(run: &SeasonRun, elapsed: Duration) -> Verdict {
    let rows = run.evals();
    let (s, p) = (evals(&rows, "srrm"), evals(&rows, "pri"));
    let days = run.days.len();
    let wins = s.iter().filter(|a| p.iter().any(|b| b.day == a.day && a.rmse < b.rmse)).count();
    let (ms, mp) = (mean(s.iter().map(|r| r.rmse)), mean(p.iter().map(|r| r.rmse)));
    verdict(
        wins as f64 >= 0.8 * days as f64 && ms < mp && elapsed < Duration::from_secs(1800) && run.failed_days() == 0,
        format!(
            "SRRM lower on {wins}/{days} days; mean RMSE {ms:.4} vs {mp:.4}; season took {:.1} min",
            elapsed.as_secs_f64() / 60.0
        ),
    )
}

fn kld_ordering(run: &SeasonRun) -> Verdict {
    let rows = run.evals();
    let mut pass = true;
    let mut parts = Vec::new();
    for lc in [LandCover::Corn, LandCover::Cotton, LandCover::Bare] {
        let k = |m: &str| mean(evals(&rows, m).iter().filter_map(|r| r.kld_by_class[lc.id()]));
        let (s, p) = (k("srrm"), k("pri"));
        pass &= s <= 0.1 * p;
        parts.push(format!("{} {s:.3} vs {p:.3} (x{:.0})", lc.name(), p / s));
    }
    verdict(pass, format!("{}; reference gap x1000", parts.join(", ")))
}

fn usability(run: &SeasonRun) -> Verdict {
    let rows = run.evals();
    let s = evals(&rows, "srrm");
    let passed = s.iter().filter(|r| r.ztest.pass).count();
    let frac = mean(s.iter().map(|r| r.fraction_below));
    verdict(
        passed as f64 >= 0.9 * s.len() as f64,
        format!(
            "Z-test passed on {passed}/{} days; {:.1}% of pixels within 0.02 (reference 96%)",
            s.len(),
            100.0 * frac
        ),
    )
}

fn main() {
    let mut results = Vec::new();
    check(&mut results, 1, "Oracle equivalence", oracle_equivalence);
    check(&mut results, 2, "Gradient correctness", gradient_correctness);
    check(&mut results, 3, "Membership simplex", membership_simplex);
    check(&mut results, 4, "Clustering recovery", clustering_recovery);
    check(&mut results, 5, "Kernel regression interpolation", kernel_interpolation);
    check(&mut results, 6, "Annealing schedule", annealing_schedule);

    let cfg = RunConfig::default();
    let days = dataset::select_days(&cfg.run.days);
    let ds = Dataset::synthetic(&cfg.synth, &cfg.calendar, cfg.run.seed, &days).unwrap();
    let season_run = || {
        let t = Instant::now();
        let run = season::run_season(&ds, &cfg, Method::Both, &days, cfg.run.jobs).unwrap();
        (run, t.elapsed())
    };
    let (first, elapsed) = season_run();
    check(&mut results, 7, "End-to-end ordering", || end_to_end(&first, elapsed));
    check(&mut results, 8, "KLD ordering", || kld_ordering(&first));
    check(&mut results, 9, "Usability threshold", || usability(&first));
    check(&mut results, 10, "Determinism", || {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        season::write_results(dirs[0].path(), &first, ds.manifest(), &cfg).unwrap();
        let (second, _) = season_run();
        season::write_results(dirs[1].path(), &second, ds.manifest(), &cfg).unwrap();
        let read = |i: usize| std::fs::read(dirs[i].path().join("metrics.csv")).unwrap();
        let (a, b) = (read(0), read(1));
        verdict(a == b, format!("two full runs, metrics.csv {} bytes each, identical: {}", a.len(), a == b))
    });
    check(&mut results, 11, "Conservation plumbing", conservation);

    let passed = results.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
