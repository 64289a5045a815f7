mod common;

use common::oracles::{blobs, gram, instance, objective};
use soilscale::itclust::{
    cluster, cluster_observed, gaussian_kernel, jcs_estimate, jcs_gradient, ClusterParams, MembershipMatrix,
};

#[test]
fn estimate_matches_triple_loop() {
    for seed in 0..100 {
        let t = instance(seed);
        let g = gram(&t.x, t.sigma);
        let mm = MembershipMatrix::from_memberships(t.n, t.k, &t.m).unwrap();
        let got = jcs_estimate(&mm, &g, t.psi).unwrap();
        let want = objective(t.n, t.k, &t.m, &g, t.psi);
        assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "seed {seed}: {got} vs {want}");
    }
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-6;
    for seed in 0..50 {
        let t = instance(1000 + seed);
        let g = gram(&t.x, t.sigma);
        let mm = MembershipMatrix::from_memberships(t.n, t.k, &t.m).unwrap();
        let grad = jcs_gradient(&mm, &g, t.psi).unwrap();
        for idx in 0..t.m.len() {
            let mut up = t.m.clone();
            let mut dn = t.m.clone();
            up[idx] += h;
            dn[idx] -= h;
            let fd = (objective(t.n, t.k, &up, &g, t.psi) - objective(t.n, t.k, &dn, &g, t.psi)) / (2.0 * h);
            let scale = fd.abs().max(grad[idx].abs()).max(1e-8);
            assert!((fd - grad[idx]).abs() / scale < 1e-4, "seed {seed} idx {idx}: {fd} vs {}", grad[idx]);
        }
    }
}

#[test]
fn kernel_matches_gram_oracle() {
    let t = instance(7);
    let g = gram(&t.x, t.sigma);
    for i in 0..t.n {
        for j in 0..t.n {
            let k = gaussian_kernel(&t.x[i], &t.x[j], t.sigma).unwrap();
            assert!((k - g[i * t.n + j]).abs() < 1e-15);
        }
    }
}

#[test]
fn blob_recovery_across_seeds() {
    let mut good = 0;
    for seed in 0..20 {
        let (x, _, truth) = blobs(seed);
        let p = ClusterParams { k: 2, seed, ..Default::default() };
        let labels = cluster(&x, &p).unwrap().labels();
        let same = labels.iter().zip(&truth).filter(|(a, b)| a == b).count() as f64 / 200.0;
        if same.max(1.0 - same) >= 0.95 {
            good += 1;
        }
    }
    assert!(good >= 19, "{good}/20");
}

#[test]
fn full_sample_fixed_width_objective_does_not_increase() {
    let (x, rows, _) = blobs(3);
    let sigma = 1.0;
    let g = gram(&rows, sigma);
    let p = ClusterParams {
        k: 2,
        psi: 0.0,
        sample_fraction: 1.0,
        sigma: Some(sigma),
        seed: 5,
        ..Default::default()
    };
    let mut values = Vec::new();
    cluster_observed(&x, &p, 30, &mut |_, _, m| values.push(jcs_estimate(m, &g, 0.0).unwrap())).unwrap();
    for w in values.windows(2) {
        assert!(w[1] <= w[0] + 1e-6, "{values:?}");
    }
}
