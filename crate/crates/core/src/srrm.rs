//! Clustered kernel regression ("self-regularized regressive models").
//!
//! Per day: cluster the fine pixels on their covariates and coordinates,
//! train one kernel ridge model per cluster on the in-situ pixels it owns
//! (hard assignment), and predict every pixel as the membership-weighted
//! blend of all cluster models. `(K, ψ, μ)` come from k-fold
//! cross-validation on the in-situ pixels.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, VariableTag};
use crate::itclust::{self, argmax, ClusterParams, FeatureMatrix, MembershipMatrix};
use crate::kridge::{KernelModel, KernelSystem};
use crate::seed::{self, stream};
use crate::synth::{LandCover, Scene};

/// Covariates of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFeatures {
    /// `[LST, PPT, LAI, LC one-hot…, x, y]` with the continuous covariates
    /// standardized and coordinates scaled to `[0, 1]`.
    pub cluster: FeatureMatrix,
    /// Clustering features plus the replicated coarse SM.
    pub regression: FeatureMatrix,
}

fn zscore(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    v.iter().map(|x| (x - mean) / sd).collect()
}

pub fn build_features(scene: &Scene) -> Result<SceneFeatures> {
    scene.validate()?;
    for (g, tag) in [
        (&scene.lst, VariableTag::Lst),
        (&scene.ppt, VariableTag::Ppt),
        (&scene.lai, VariableTag::Lai),
        (&scene.lc, VariableTag::Lc),
        (&scene.coarse_sm, VariableTag::Sm),
    ] {
        if g.tag() != tag {
            return Err(Error::Schema(format!("expected a {tag} grid, found {}", g.tag())));
        }
    }
    let (rows, cols) = (scene.lst.rows(), scene.lst.cols());
    let n = rows * cols;
    let continuous = [
        zscore(scene.lst.values()),
        zscore(scene.ppt.values()),
        zscore(scene.lai.values()),
    ];
    let coarse = grid::replicate(&scene.coarse_sm, scene.coarse_factor())?;
    let classes = LandCover::ALL.len();
    let scale = |i: usize, len: usize| if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };

    let dc = continuous.len() + classes + 2;
    let mut cl = Vec::with_capacity(n * dc);
    let mut rg = Vec::with_capacity(n * (dc + 1));
    for i in 0..n {
        let lc = LandCover::from_id(scene.lc.values()[i])
            .ok_or_else(|| Error::Schema(format!("unknown land-cover class {}", scene.lc.values()[i])))?;
        let start = cl.len();
        cl.extend(continuous.iter().map(|c| c[i]));
        cl.extend((0..classes).map(|c| if c == lc.id() { 1.0 } else { 0.0 }));
        cl.push(scale(i % cols, cols));
        cl.push(scale(i / cols, rows));
        rg.extend_from_slice(&cl[start..]);
        rg.push(coarse.values()[i]);
    }
    Ok(SceneFeatures {
        cluster: FeatureMatrix::new(n, dc, cl)?,
        regression: FeatureMatrix::new(n, dc + 1, rg)?,
    })
}

/// One kernel model per cluster; clusters without training pixels borrow
/// the model of the nearest cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModels {
    pub models: Vec<KernelModel>,
    /// Model index used by each cluster.
    pub owner: Vec<usize>,
}

impl ClusterModels {
    /// Membership-weighted blend at pixel `i`.
    pub fn predict_pixel(&self, m: &MembershipMatrix, i: usize, x: &[f64]) -> Result<f64> {
        let preds = self
            .models
            .iter()
            .map(|model| model.predict(x))
            .collect::<Result<Vec<f64>>>()?;
        Ok((0..m.k()).map(|k| m.m(i, k) * preds[self.owner[k]]).sum())
    }

    pub fn predict(&self, m: &MembershipMatrix, x: &FeatureMatrix, pixels: &[usize]) -> Result<Vec<f64>> {
        pixels.iter().map(|&i| self.predict_pixel(m, i, x.row(i))).collect()
    }
}

/// Membership-weighted mean of the clustering features, per cluster.
fn centroids(m: &MembershipMatrix, x: &FeatureMatrix) -> Vec<Vec<f64>> {
    (0..m.k())
        .map(|k| {
            let mut c = vec![0.0; x.d()];
            let mut w = 0.0;
            for i in 0..x.n() {
                let mik = m.m(i, k);
                w += mik;
                c.iter_mut().zip(x.row(i)).for_each(|(a, b)| *a += mik * b);
            }
            c.iter_mut().for_each(|a| *a /= w.max(f64::MIN_POSITIVE));
            c
        })
        .collect()
}

/// Hard assignment of training pixels, with empty clusters redirected to
/// the cluster with the nearest centroid. Returns per-model pixel lists and
/// the cluster → model map.
fn assign(m: &MembershipMatrix, cluster_x: &FeatureMatrix, train: &[usize]) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    if train.is_empty() {
        return Err(Error::DegenerateData("no training pixels".into()));
    }
    let mut members = vec![Vec::new(); m.k()];
    for &i in train {
        members[argmax(&m.row(i))].push(i);
    }
    let nonempty: Vec<usize> = (0..m.k()).filter(|&k| !members[k].is_empty()).collect();
    let mut owner = vec![0; m.k()];
    if nonempty.len() < m.k() {
        let cents = centroids(m, cluster_x);
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        for k in 0..m.k() {
            if members[k].is_empty() {
                let near = nonempty
                    .iter()
                    .copied()
                    .min_by(|&a, &b| dist(&cents[k], &cents[a]).total_cmp(&dist(&cents[k], &cents[b])))
                    .expect("at least one cluster owns a training pixel");
                log::warn!("cluster {k} has no training pixels; merged into cluster {near}");
                owner[k] = near;
            }
        }
    }
    let slot: Vec<Option<usize>> = {
        let mut s = vec![None; m.k()];
        for (idx, &k) in nonempty.iter().enumerate() {
            s[k] = Some(idx);
        }
        s
    };
    for k in 0..m.k() {
        owner[k] = slot[if members[k].is_empty() { owner[k] } else { k }].expect("owner is non-empty");
    }
    let groups = nonempty.into_iter().map(|k| std::mem::take(&mut members[k])).collect();
    Ok((groups, owner))
}

fn systems(features: &SceneFeatures, groups: &[Vec<usize>], target: &[f64], sigma: Option<f64>) -> Result<Vec<KernelSystem>> {
    groups
        .iter()
        .map(|g| {
            let y: Vec<f64> = g.iter().map(|&i| target[i]).collect();
            KernelSystem::new(&features.regression.select(g), &y, sigma)
        })
        .collect()
}

/// Train per-cluster models on the pixels `train` with targets `target`
/// (indexed by pixel).
pub fn train_cluster_models(
    features: &SceneFeatures,
    m: &MembershipMatrix,
    train: &[usize],
    target: &[f64],
    mu: f64,
    sigma: Option<f64>,
) -> Result<ClusterModels> {
    let (groups, owner) = assign(m, &features.cluster, train)?;
    let models = systems(features, &groups, target, sigma)?
        .iter()
        .map(|s| s.solve(mu))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterModels { models, owner })
}

/// Blend the models over every pixel and clamp to `[0, 1]`.
pub fn blend(models: &ClusterModels, m: &MembershipMatrix, features: &SceneFeatures, like: &Grid) -> Result<Grid> {
    let all: Vec<usize> = (0..features.regression.n()).collect();
    let sm = models
        .predict(m, &features.regression, &all)?
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    Grid::new(like.rows(), like.cols(), like.cell_size(), VariableTag::Sm, sm)
}

/// Hyper-parameter grids searched by cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub enabled: bool,
    pub folds: usize,
    pub k_values: Vec<usize>,
    pub psi_values: Vec<f64>,
    pub mu_values: Vec<f64>,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            enabled: true,
            folds: 10,
            k_values: (2..=8).collect(),
            psi_values: vec![1e-3, 1e-2, 1e-1],
            mu_values: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0],
        }
    }
}

/// Everything needed to disaggregate one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SrrmConfig {
    /// Clustering settings; `k` and `psi` are used as is when
    /// cross-validation is disabled.
    pub cluster: ClusterParams,
    pub mu: f64,
    /// Regression kernel width; Silverman's rule per cluster when unset.
    pub regression_sigma: Option<f64>,
    pub cv: CvConfig,
}

impl Default for SrrmConfig {
    fn default() -> Self {
        SrrmConfig {
            cluster: ClusterParams::default(),
            mu: 1e-2,
            regression_sigma: None,
            cv: CvConfig::default(),
        }
    }
}

/// Selected hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayParams {
    pub k: usize,
    pub psi: f64,
    pub mu: f64,
}

/// Cross-validation outcome: the selected triple, its score, and the score
/// of every evaluated triple.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best: DayParams,
    pub mae: f64,
    pub table: Vec<(DayParams, f64)>,
}

/// Memberships per `(K, ψ)` pair.
type Fitted = ((usize, f64), Result<MembershipMatrix>);

fn insitu_targets(scene: &Scene) -> (Vec<usize>, Vec<f64>) {
    let mut target = vec![f64::NAN; scene.n_pixels()];
    let train = scene
        .insitu
        .iter()
        .map(|o| {
            target[o.pixel] = o.value;
            o.pixel
        })
        .collect();
    (train, target)
}

/// Per-day clustering seed.
pub fn day_seed(base: u64, day: u32) -> u64 {
    seed::derive(base, &[stream::DAY, day as u64])
}

/// Split `pixels` into `folds` groups after a seeded shuffle.
pub fn fold_split(pixels: &[usize], folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut p = pixels.to_vec();
    p.shuffle(&mut seed::rng(seed, &[stream::FOLDS]));
    let mut out = vec![Vec::new(); folds];
    for (pos, i) in p.into_iter().enumerate() {
        out[pos % folds].push(i);
    }
    out.iter_mut().for_each(|f| f.sort_unstable());
    out
}

fn better(a: &(DayParams, f64), b: &(DayParams, f64)) -> bool {
    let (pa, sa) = a;
    let (pb, sb) = b;
    if sa != sb {
        return sa < sb;
    }
    if pa.k != pb.k {
        return pa.k < pb.k;
    }
    if pa.mu != pb.mu {
        return pa.mu > pb.mu;
    }
    pa.psi < pb.psi
}

/// Memberships for every `(K, ψ)` of the grid, clustered in one batch.
fn cluster_grid(
    features: &SceneFeatures,
    config: &SrrmConfig,
    seed: u64,
) -> Vec<Fitted> {
    let combos: Vec<(usize, f64)> = config
        .cv
        .k_values
        .iter()
        .flat_map(|&k| config.cv.psi_values.iter().map(move |&psi| (k, psi)))
        .collect();
    let params: Vec<ClusterParams> = combos
        .iter()
        .map(|&(k, psi)| ClusterParams {
            k,
            psi,
            seed,
            ..config.cluster.clone()
        })
        .collect();
    combos.into_iter().zip(itclust::cluster_many(&features.cluster, &params)).collect()
}

fn validate_grids(cv: &CvConfig) -> Result<()> {
    if cv.k_values.is_empty() || cv.psi_values.is_empty() || cv.mu_values.is_empty() {
        return Err(Error::Config("cross-validation grids must be non-empty".into()));
    }
    if cv.folds < 2 {
        return Err(Error::Config("cross-validation needs at least 2 folds".into()));
    }
    Ok(())
}

/// Mean absolute held-out error of every μ for one clustering.
fn cv_scores(
    features: &SceneFeatures,
    m: &MembershipMatrix,
    folds: &[Vec<usize>],
    target: &[f64],
    mus: &[f64],
    sigma: Option<f64>,
) -> Result<Vec<f64>> {
    let mut abs_err = vec![0.0; mus.len()];
    let mut count = 0usize;
    for (f, held) in folds.iter().enumerate() {
        if held.is_empty() {
            continue;
        }
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, p)| p.iter().copied())
            .collect();
        let (groups, owner) = assign(m, &features.cluster, &train)?;
        let systems = systems(features, &groups, target, sigma)?;
        let xh = features.regression.select(held);
        let paths = systems
            .iter()
            .map(|sys| sys.predict_path(mus, &xh))
            .collect::<Result<Vec<_>>>()?;
        for (s, err) in abs_err.iter_mut().enumerate() {
            for (h, &i) in held.iter().enumerate() {
                let p: f64 = (0..m.k()).map(|k| m.m(i, k) * paths[owner[k]][s][h]).sum();
                *err += (p.clamp(0.0, 1.0) - target[i]).abs();
            }
        }
        count += held.len();
    }
    Ok(abs_err.into_iter().map(|e| e / count as f64).collect())
}

/// Select `(K, ψ, μ)` for a scene by k-fold cross-validation of the
/// mean absolute error on held-out in-situ pixels.
pub fn cross_validate(scene: &Scene, config: &SrrmConfig, seed: u64) -> Result<CvResult> {
    let features = build_features(scene)?;
    cross_validate_features(scene, &features, config, seed).map(|(cv, _)| cv)
}

fn cross_validate_features(
    scene: &Scene,
    features: &SceneFeatures,
    config: &SrrmConfig,
    seed: u64,
) -> Result<(CvResult, Vec<Fitted>)> {
    validate_grids(&config.cv)?;
    let (train, target) = insitu_targets(scene);
    let mut n_folds = config.cv.folds;
    if train.len() < n_folds {
        log::warn!(
            "day {}: {} training pixels, reducing to {} folds",
            scene.day,
            train.len(),
            train.len()
        );
        n_folds = train.len();
    }
    if n_folds < 2 {
        return Err(Error::DegenerateData("cross-validation needs at least 2 training pixels".into()));
    }
    let folds = fold_split(&train, n_folds, seed);
    let clusterings = cluster_grid(features, config, seed);
    let mut table = Vec::new();
    let mut last_err = None;
    for ((k, psi), m) in &clusterings {
        let scores = match m {
            Ok(m) => cv_scores(features, m, &folds, &target, &config.cv.mu_values, config.regression_sigma),
            Err(e) => Err(Error::DegenerateCluster(e.to_string())),
        };
        match scores {
            Ok(scores) => {
                for (mu, s) in config.cv.mu_values.iter().zip(scores) {
                    table.push((DayParams { k: *k, psi: *psi, mu: *mu }, s));
                }
            }
            Err(e) => {
                log::warn!("day {}: K = {k}, psi = {psi} skipped: {e}", scene.day);
                last_err = Some(e);
            }
        }
    }
    let best = table
        .iter()
        .filter(|(_, s)| s.is_finite())
        .fold(None, |acc: Option<&(DayParams, f64)>, c| match acc {
            Some(b) if !better(c, b) => Some(b),
            _ => Some(c),
        })
        .copied()
        .ok_or_else(|| last_err.unwrap_or_else(|| Error::Numeric("no finite cross-validation score".into())))?;
    Ok((
        CvResult {
            best: best.0,
            mae: best.1,
            table,
        },
        clusterings,
    ))
}

/// One disaggregated day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayOutput {
    pub sm: Grid,
    pub params: DayParams,
    pub cv_mae: Option<f64>,
}

/// Disaggregate one day with fixed parameters.
pub fn disaggregate_day(scene: &Scene, params: DayParams, config: &SrrmConfig, seed: u64) -> Result<Grid> {
    let features = build_features(scene)?;
    let cp = ClusterParams {
        k: params.k,
        psi: params.psi,
        seed,
        ..config.cluster.clone()
    };
    let m = itclust::cluster(&features.cluster, &cp)?;
    finish_day(scene, &features, &m, params, config)
}

fn finish_day(scene: &Scene, features: &SceneFeatures, m: &MembershipMatrix, params: DayParams, config: &SrrmConfig) -> Result<Grid> {
    let (train, target) = insitu_targets(scene);
    let models = train_cluster_models(features, m, &train, &target, params.mu, config.regression_sigma)?;
    blend(&models, m, features, &scene.true_sm)
}

/// Full per-day procedure: cross-validation (when enabled) followed by the
/// final fit on all in-situ pixels.
pub fn run_day(scene: &Scene, config: &SrrmConfig, base_seed: u64) -> Result<DayOutput> {
    let seed = day_seed(base_seed, scene.day);
    if !config.cv.enabled {
        let params = DayParams {
            k: config.cluster.k,
            psi: config.cluster.psi,
            mu: config.mu,
        };
        let sm = disaggregate_day(scene, params, config, seed)?;
        return Ok(DayOutput { sm, params, cv_mae: None });
    }
    let features = build_features(scene)?;
    let (cv, clusterings) = cross_validate_features(scene, &features, config, seed)?;
    let m = clusterings
        .into_iter()
        .find(|((k, psi), _)| *k == cv.best.k && *psi == cv.best.psi)
        .and_then(|(_, m)| m.ok())
        .expect("selected clustering succeeded");
    let sm = finish_day(scene, &features, &m, cv.best, config)?;
    Ok(DayOutput {
        sm,
        params: cv.best,
        cv_mae: Some(cv.mae),
    })
}

/// RMSE against the truth after each clustering iteration, for
/// `iterations` iterations, with the model parameters fixed.
pub fn iteration_trace(
    scene: &Scene,
    params: DayParams,
    config: &SrrmConfig,
    base_seed: u64,
    iterations: usize,
) -> Result<Vec<f64>> {
    let features = build_features(scene)?;
    let (train, target) = insitu_targets(scene);
    let cp = ClusterParams {
        k: params.k,
        psi: params.psi,
        seed: day_seed(base_seed, scene.day),
        ..config.cluster.clone()
    };
    let mut trace = Vec::new();
    let mut current = usize::MAX;
    let mut failure = None;
    itclust::cluster_observed(&features.cluster, &cp, iterations, &mut |attempt, _, m| {
        if attempt != current {
            current = attempt;
            trace.clear();
        }
        let r = train_cluster_models(&features, m, &train, &target, params.mu, config.regression_sigma)
            .and_then(|models| blend(&models, m, &features, &scene.true_sm))
            .and_then(|sm| crate::metrics::rmse(&sm, &scene.true_sm, None));
        match r {
            Ok(v) => trace.push(v),
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(trace),
    }
}
