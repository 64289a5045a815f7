//! Season-long multiscale synthetic dataset.
//!
//! The generator stands in for a coupled crop / land-surface simulator: a
//! fixed patchwork of sweet-corn, cotton and bare-soil fields evolves over
//! one year under a crop calendar, with spatially smooth rain storms and
//! field irrigation driving soil moisture. Everything is produced at the
//! native (200 m) resolution, averaged to 1 km and 10 km, and then corrupted
//! with observation noise.
//!
//! Scenes are pure functions of `(spec, calendar, day, seed)`; rain for a
//! given day is keyed by that day alone, so consecutive scenes share their
//! antecedent weather.

mod field;

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, VariableTag};
use crate::seed::{self, stream};

pub use field::{gaussian_field, upsample_bilinear, voronoi_patches};

/// Land-cover classes, with their class ids in LC grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LandCover {
    Bare = 0,
    Corn = 1,
    Cotton = 2,
}

impl LandCover {
    pub const ALL: [LandCover; 3] = [LandCover::Bare, LandCover::Corn, LandCover::Cotton];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: f64) -> Option<LandCover> {
        match id as i64 {
            0 if id == 0.0 => Some(LandCover::Bare),
            1 if id == 1.0 => Some(LandCover::Corn),
            2 if id == 2.0 => Some(LandCover::Cotton),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LandCover::Bare => "bare",
            LandCover::Corn => "corn",
            LandCover::Cotton => "cotton",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Crop {
    Corn,
    Cotton,
}

impl From<Crop> for LandCover {
    fn from(c: Crop) -> Self {
        match c {
            Crop::Corn => LandCover::Corn,
            Crop::Cotton => LandCover::Cotton,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalendarEntry {
    pub crop: Crop,
    pub planting: u32,
    pub harvest: u32,
}

/// Growing windows per crop; a crop is on the ground from planting to
/// harvest, both days inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropCalendar {
    pub entries: Vec<CalendarEntry>,
}

impl Default for CropCalendar {
    /// Two sweet-corn seasons and one cotton season.
    fn default() -> Self {
        let e = |crop, planting, harvest| CalendarEntry {
            crop,
            planting,
            harvest,
        };
        CropCalendar {
            entries: vec![
                e(Crop::Corn, 61, 139),
                e(Crop::Corn, 183, 261),
                e(Crop::Cotton, 153, 332),
            ],
        }
    }
}

impl CropCalendar {
    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.entries.iter().enumerate() {
            if !(1..=365).contains(&a.planting) || !(1..=365).contains(&a.harvest) {
                return Err(Error::Config(format!("calendar entry {i}: days must lie in 1..=365")));
            }
            if a.planting >= a.harvest {
                return Err(Error::Config(format!(
                    "calendar entry {i}: planting day {} is not before harvest day {}",
                    a.planting, a.harvest
                )));
            }
            for b in &self.entries[i + 1..] {
                if a.crop == b.crop && a.planting <= b.harvest && b.planting <= a.harvest {
                    return Err(Error::Config(format!("overlapping {:?} seasons in calendar", a.crop)));
                }
            }
        }
        Ok(())
    }

    /// Growing window of `crop` that contains `day`, if any.
    pub fn window(&self, crop: Crop, day: i64) -> Option<(u32, u32)> {
        self.entries
            .iter()
            .find(|e| e.crop == crop && e.planting as i64 <= day && day <= e.harvest as i64)
            .map(|e| (e.planting, e.harvest))
    }
}

/// Observation-noise standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseLevels {
    /// LST at 1 km (K).
    pub lst: f64,
    /// 3-day PPT at 1 km (mm).
    pub ppt: f64,
    /// SM at 10 km (m³/m³).
    pub sm: f64,
    /// LAI at 1 km.
    pub lai: f64,
}

impl Default for NoiseLevels {
    fn default() -> Self {
        NoiseLevels {
            lst: 5.0,
            ppt: 1.0,
            sm: 0.03,
            lai: 0.1,
        }
    }
}

/// Coefficients of the statistical land-surface response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponseParams {
    pub sm_base: f64,
    pub sm_seasonal: f64,
    /// SM gain of a fully wetted profile above the base level.
    pub wet_gain: f64,
    /// Antecedent water (mm) at which 63% of `wet_gain` is reached.
    pub api_scale_mm: f64,
    pub api_decay_days: f64,
    pub api_window_days: u32,
    /// SM drawdown per unit LAI.
    pub veg_drawdown: f64,
    /// Amplitude of the static soil-texture perturbation.
    pub soil_amp: f64,
    /// Amplitude of the daily unexplained SM perturbation.
    pub micro_amp: f64,
    pub lst_mean: f64,
    pub lst_seasonal: f64,
    /// LST change (K) per m³/m³ of SM below the reference.
    pub lst_sm_coef: f64,
    pub lst_sm_ref: f64,
    pub lst_lai_coef: f64,
    pub lst_micro: f64,
    pub rain_prob_mean: f64,
    pub rain_prob_amp: f64,
    pub rain_mean_mm: f64,
    pub rain_pattern_amp: f64,
    pub irrigation_mm: f64,
    pub irrigation_interval: u32,
    pub corn_peak_lai: f64,
    pub cotton_peak_lai: f64,
    /// Fraction of the growing window at which LAI peaks.
    pub lai_peak_at: f64,
    pub lai_texture: f64,
}

impl Default for ResponseParams {
    fn default() -> Self {
        ResponseParams {
            sm_base: 0.07,
            sm_seasonal: 0.02,
            wet_gain: 0.24,
            api_scale_mm: 20.0,
            api_decay_days: 3.0,
            api_window_days: 10,
            veg_drawdown: 0.012,
            soil_amp: 0.012,
            micro_amp: 0.004,
            lst_mean: 293.0,
            lst_seasonal: 8.0,
            lst_sm_coef: 40.0,
            lst_sm_ref: 0.2,
            lst_lai_coef: 1.0,
            lst_micro: 0.7,
            rain_prob_mean: 0.2,
            rain_prob_amp: 0.12,
            rain_mean_mm: 14.0,
            rain_pattern_amp: 0.9,
            irrigation_mm: 8.0,
            irrigation_interval: 4,
            corn_peak_lai: 3.2,
            cotton_peak_lai: 2.8,
            lai_peak_at: 0.6,
            lai_texture: 0.06,
        }
    }
}

/// Geometry and physics of the synthetic region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    /// Region side length in native cells.
    pub region_cells: usize,
    /// Native cell size (m).
    pub cell_size: f64,
    /// Native → fine (1 km) aggregation factor.
    pub fine_factor: usize,
    /// Fine → coarse (10 km) aggregation factor.
    pub coarse_factor: usize,
    /// Number of Voronoi field patches.
    pub n_fields: usize,
    pub corn_share: f64,
    pub cotton_share: f64,
    pub layout_seed: u64,
    pub rain_corr_m: f64,
    pub surface_corr_m: f64,
    pub soil_corr_m: f64,
    /// Fraction of fine pixels carrying an in-situ SM observation.
    pub insitu_fraction: f64,
    pub sm_min: f64,
    pub sm_max: f64,
    pub noise: NoiseLevels,
    pub response: ResponseParams,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            region_cells: 250,
            cell_size: 200.0,
            fine_factor: 5,
            coarse_factor: 10,
            n_fields: 40,
            corn_share: 0.35,
            cotton_share: 0.30,
            layout_seed: 2007,
            rain_corr_m: 12_000.0,
            surface_corr_m: 4_000.0,
            soil_corr_m: 6_000.0,
            insitu_fraction: 0.33,
            sm_min: 0.02,
            sm_max: 0.45,
            noise: NoiseLevels::default(),
            response: ResponseParams::default(),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.region_cells == 0 || self.fine_factor == 0 || self.coarse_factor == 0 {
            return bad("region size and aggregation factors must be positive".into());
        }
        if !self.region_cells.is_multiple_of(self.fine_factor * self.coarse_factor) {
            return bad(format!(
                "region of {} cells is not divisible by {}x{}",
                self.region_cells, self.fine_factor, self.coarse_factor
            ));
        }
        if !(self.cell_size > 0.0) {
            return bad("cell_size must be positive".into());
        }
        if !(self.insitu_fraction > 0.0 && self.insitu_fraction <= 1.0) {
            return bad("insitu_fraction must lie in (0, 1]".into());
        }
        if !(0.0 <= self.sm_min && self.sm_min < self.sm_max && self.sm_max <= 1.0) {
            return bad("SM band must satisfy 0 <= sm_min < sm_max <= 1".into());
        }
        if self.corn_share < 0.0 || self.cotton_share < 0.0 || self.corn_share + self.cotton_share > 1.0 {
            return bad("crop shares must be non-negative and sum to at most 1".into());
        }
        for (name, sd) in [
            ("lst", self.noise.lst),
            ("ppt", self.noise.ppt),
            ("sm", self.noise.sm),
            ("lai", self.noise.lai),
        ] {
            if !(sd >= 0.0) {
                return bad(format!("noise.{name} must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn fine_cells(&self) -> usize {
        self.region_cells / self.fine_factor
    }

    pub fn coarse_cells(&self) -> usize {
        self.fine_cells() / self.coarse_factor
    }

    pub fn fine_cell_size(&self) -> f64 {
        self.cell_size * self.fine_factor as f64
    }
}

/// One in-situ SM observation at a fine pixel (row-major index).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsituObs {
    pub pixel: usize,
    pub value: f64,
}

/// Everything observed (and the truth) for one day.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub day: u32,
    pub seed: u64,
    /// Fine-scale inputs (noisy, except land cover).
    pub lai: Grid,
    pub lst: Grid,
    pub ppt: Grid,
    pub lc: Grid,
    /// Coarse SM as observed (noisy).
    pub coarse_sm: Grid,
    /// Coarse SM before noise injection.
    pub coarse_sm_clean: Grid,
    /// Fine SM truth.
    pub true_sm: Grid,
    pub insitu: Vec<InsituObs>,
}

impl Scene {
    pub fn n_pixels(&self) -> usize {
        self.true_sm.len()
    }

    /// Fine pixels per coarse pixel along one axis.
    pub fn coarse_factor(&self) -> usize {
        self.true_sm.rows() / self.coarse_sm.rows().max(1)
    }

    pub fn validate(&self) -> Result<()> {
        for g in [&self.lai, &self.lst, &self.ppt, &self.lc] {
            if !g.same_shape(&self.true_sm) {
                return Err(Error::Schema("fine grids of a scene must share dimensions".into()));
            }
        }
        let f = self.coarse_factor();
        if f == 0
            || self.coarse_sm.rows() * f != self.true_sm.rows()
            || self.coarse_sm.cols() * f != self.true_sm.cols()
            || !self.coarse_sm.same_shape(&self.coarse_sm_clean)
        {
            return Err(Error::Schema("coarse grid does not tile the fine grid".into()));
        }
        if let Some(o) = self.insitu.iter().find(|o| o.pixel >= self.n_pixels()) {
            return Err(Error::Schema(format!("in-situ pixel {} out of range", o.pixel)));
        }
        Ok(())
    }
}

/// Static part of the region: patches, their crops, and soil texture.
#[derive(Debug, Clone)]
struct FieldLayout {
    patch: Vec<u32>,
    kind: Vec<Option<Crop>>,
    vigor: Vec<f64>,
    soil: Vec<f64>,
    lai_texture: Vec<f64>,
}

impl FieldLayout {
    fn new(spec: &SceneSpec) -> FieldLayout {
        let n = spec.region_cells;
        let mut rng = seed::rng(spec.layout_seed, &[stream::LAYOUT]);
        let patch = voronoi_patches(&mut rng, n, n, spec.n_fields);
        let n_patches = spec.n_fields.max(1);
        let mut order: Vec<usize> = (0..n_patches).collect();
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let n_corn = (spec.corn_share * n_patches as f64).round() as usize;
        let n_cotton = (spec.cotton_share * n_patches as f64).round() as usize;
        let mut kind = vec![None; n_patches];
        for (rank, &p) in order.iter().enumerate() {
            kind[p] = if rank < n_corn {
                Some(Crop::Corn)
            } else if rank < n_corn + n_cotton {
                Some(Crop::Cotton)
            } else {
                None
            };
        }
        let vigor = (0..n_patches).map(|_| 0.85 + 0.3 * rng.random::<f64>()).collect();

        let fine = spec.fine_cells();
        let lattice = spec.fine_cell_size();
        let soil_lat = gaussian_field(&mut rng, fine, fine, spec.soil_corr_m / lattice);
        let soil = upsample_bilinear(&soil_lat, fine, fine, spec.fine_factor);
        let lai_texture = gaussian_field(&mut rng, n, n, 2.0);
        FieldLayout {
            patch,
            kind,
            vigor,
            soil,
            lai_texture,
        }
    }

    fn crop_at(&self, cell: usize) -> Option<Crop> {
        self.kind[self.patch[cell] as usize]
    }
}

/// Crop growth curve on the unit interval: zero at planting and harvest,
/// peak of one at `peak_at`.
fn phenology(t: f64, peak_at: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    let a = 2.0;
    let b = a * (1.0 - peak_at) / peak_at;
    (t / peak_at).powf(a) * ((1.0 - t) / (1.0 - peak_at)).powf(b)
}

/// Scene generator with the static layout computed once.
#[derive(Debug, Clone)]
pub struct SceneGenerator {
    spec: SceneSpec,
    calendar: CropCalendar,
    layout: FieldLayout,
}

const VAR_LST: u64 = 1;
const VAR_PPT: u64 = 2;
const VAR_SM: u64 = 3;
const VAR_LAI: u64 = 4;

impl SceneGenerator {
    pub fn new(spec: &SceneSpec, calendar: &CropCalendar) -> Result<SceneGenerator> {
        spec.validate()?;
        calendar.validate()?;
        Ok(SceneGenerator {
            spec: spec.clone(),
            calendar: calendar.clone(),
            layout: FieldLayout::new(spec),
        })
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    fn check_day(day: u32) -> Result<()> {
        if (1..=365).contains(&day) {
            Ok(())
        } else {
            Err(Error::Domain(format!("day of year {day} outside 1..=365")))
        }
    }

    fn cover_at(&self, cell: usize, day: i64) -> LandCover {
        match self.layout.crop_at(cell) {
            Some(c) if self.calendar.window(c, day).is_some() => c.into(),
            _ => LandCover::Bare,
        }
    }

    /// Land cover at the native resolution.
    pub fn landcover_native(&self, day: u32) -> Result<Grid> {
        Self::check_day(day)?;
        let n = self.spec.region_cells;
        let values = (0..n * n).map(|c| self.cover_at(c, day as i64).id() as f64).collect();
        Grid::new(n, n, self.spec.cell_size, VariableTag::Lc, values)
    }

    /// Land cover at 1 km (majority of the native cells).
    pub fn landcover(&self, day: u32) -> Result<Grid> {
        grid::aggregate(&self.landcover_native(day)?, self.spec.fine_factor)
    }

    fn lai_native(&self, day: i64) -> Vec<f64> {
        let r = &self.spec.response;
        (0..self.layout.patch.len())
            .map(|cell| {
                let Some(crop) = self.layout.crop_at(cell) else {
                    return 0.0;
                };
                let Some((p, h)) = self.calendar.window(crop, day) else {
                    return 0.0;
                };
                let peak = match crop {
                    Crop::Corn => r.corn_peak_lai,
                    Crop::Cotton => r.cotton_peak_lai,
                };
                let t = (day - p as i64) as f64 / (h - p) as f64;
                let vigor = self.layout.vigor[self.layout.patch[cell] as usize];
                (peak * vigor * phenology(t, r.lai_peak_at) * (1.0 + r.lai_texture * self.layout.lai_texture[cell]))
                    .max(0.0)
            })
            .collect()
    }

    /// Daily water input (rain + irrigation, mm) at the native resolution.
    fn water_input(&self, seed: u64, day: i64) -> Vec<f64> {
        let s = &self.spec;
        let r = &s.response;
        let n = s.region_cells;
        let mut rng = seed::rng(seed, &[stream::RAIN, day as u64]);
        let season = (2.0 * PI * (day as f64 - 200.0) / 365.0).cos();
        let p_rain = (r.rain_prob_mean + r.rain_prob_amp * season).clamp(0.0, 1.0);
        let mut water = if rng.random::<f64>() < p_rain {
            let amount = Exp::new(1.0 / r.rain_mean_mm).map(|d| d.sample(&mut rng)).unwrap_or(0.0);
            let fine = s.fine_cells();
            let pattern = gaussian_field(&mut rng, fine, fine, s.rain_corr_m / s.fine_cell_size());
            upsample_bilinear(&pattern, fine, fine, s.fine_factor)
                .into_iter()
                .map(|g| amount * (1.0 + r.rain_pattern_amp * g).clamp(0.0, 3.0))
                .collect()
        } else {
            vec![0.0; n * n]
        };
        if r.irrigation_interval > 0 && r.irrigation_mm > 0.0 {
            for (cell, w) in water.iter_mut().enumerate() {
                let patch = self.layout.patch[cell] as i64;
                if let Some(crop) = self.layout.crop_at(cell) {
                    if self.calendar.window(crop, day).is_some()
                        && (day + patch).rem_euclid(r.irrigation_interval as i64) == 0
                    {
                        *w += r.irrigation_mm;
                    }
                }
            }
        }
        water
    }

    fn surface_field(&self, seed: u64, day: u32, which: u64) -> Vec<f64> {
        let s = &self.spec;
        let fine = s.fine_cells();
        let mut rng = seed::rng(seed, &[stream::FIELD, day as u64, which]);
        let lat = gaussian_field(&mut rng, fine, fine, s.surface_corr_m / s.fine_cell_size());
        upsample_bilinear(&lat, fine, fine, s.fine_factor)
    }

    pub fn scene(&self, day: u32, seed: u64) -> Result<Scene> {
        Self::check_day(day)?;
        let s = &self.spec;
        let r = &s.response;
        let d = day as i64;
        let n = s.region_cells;
        let cells = n * n;

        let mut api = vec![0.0; cells];
        let mut ppt3 = vec![0.0; cells];
        for lag in 0..r.api_window_days.max(3) as i64 {
            let w = self.water_input(seed, d - lag);
            if lag < 3 {
                ppt3.iter_mut().zip(&w).for_each(|(p, x)| *p += x);
            }
            if lag < r.api_window_days as i64 {
                let decay = (-(lag as f64) / r.api_decay_days).exp();
                api.iter_mut().zip(&w).for_each(|(a, x)| *a += decay * x);
            }
        }

        let lai = self.lai_native(d);
        let micro_sm = self.surface_field(seed, day, 0);
        let micro_lst = self.surface_field(seed, day, 1);
        let doy = day as f64;
        let base = r.sm_base + r.sm_seasonal * (2.0 * PI * (doy - 15.0) / 365.0).cos();
        let t_air = r.lst_mean + r.lst_seasonal * (2.0 * PI * (doy - 110.0) / 365.0).sin();

        let sm: Vec<f64> = (0..cells)
            .map(|c| {
                let wet = 1.0 - (-api[c] / r.api_scale_mm).exp();
                (base + r.wet_gain * wet - r.veg_drawdown * lai[c]
                    + r.soil_amp * self.layout.soil[c]
                    + r.micro_amp * micro_sm[c])
                    .clamp(s.sm_min, s.sm_max)
            })
            .collect();
        let lst: Vec<f64> = (0..cells)
            .map(|c| t_air + r.lst_sm_coef * (r.lst_sm_ref - sm[c]) - r.lst_lai_coef * lai[c] + r.lst_micro * micro_lst[c])
            .collect();

        let native = |tag, values| Grid::new(n, n, s.cell_size, tag, values);
        let ff = s.fine_factor;
        let lai_1km = grid::aggregate(&native(VariableTag::Lai, lai)?, ff)?;
        let lst_1km = grid::aggregate(&native(VariableTag::Lst, lst)?, ff)?;
        let ppt_1km = grid::aggregate(&native(VariableTag::Ppt, ppt3)?, ff)?;
        let true_sm = grid::aggregate(&native(VariableTag::Sm, sm)?, ff)?;
        let lc = self.landcover(day)?;
        let coarse_sm_clean = grid::aggregate(&true_sm, s.coarse_factor)?;

        let noise_seed = |var| seed::derive(seed, &[stream::NOISE, day as u64, var]);
        let lai = grid::add_noise(&lai_1km, s.noise.lai, noise_seed(VAR_LAI))?;
        let lst = grid::add_noise(&lst_1km, s.noise.lst, noise_seed(VAR_LST))?;
        let ppt = grid::add_noise(&ppt_1km, s.noise.ppt, noise_seed(VAR_PPT))?;
        let coarse_sm = grid::add_noise(&coarse_sm_clean, s.noise.sm, noise_seed(VAR_SM))?;

        let insitu = self.insitu_pixels(seed)
            .into_iter()
            .map(|pixel| InsituObs {
                pixel,
                value: true_sm.values()[pixel],
            })
            .collect();

        let scene = Scene {
            day,
            seed,
            lai,
            lst,
            ppt,
            lc,
            coarse_sm,
            coarse_sm_clean,
            true_sm,
            insitu,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// In-situ station pixels; fixed for the whole season.
    pub fn insitu_pixels(&self, seed: u64) -> Vec<usize> {
        let n = self.spec.fine_cells().pow(2);
        let k = ((self.spec.insitu_fraction * n as f64).round() as usize).clamp(1, n);
        let mut rng = seed::rng(seed, &[stream::INSITU]);
        let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
        idx.sort_unstable();
        idx
    }

    pub fn season(&self, seed: u64) -> Result<Vec<Scene>> {
        season_days().into_iter().map(|d| self.scene(d, seed)).collect()
    }
}

/// Scene days: every third day of the year starting at day 1 (122 days).
pub fn season_days() -> Vec<u32> {
    (1..=365).step_by(3).collect()
}

/// Map requested days of year onto the nearest scene days (ties go to the
/// later day), deduplicated, in ascending order.
pub fn nearest_season_days(requested: &[u32]) -> Vec<u32> {
    let days = season_days();
    let mut out: Vec<u32> = requested
        .iter()
        .map(|&r| {
            *days
                .iter()
                .min_by_key(|&&d| ((d as i64 - r as i64).abs(), std::cmp::Reverse(d)))
                .expect("season has days")
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn generate_landcover(spec: &SceneSpec, calendar: &CropCalendar, day: u32) -> Result<Grid> {
    SceneGenerator::new(spec, calendar)?.landcover(day)
}

pub fn generate_scene(spec: &SceneSpec, calendar: &CropCalendar, day: u32, seed: u64) -> Result<Scene> {
    SceneGenerator::new(spec, calendar)?.scene(day, seed)
}

pub fn generate_season(spec: &SceneSpec, calendar: &CropCalendar, seed: u64) -> Result<Vec<Scene>> {
    SceneGenerator::new(spec, calendar)?.season(seed)
}
