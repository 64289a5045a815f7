//! On-disk synthetic seasons: one directory per scene day holding
//! `doy{DDD}_{var}_{res}.grid` files, plus `manifest.toml` at the root.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, VariableTag};
use crate::synth::{self, CropCalendar, InsituObs, Scene, SceneGenerator, SceneSpec};

pub const MANIFEST: &str = "manifest.toml";
pub const FORMAT_VERSION: u32 = 1;

/// What a dataset directory contains and how it was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: u32,
    pub seed: u64,
    pub days: Vec<u32>,
    pub synth: SceneSpec,
    pub calendar: CropCalendar,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Manifest = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        if m.format != FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported dataset format {}", m.format)));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).expect("manifest serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// `1km`, `10km`, `200m`.
pub fn resolution_label(meters: f64) -> String {
    if meters >= 1000.0 && (meters / 1000.0).fract() == 0.0 {
        format!("{}km", meters / 1000.0)
    } else {
        format!("{meters}m")
    }
}

pub fn scene_dir(root: &Path, day: u32) -> PathBuf {
    root.join(format!("doy{day:03}"))
}

pub fn grid_name(day: u32, var: &str, res: &str) -> String {
    format!("doy{day:03}_{var}_{res}.grid")
}

struct Layout {
    fine: String,
    coarse: String,
}

impl Layout {
    fn new(spec: &SceneSpec) -> Layout {
        let fine = spec.fine_cell_size();
        Layout {
            fine: resolution_label(fine),
            coarse: resolution_label(fine * spec.coarse_factor as f64),
        }
    }
}

fn save_in(dir: &Path, day: u32, var: &str, res: &str, g: &Grid) -> Result<()> {
    g.save(&dir.join(grid_name(day, var, res)))
}

pub fn write_scene(root: &Path, spec: &SceneSpec, scene: &Scene) -> Result<()> {
    let dir = scene_dir(root, scene.day);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let l = Layout::new(spec);
    let d = scene.day;
    save_in(&dir, d, "lai", &l.fine, &scene.lai)?;
    save_in(&dir, d, "lst", &l.fine, &scene.lst)?;
    save_in(&dir, d, "ppt", &l.fine, &scene.ppt)?;
    save_in(&dir, d, "lc", &l.fine, &scene.lc)?;
    save_in(&dir, d, "smtrue", &l.fine, &scene.true_sm)?;
    save_in(&dir, d, "sm", &l.coarse, &scene.coarse_sm)?;
    save_in(&dir, d, "smtrue", &l.coarse, &scene.coarse_sm_clean)?;
    let mut insitu = vec![f64::NAN; scene.n_pixels()];
    for o in &scene.insitu {
        insitu[o.pixel] = o.value;
    }
    let g = Grid::new(scene.true_sm.rows(), scene.true_sm.cols(), scene.true_sm.cell_size(), VariableTag::Sm, insitu)?;
    save_in(&dir, d, "insitu", &l.fine, &g)
}

pub fn read_scene(root: &Path, spec: &SceneSpec, day: u32, seed: u64) -> Result<Scene> {
    let dir = scene_dir(root, day);
    let l = Layout::new(spec);
    let load = |var: &str, res: &str, tag: VariableTag| -> Result<Grid> {
        let path = dir.join(grid_name(day, var, res));
        let g = Grid::load(&path)?;
        if g.tag() != tag {
            return Err(Error::Schema(format!("{}: expected {tag}, found {}", path.display(), g.tag())));
        }
        Ok(g)
    };
    let insitu = load("insitu", &l.fine, VariableTag::Sm)?
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .map(|(pixel, &value)| InsituObs { pixel, value })
        .collect();
    let scene = Scene {
        day,
        seed,
        lai: load("lai", &l.fine, VariableTag::Lai)?,
        lst: load("lst", &l.fine, VariableTag::Lst)?,
        ppt: load("ppt", &l.fine, VariableTag::Ppt)?,
        lc: load("lc", &l.fine, VariableTag::Lc)?,
        coarse_sm: load("sm", &l.coarse, VariableTag::Sm)?,
        coarse_sm_clean: load("smtrue", &l.coarse, VariableTag::Sm)?,
        true_sm: load("smtrue", &l.fine, VariableTag::Sm)?,
        insitu,
    };
    scene.validate()?;
    Ok(scene)
}

/// Days to process: the whole season, or the scene days nearest to the
/// requested ones.
pub fn select_days(requested: &[u32]) -> Vec<u32> {
    if requested.is_empty() {
        synth::season_days()
    } else {
        synth::nearest_season_days(requested)
    }
}

/// Generate and write a season; returns its manifest.
pub fn write_dataset(root: &Path, spec: &SceneSpec, calendar: &CropCalendar, seed: u64, days: &[u32]) -> Result<Manifest> {
    let generator = SceneGenerator::new(spec, calendar)?;
    std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    crate::par::map(days, |&day| generator.scene(day, seed).and_then(|s| write_scene(root, spec, &s)))
        .into_iter()
        .collect::<Result<Vec<()>>>()?;
    let manifest = Manifest {
        format: FORMAT_VERSION,
        seed,
        days: days.to_vec(),
        synth: spec.clone(),
        calendar: calendar.clone(),
    };
    manifest.save(&root.join(MANIFEST))?;
    Ok(manifest)
}

/// Scenes read from disk or generated on demand.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Dataset {
    Directory { root: PathBuf, manifest: Manifest },
    Synthetic { generator: SceneGenerator, manifest: Manifest },
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Dataset> {
        let manifest = Manifest::load(&root.join(MANIFEST))?;
        Ok(Dataset::Directory {
            root: root.to_path_buf(),
            manifest,
        })
    }

    pub fn synthetic(spec: &SceneSpec, calendar: &CropCalendar, seed: u64, days: &[u32]) -> Result<Dataset> {
        Ok(Dataset::Synthetic {
            generator: SceneGenerator::new(spec, calendar)?,
            manifest: Manifest {
                format: FORMAT_VERSION,
                seed,
                days: days.to_vec(),
                synth: spec.clone(),
                calendar: calendar.clone(),
            },
        })
    }

    pub fn manifest(&self) -> &Manifest {
        match self {
            Dataset::Directory { manifest, .. } | Dataset::Synthetic { manifest, .. } => manifest,
        }
    }

    pub fn scene(&self, day: u32) -> Result<Scene> {
        let m = self.manifest();
        if !m.days.contains(&day) {
            return Err(Error::Domain(format!("day {day} is not part of the dataset")));
        }
        match self {
            Dataset::Directory { root, manifest } => read_scene(root, &manifest.synth, day, manifest.seed),
            Dataset::Synthetic { generator, manifest } => generator.scene(day, manifest.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SceneSpec {
        SceneSpec {
            region_cells: 100,
            n_fields: 12,
            ..SceneSpec::default()
        }
    }

    #[test]
    fn labels() {
        assert_eq!(resolution_label(1000.0), "1km");
        assert_eq!(resolution_label(10000.0), "10km");
        assert_eq!(resolution_label(200.0), "200m");
        assert_eq!(grid_name(7, "sm", "10km"), "doy007_sm_10km.grid");
    }

    #[test]
    fn scene_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small();
        let m = write_dataset(dir.path(), &spec, &CropCalendar::default(), 5, &[136]).unwrap();
        assert!(dir.path().join("doy136").join("doy136_sm_10km.grid").exists());
        let disk = Dataset::open(dir.path()).unwrap();
        assert_eq!(disk.manifest(), &m);
        let mem = Dataset::synthetic(&spec, &CropCalendar::default(), 5, &[136]).unwrap();
        assert_eq!(disk.scene(136).unwrap(), mem.scene(136).unwrap());
        assert!(disk.scene(139).is_err());
    }

    #[test]
    fn day_selection() {
        assert_eq!(select_days(&[]).len(), 122);
        assert_eq!(select_days(&[39, 135, 156, 222, 354]), vec![40, 136, 157, 223, 355]);
    }
}
