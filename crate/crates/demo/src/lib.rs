//! Browser demo: generate a small synthetic day, cluster it, and
//! disaggregate the coarse soil moisture with SRRM or PRI.

use soilscale::grid::Grid;
use soilscale::itclust::{self, ClusterParams};
use soilscale::metrics;
use soilscale::pri::{self, PriConfig};
use soilscale::srrm::{self, DayParams, SrrmConfig};
use soilscale::synth::{CropCalendar, Scene, SceneGenerator, SceneSpec};
use wasm_bindgen::prelude::*;

fn spec() -> SceneSpec {
    SceneSpec {
        region_cells: 200,
        fine_factor: 5,
        coarse_factor: 5,
        n_fields: 30,
        ..SceneSpec::default()
    }
}

fn err(e: soilscale::Error) -> String {
    e.to_string()
}

/// One synthetic day at 40 x 40 fine pixels over an 8 x 8 coarse grid.
#[wasm_bindgen]
pub struct DemoScene {
    scene: Scene,
}

#[wasm_bindgen]
impl DemoScene {
    #[wasm_bindgen(constructor)]
    pub fn new(day: u32, seed: u32) -> Result<DemoScene, String> {
        let generator = SceneGenerator::new(&spec(), &CropCalendar::default()).map_err(err)?;
        let scene = generator.scene(day, seed as u64).map_err(err)?;
        Ok(DemoScene { scene })
    }

    pub fn rows(&self) -> usize {
        self.scene.true_sm.rows()
    }

    pub fn cols(&self) -> usize {
        self.scene.true_sm.cols()
    }

    pub fn day(&self) -> u32 {
        self.scene.day
    }

    /// Fine-grid layer by name: `lst`, `lai`, `ppt`, `lc`, `truth`,
    /// `coarse` (replicated to the fine grid) or `insitu` (NaN elsewhere).
    pub fn layer(&self, name: &str) -> Result<Vec<f64>, String> {
        let s = &self.scene;
        let grid: &Grid = match name {
            "lst" => &s.lst,
            "lai" => &s.lai,
            "ppt" => &s.ppt,
            "lc" => &s.lc,
            "truth" => &s.true_sm,
            "coarse" => {
                let g = soilscale::grid::replicate(&s.coarse_sm, s.coarse_factor()).map_err(err)?;
                return Ok(g.into_values());
            }
            "insitu" => {
                let mut v = vec![f64::NAN; s.n_pixels()];
                for o in &s.insitu {
                    v[o.pixel] = o.value;
                }
                return Ok(v);
            }
            other => return Err(format!("unknown layer '{other}'")),
        };
        Ok(grid.values().to_vec())
    }

    /// Hard cluster labels of the fine pixels.
    pub fn cluster(&self, k: usize, psi: f64, seed: u32) -> Result<Vec<u32>, String> {
        let features = srrm::build_features(&self.scene).map_err(err)?;
        let params = ClusterParams {
            k,
            psi,
            seed: seed as u64,
            ..ClusterParams::default()
        };
        let m = itclust::cluster(&features.cluster, &params).map_err(err)?;
        Ok(m.labels().into_iter().map(|l| l as u32).collect())
    }

    /// SRRM estimate for fixed hyper-parameters.
    pub fn srrm(&self, k: usize, psi: f64, mu: f64, seed: u32) -> Result<Vec<f64>, String> {
        let params = DayParams { k, psi, mu };
        let sm = srrm::disaggregate_day(&self.scene, params, &SrrmConfig::default(), seed as u64).map_err(err)?;
        Ok(sm.into_values())
    }

    /// PRI estimate with the given trade-off weight.
    pub fn pri(&self, beta: f64, iterations: usize) -> Result<Vec<f64>, String> {
        let cfg = PriConfig {
            beta,
            iterations,
            ..PriConfig::default()
        };
        Ok(pri::run_day(&self.scene, &cfg).map_err(err)?.sm.into_values())
    }

    /// RMSE of a fine-grid estimate against the truth.
    pub fn rmse(&self, estimate: Vec<f64>) -> Result<f64, String> {
        let t = &self.scene.true_sm;
        let est = Grid::new(t.rows(), t.cols(), t.cell_size(), t.tag(), estimate).map_err(err)?;
        metrics::rmse(&est, t, None).map_err(err)
    }
}
