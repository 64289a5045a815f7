#![allow(dead_code)]

pub mod oracles;

use soilscale::grid::{self, Grid, VariableTag};
use soilscale::synth::{InsituObs, Scene};

/// Scene on a `side × side` fine grid with coarse blocks of `factor` pixels,
/// built from per-pixel closures `(row, col) -> value`. In-situ pixels are
/// every `stride`-th pixel.
pub fn scene(
    side: usize,
    factor: usize,
    lst: impl Fn(usize, usize) -> f64,
    lai: impl Fn(usize, usize) -> f64,
    lc: impl Fn(usize, usize) -> f64,
    sm: impl Fn(usize, usize) -> f64,
    stride: usize,
) -> Scene {
    let make = |tag, f: &dyn Fn(usize, usize) -> f64| {
        let v = (0..side * side).map(|i| f(i / side, i % side)).collect();
        Grid::new(side, side, 1000.0, tag, v).unwrap()
    };
    let true_sm = make(VariableTag::Sm, &sm);
    let coarse = grid::aggregate(&true_sm, factor).unwrap();
    let insitu = (0..side * side)
        .step_by(stride)
        .map(|pixel| InsituObs {
            pixel,
            value: true_sm.values()[pixel],
        })
        .collect();
    Scene {
        day: 100,
        seed: 1,
        lai: make(VariableTag::Lai, &lai),
        lst: make(VariableTag::Lst, &lst),
        ppt: make(VariableTag::Ppt, &|_, _| 2.0),
        lc: make(VariableTag::Lc, &lc),
        coarse_sm: coarse.clone(),
        coarse_sm_clean: coarse,
        true_sm,
        insitu,
    }
}

/// Smooth, non-separable LST pattern.
pub fn lst_pattern(r: usize, c: usize) -> f64 {
    295.0 + 6.0 * (r as f64 * 0.31).sin() + 4.0 * (c as f64 * 0.23 + r as f64 * 0.05).cos()
}
