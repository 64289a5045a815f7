//! Smooth random fields and patch layouts used by the scene generator.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Standardized Gaussian random field on a `rows`×`cols` lattice.
///
/// White noise is smoothed with a separable Gaussian filter of standard
/// deviation `corr_cells` (in lattice cells), then rescaled to zero mean and
/// unit variance. Boundaries are handled by generating on a padded lattice.
pub fn gaussian_field<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, corr_cells: f64) -> Vec<f64> {
    let radius = (3.0 * corr_cells).ceil().max(1.0) as usize;
    let (pr, pc) = (rows + 2 * radius, cols + 2 * radius);
    let noise: Vec<f64> = (0..pr * pc).map(|_| StandardNormal.sample(rng)).collect();
    if corr_cells <= 0.0 {
        return standardize(crop(&noise, pc, radius, rows, cols));
    }
    let kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-0.5 * x * x / (corr_cells * corr_cells)).exp()
        })
        .collect();

    // rows pass: each output column j in [radius, pc - radius)
    let mut tmp = vec![0.0; pr * cols];
    for i in 0..pr {
        let src = &noise[i * pc..(i + 1) * pc];
        for j in 0..cols {
            let window = &src[j..j + kernel.len()];
            tmp[i * cols + j] = window.iter().zip(&kernel).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for (k, w) in kernel.iter().enumerate() {
            let src = &tmp[(i + k) * cols..(i + k + 1) * cols];
            for (o, s) in out[i * cols..(i + 1) * cols].iter_mut().zip(src) {
                *o += w * s;
            }
        }
    }
    standardize(out)
}

fn crop(v: &[f64], stride: usize, pad: usize, rows: usize, cols: usize) -> Vec<f64> {
    (0..rows)
        .flat_map(|i| v[(i + pad) * stride + pad..(i + pad) * stride + pad + cols].to_vec())
        .collect()
}

fn standardize(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let sd = if sd > 0.0 { sd } else { 1.0 };
    v.iter_mut().for_each(|x| *x = (*x - mean) / sd);
    v
}

/// Bilinear resampling of a lattice field onto a finer grid covering the
/// same extent (`factor` fine cells per lattice cell, cell-centre aligned).
pub fn upsample_bilinear(src: &[f64], rows: usize, cols: usize, factor: usize) -> Vec<f64> {
    let (fr, fc) = (rows * factor, cols * factor);
    let coord = |i: usize, n: usize| {
        let x = ((i as f64 + 0.5) / factor as f64 - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = (x.floor() as usize).min(n.saturating_sub(2));
        (i0, x - i0 as f64)
    };
    let mut out = Vec::with_capacity(fr * fc);
    for i in 0..fr {
        let (r0, tr) = coord(i, rows);
        let r1 = (r0 + 1).min(rows - 1);
        for j in 0..fc {
            let (c0, tc) = coord(j, cols);
            let c1 = (c0 + 1).min(cols - 1);
            let top = src[r0 * cols + c0] * (1.0 - tc) + src[r0 * cols + c1] * tc;
            let bot = src[r1 * cols + c0] * (1.0 - tc) + src[r1 * cols + c1] * tc;
            out.push(top * (1.0 - tr) + bot * tr);
        }
    }
    out
}

/// Voronoi partition of a `rows`×`cols` grid into `n_sites` contiguous patches.
/// Returns the patch index of every cell.
pub fn voronoi_patches<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, n_sites: usize) -> Vec<u32> {
    let sites: Vec<(f64, f64)> = (0..n_sites.max(1))
        .map(|_| (rng.random::<f64>() * rows as f64, rng.random::<f64>() * cols as f64))
        .collect();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let (y, x) = (i as f64 + 0.5, j as f64 + 0.5);
            let best = sites
                .iter()
                .enumerate()
                .map(|(k, &(sy, sx))| (k, (sy - y).powi(2) + (sx - x).powi(2)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(k, _)| k)
                .unwrap_or(0);
            out.push(best as u32);
        }
    }
    out
}
