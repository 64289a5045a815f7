//! Raster container with block aggregation, replication and noise injection.
//!
//! A [`Grid`] holds one variable at one resolution, row-major. The ASCII
//! format is
//!
//! ```text
//! rows cols cell_size TAG
//! v00 v01 ...
//! v10 v11 ...
//! ```
//!
//! with values written to 17 significant digits so that a write/read cycle
//! reproduces every bit. Missing values are written as `NaN`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::seed;

/// Physical variable stored in a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariableTag {
    /// Leaf area index (dimensionless).
    Lai,
    /// Land surface temperature (K).
    Lst,
    /// Precipitation plus irrigation (mm).
    Ppt,
    /// Volumetric soil moisture (m³/m³).
    Sm,
    /// Land-cover class id.
    Lc,
    /// Coordinates or other dimensionless helper fields.
    Coord,
}

impl VariableTag {
    pub fn as_str(self) -> &'static str {
        match self {
            VariableTag::Lai => "LAI",
            VariableTag::Lst => "LST",
            VariableTag::Ppt => "PPT",
            VariableTag::Sm => "SM",
            VariableTag::Lc => "LC",
            VariableTag::Coord => "COORD",
        }
    }
}

impl std::fmt::Display for VariableTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariableTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "LAI" => VariableTag::Lai,
            "LST" => VariableTag::Lst,
            "PPT" => VariableTag::Ppt,
            "SM" => VariableTag::Sm,
            "LC" => VariableTag::Lc,
            "COORD" => VariableTag::Coord,
            other => return Err(Error::Schema(format!("unknown variable tag `{other}`"))),
        })
    }
}

/// How a block of fine cells collapses into one coarse cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateMode {
    /// Arithmetic mean.
    Mean,
    /// Modal class, ties to the smallest class id.
    Majority,
}

/// A 2-D raster of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    cell_size: f64,
    tag: VariableTag,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(
        rows: usize,
        cols: usize,
        cell_size: f64,
        tag: VariableTag,
        values: Vec<f64>,
    ) -> Result<Self> {
        if rows.checked_mul(cols) != Some(values.len()) {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} grid needs {} values, got {}",
                rows.saturating_mul(cols),
                values.len()
            )));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::Domain(format!("cell size must be positive, got {cell_size}")));
        }
        match tag {
            VariableTag::Sm => {
                if let Some(v) = values.iter().find(|v| v.is_finite() && !(0.0..=1.0).contains(*v)) {
                    return Err(Error::Domain(format!("soil moisture {v} outside [0, 1]")));
                }
            }
            VariableTag::Lc => {
                if let Some(v) = values
                    .iter()
                    .find(|v| !v.is_nan() && (v.fract() != 0.0 || **v < 0.0))
                {
                    return Err(Error::Domain(format!("land-cover value {v} is not a class id")));
                }
            }
            _ => {}
        }
        Ok(Grid {
            rows,
            cols,
            cell_size,
            tag,
            values,
        })
    }

    pub fn filled(rows: usize, cols: usize, cell_size: f64, tag: VariableTag, value: f64) -> Result<Self> {
        Grid::new(rows, cols, cell_size, tag, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn tag(&self) -> VariableTag {
        self.tag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// Mean over all cells (NaN propagates).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Copy with a different tag, re-checking the tag's invariants.
    pub fn retag(&self, tag: VariableTag) -> Result<Grid> {
        Grid::new(self.rows, self.cols, self.cell_size, tag, self.values.clone())
    }

    /// Copy with every value passed through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Grid> {
        Grid::new(
            self.rows,
            self.cols,
            self.cell_size,
            self.tag,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24 + 32);
        let _ = writeln!(out, "{} {} {} {}", self.rows, self.cols, self.cell_size, self.tag);
        for row in self.values.chunks(self.cols.max(1)) {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                if v.is_nan() {
                    out.push_str("NaN");
                } else {
                    let _ = write!(out, "{v:.16e}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_ascii(text: &str, path: &Path) -> Result<Grid> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty grid file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(hline + 1, "header must be `rows cols cell_size tag`".into()));
        }
        let rows: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(hline + 1, format!("rows: {e}")))?;
        let cols: usize = fields[1]
            .parse()
            .map_err(|e| parse_err(hline + 1, format!("cols: {e}")))?;
        let cell_size: f64 = fields[2]
            .parse()
            .map_err(|e| parse_err(hline + 1, format!("cell_size: {e}")))?;
        let tag: VariableTag = fields[3]
            .parse()
            .map_err(|e: Error| parse_err(hline + 1, e.to_string()))?;
        let mut values = Vec::with_capacity(rows * cols);
        let mut seen_rows = 0;
        for (idx, line) in lines {
            let before = values.len();
            for tok in line.split_whitespace() {
                let v = if tok == "NaN" {
                    f64::NAN
                } else {
                    tok.parse::<f64>()
                        .map_err(|e| parse_err(idx + 1, format!("value `{tok}`: {e}")))?
                };
                values.push(v);
            }
            if values.len() - before != cols {
                return Err(parse_err(
                    idx + 1,
                    format!("expected {cols} values, found {}", values.len() - before),
                ));
            }
            seen_rows += 1;
        }
        if seen_rows != rows {
            return Err(parse_err(text.lines().count(), format!("expected {rows} rows, found {seen_rows}")));
        }
        Grid::new(rows, cols, cell_size, tag, values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ascii()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Grid> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Grid::from_ascii(&text, path)
    }
}

/// Block-aggregate with the mode implied by the tag: majority for land
/// cover, mean for everything else.
pub fn aggregate(fine: &Grid, factor: usize) -> Result<Grid> {
    let mode = if fine.tag == VariableTag::Lc {
        AggregateMode::Majority
    } else {
        AggregateMode::Mean
    };
    aggregate_with(fine, factor, mode)
}

pub fn aggregate_with(fine: &Grid, factor: usize, mode: AggregateMode) -> Result<Grid> {
    if fine.is_empty() {
        return Err(Error::Domain("cannot aggregate an empty grid".into()));
    }
    if factor == 0 {
        return Err(Error::Domain("aggregation factor must be positive".into()));
    }
    if !fine.rows.is_multiple_of(factor) || !fine.cols.is_multiple_of(factor) {
        return Err(Error::Dimension(format!(
            "{}x{} grid is not divisible by factor {factor}",
            fine.rows, fine.cols
        )));
    }
    let (rows, cols) = (fine.rows / factor, fine.cols / factor);
    let mut values = Vec::with_capacity(rows * cols);
    let mut block = Vec::with_capacity(factor * factor);
    for r in 0..rows {
        for c in 0..cols {
            block.clear();
            for i in r * factor..(r + 1) * factor {
                let start = i * fine.cols + c * factor;
                block.extend_from_slice(&fine.values[start..start + factor]);
            }
            values.push(match mode {
                AggregateMode::Mean => block_mean(&block),
                AggregateMode::Majority => majority(&mut block),
            });
        }
    }
    Grid::new(rows, cols, fine.cell_size * factor as f64, fine.tag, values)
}

fn block_mean(block: &[f64]) -> f64 {
    let first = block[0];
    // a constant block must come back bit-identical
    if block.iter().all(|&v| v == first) {
        return first;
    }
    block.iter().sum::<f64>() / block.len() as f64
}

fn majority(block: &mut [f64]) -> f64 {
    block.sort_by(f64::total_cmp);
    let (mut best, mut best_count) = (block[0], 0usize);
    let mut i = 0;
    while i < block.len() {
        let v = block[i];
        let run = block[i..].iter().take_while(|&&x| x == v).count();
        // sorted ascending, so strict > keeps the smallest id on ties
        if run > best_count {
            best = v;
            best_count = run;
        }
        i += run;
    }
    best
}

/// Copy every coarse value into its `factor`×`factor` fine block.
pub fn replicate(coarse: &Grid, factor: usize) -> Result<Grid> {
    if factor == 0 {
        return Err(Error::Domain("replication factor must be positive".into()));
    }
    let (rows, cols) = (coarse.rows * factor, coarse.cols * factor);
    let mut values = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let src = &coarse.values[(i / factor) * coarse.cols..(i / factor + 1) * coarse.cols];
        for j in 0..cols {
            values.push(src[j / factor]);
        }
    }
    Grid::new(rows, cols, coarse.cell_size / factor as f64, coarse.tag, values)
}

/// Add i.i.d. zero-mean Gaussian noise, then clamp to the tag's physical
/// range (SM to [0, 1], PPT to ≥ 0).
pub fn add_noise(g: &Grid, sd: f64, seed: u64) -> Result<Grid> {
    if !(sd >= 0.0) || !sd.is_finite() {
        return Err(Error::Domain(format!("noise sd must be non-negative, got {sd}")));
    }
    if sd == 0.0 {
        return Ok(g.clone());
    }
    let normal = Normal::new(0.0, sd).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = seed::rng(seed, &[seed::stream::NOISE]);
    let values = g
        .values
        .iter()
        .map(|&v| {
            let noisy = v + normal.sample(&mut rng);
            match g.tag {
                VariableTag::Sm => noisy.clamp(0.0, 1.0),
                VariableTag::Ppt => noisy.max(0.0),
                _ => noisy,
            }
        })
        .collect();
    Grid::new(g.rows, g.cols, g.cell_size, g.tag, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_grid(rows: usize, cols: usize, seed: u64) -> Grid {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
        Grid::new(rows, cols, 1000.0, VariableTag::Lst, values).unwrap()
    }

    #[test]
    fn aggregate_block_mean() {
        let g = Grid::new(2, 2, 1.0, VariableTag::Lai, vec![1.0, 1.0, 3.0, 3.0]).unwrap();
        let a = aggregate(&g, 2).unwrap();
        assert_eq!(a.values(), &[2.0]);
        assert_eq!(a.cell_size(), 2.0);
    }

    #[test]
    fn aggregate_constant_is_constant() {
        let g = Grid::filled(12, 12, 200.0, VariableTag::Lst, 301.25).unwrap();
        for f in [1, 2, 3, 4, 6, 12] {
            let a = aggregate(&g, f).unwrap();
            assert!(a.values().iter().all(|&v| v == 301.25));
        }
    }

    #[test]
    fn aggregate_matches_brute_force_block_means() {
        let g = random_grid(10, 10, 3);
        let a = aggregate(&g, 5).unwrap();
        assert_eq!((a.rows(), a.cols()), (2, 2));
        for br in 0..2 {
            for bc in 0..2 {
                let mut s = 0.0;
                for i in 0..5 {
                    for j in 0..5 {
                        s += g.get(br * 5 + i, bc * 5 + j);
                    }
                }
                assert!((a.get(br, bc) - s / 25.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn aggregate_errors() {
        let g = random_grid(10, 10, 1);
        assert!(matches!(aggregate(&g, 3), Err(Error::Dimension(_))));
        assert!(matches!(aggregate(&g, 0), Err(Error::Domain(_))));
        let empty = Grid::new(0, 0, 1.0, VariableTag::Lst, vec![]).unwrap();
        assert!(matches!(aggregate(&empty, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn majority_ties_go_to_smallest_class() {
        let lc = Grid::new(2, 2, 200.0, VariableTag::Lc, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(aggregate(&lc, 2).unwrap().values(), &[1.0]);
        let lc = Grid::new(2, 2, 200.0, VariableTag::Lc, vec![2.0, 2.0, 0.0, 2.0]).unwrap();
        assert_eq!(aggregate(&lc, 2).unwrap().values(), &[2.0]);
    }

    #[test]
    fn replicate_small_cases() {
        let g = Grid::new(1, 1, 3000.0, VariableTag::Sm, vec![0.25]).unwrap();
        let r = replicate(&g, 3).unwrap();
        assert_eq!((r.rows(), r.cols()), (3, 3));
        assert!(r.values().iter().all(|&v| v == 0.25));
        assert_eq!(r.cell_size(), 1000.0);
        assert!(matches!(replicate(&g, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn replicate_matches_index_arithmetic() {
        let g = random_grid(2, 2, 11);
        let r = replicate(&g, 5).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(r.get(i, j), g.values()[(i / 5) * 2 + j / 5]);
            }
        }
    }

    #[test]
    fn noise_zero_sd_is_identity() {
        let g = random_grid(7, 9, 5);
        assert_eq!(add_noise(&g, 0.0, 99).unwrap(), g);
        assert!(matches!(add_noise(&g, -0.1, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn noise_moments() {
        let g = Grid::filled(100, 100, 1000.0, VariableTag::Sm, 0.3).unwrap();
        let n = add_noise(&g, 0.03, 1234).unwrap();
        let d: Vec<f64> = n.values().iter().zip(g.values()).map(|(a, b)| a - b).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt();
        assert!(mean.abs() < 3.0 * 0.03 / 100.0, "mean {mean}");
        assert!((sd - 0.03).abs() < 0.003, "sd {sd}");
    }

    #[test]
    fn noise_clamps_physical_ranges() {
        let sm = Grid::filled(50, 50, 1000.0, VariableTag::Sm, 0.01).unwrap();
        let n = add_noise(&sm, 0.5, 3).unwrap();
        assert!(n.values().iter().all(|v| (0.0..=1.0).contains(v)));
        let ppt = Grid::filled(50, 50, 1000.0, VariableTag::Ppt, 0.2).unwrap();
        let n = add_noise(&ppt, 1.0, 3).unwrap();
        assert!(n.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn noise_is_reproducible() {
        let g = random_grid(20, 20, 8);
        assert_eq!(add_noise(&g, 5.0, 77).unwrap(), add_noise(&g, 5.0, 77).unwrap());
        assert_ne!(add_noise(&g, 5.0, 77).unwrap(), add_noise(&g, 5.0, 78).unwrap());
    }

    #[test]
    fn invariants_rejected() {
        assert!(matches!(
            Grid::new(2, 2, 1.0, VariableTag::Lst, vec![0.0; 3]),
            Err(Error::Dimension(_))
        ));
        assert!(Grid::new(1, 1, 0.0, VariableTag::Lst, vec![0.0]).is_err());
        assert!(Grid::new(1, 1, 1.0, VariableTag::Sm, vec![1.5]).is_err());
        assert!(Grid::new(1, 1, 1.0, VariableTag::Sm, vec![f64::NAN]).is_ok());
        assert!(Grid::new(1, 1, 1.0, VariableTag::Lc, vec![1.5]).is_err());
    }

    #[test]
    fn ascii_round_trip_with_nan() {
        let mut g = random_grid(3, 4, 21);
        let mut v = g.clone().into_values();
        v[5] = f64::NAN;
        v[0] = -1.0e-300;
        g = Grid::new(3, 4, 1000.0, VariableTag::Lst, v).unwrap();
        let back = Grid::from_ascii(&g.to_ascii(), Path::new("mem")).unwrap();
        for (a, b) in g.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.tag(), VariableTag::Lst);
    }

    #[test]
    fn ascii_errors_carry_line() {
        let err = Grid::from_ascii("2 2 1 SM\n0.1 0.2\n0.3\n", Path::new("x.grid")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn block_mean_conserves_mass(rows in 1usize..5, cols in 1usize..5, f in 1usize..5, seed in 0u64..1000) {
            let g = random_grid(rows * f, cols * f, seed);
            let a = aggregate(&g, f).unwrap();
            prop_assert!((a.mean() - g.mean()).abs() < 1e-12);
        }

        #[test]
        fn aggregate_inverts_replicate(rows in 1usize..6, cols in 1usize..6, f in 1usize..6, seed in 0u64..1000) {
            let g = random_grid(rows, cols, seed);
            let back = aggregate(&replicate(&g, f).unwrap(), f).unwrap();
            prop_assert_eq!(back.values(), g.values());
        }

        #[test]
        fn ascii_round_trip_is_bit_exact(rows in 1usize..5, cols in 1usize..5, seed in 0u64..1000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let values = (0..rows * cols).map(|_| rng.random::<f64>() * 10f64.powi(rng.random_range(-30..30))).collect();
            let g = Grid::new(rows, cols, 200.0, VariableTag::Ppt, values).unwrap();
            let back = Grid::from_ascii(&g.to_ascii(), Path::new("mem")).unwrap();
            for (a, b) in g.values().iter().zip(back.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
