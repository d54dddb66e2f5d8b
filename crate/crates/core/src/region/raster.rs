//! Characteristic-aligned rasterization.
//!
//! The grid has `n` bins of width `dx = 2π/n` in `x` and `nt` steps of
//! `dt = dx` in time, so characteristic lines `x ± t = const` run along cell
//! diagonals. Each cell is cut by its two diagonals into four triangles
//! (left, bottom, right, top). Every triangle lies in exactly one `ξ`-bin and
//! one `η`-bin, so storing per-triangle occupancy makes all characteristic
//! measures exact sums. Cell `(i, j)` covers `t ∈ [i, i+1)·dt`,
//! `x ∈ [j, j+1)·dx`; its triangles have null-coordinate bins
//!
//! | triangle | ξ-bin     | η-bin       |
//! |----------|-----------|-------------|
//! | left     | `i+j`     | `j−i−1`     |
//! | bottom   | `i+j`     | `j−i`       |
//! | right    | `i+j+1`   | `j−i`       |
//! | top      | `i+j+1`   | `j−i−1`     |
//!
//! where bin `k` is `[k·dx, (k+1)·dx)` taken modulo `n`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use super::SpacetimeRegion;
use crate::error::{Error, Result};

/// Smallest `n` accepted by [`rasterize`].
pub const MIN_RASTER_BINS: usize = 8;

/// Grid resolution; `dt = dx = 2π/n`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Resolution {
    pub n: usize,
    pub nt: usize,
}

impl Resolution {
    /// Resolution with `n` space bins for horizon `T`; the number of time
    /// steps is `round(T/dt)` (at least one).
    pub fn new(n: usize, horizon: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Resolution(format!("need at least 2 bins, got {n}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Resolution("horizon must be positive".into()));
        }
        let dx = TAU / n as f64;
        let nt = ((horizon / dx).round() as usize).max(1);
        Ok(Self { n, nt })
    }

    /// Resolution with an explicit step count.
    pub fn with_steps(n: usize, nt: usize) -> Result<Self> {
        if n < 2 || nt < 1 {
            return Err(Error::Resolution(format!("invalid grid {n} x {nt}")));
        }
        Ok(Self { n, nt })
    }

    pub fn dx(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn dt(&self) -> f64 {
        self.dx()
    }

    /// The horizon actually analyzed, `nt·dt`.
    pub fn t_eff(&self) -> f64 {
        self.nt as f64 * self.dt()
    }
}

/// The four triangles of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Left = 0,
    Bottom = 1,
    Right = 2,
    Top = 3,
}

pub const TRIANGLES: [Triangle; 4] = [
    Triangle::Left,
    Triangle::Bottom,
    Triangle::Right,
    Triangle::Top,
];

impl Triangle {
    /// `(ξ-bin, η-bin)` of this triangle in cell `(i, j)`, reduced mod `n`.
    pub fn bins(self, i: usize, j: usize, n: usize) -> (usize, usize) {
        let (i, j, m) = (i as i64, j as i64, n as i64);
        let (p, q) = match self {
            Triangle::Left => (i + j, j - i - 1),
            Triangle::Bottom => (i + j, j - i),
            Triangle::Right => (i + j + 1, j - i),
            Triangle::Top => (i + j + 1, j - i - 1),
        };
        (p.rem_euclid(m) as usize, q.rem_euclid(m) as usize)
    }

    /// Vertices in local cell coordinates `(u, v)` = (time, space) fractions.
    pub fn local_vertices(self) -> [(f64, f64); 3] {
        let c = (0.5, 0.5);
        match self {
            Triangle::Left => [(0.0, 0.0), (1.0, 0.0), c],
            Triangle::Bottom => [(0.0, 0.0), (0.0, 1.0), c],
            Triangle::Right => [(0.0, 1.0), (1.0, 1.0), c],
            Triangle::Top => [(1.0, 0.0), (1.0, 1.0), c],
        }
    }

    /// Which triangle of a cell contains the local point `(u, v)`.
    pub fn locate(u: f64, v: f64) -> Triangle {
        // Diagonals v = u (main) and v = 1 − u (anti).
        let above_main = v > u;
        let above_anti = v > 1.0 - u;
        match (above_main, above_anti) {
            (true, true) => Triangle::Right,
            (true, false) => Triangle::Bottom,
            (false, true) => Triangle::Top,
            (false, false) => Triangle::Left,
        }
    }
}

/// Incentres of the `m²` congruent sub-triangles of a cell triangle, in
/// barycentric coordinates over its vertices `[corner, corner, centre]`.
///
/// Incentres of these right isosceles triangles have irrational
/// coordinates, so no sample lies on a boundary through rational points
/// such as `ξ = 2π/3` on a grid with `3 | n`, and the pattern keeps every
/// symmetry of the cell.
fn subtriangle_samples(m: usize) -> Vec<[f64; 3]> {
    let mf = m as f64;
    // Weights proportional to the side opposite each vertex: the legs
    // (length √2/2) face the corners, the hypotenuse (length 1) the centre.
    let leg = std::f64::consts::FRAC_1_SQRT_2;
    let total = 2.0 * leg + 1.0;
    let w = [leg / total, leg / total, 1.0 / total];
    let mut out = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m - a {
            let c = m - 1 - a - b;
            out.push([
                (a as f64 + w[0]) / mf,
                (b as f64 + w[1]) / mf,
                (c as f64 + w[2]) / mf,
            ]);
        }
    }
    // Inverted sub-triangles are point reflections of upright ones.
    for a in 0..m {
        for b in 0..m - a {
            if a + b + 2 > m {
                continue;
            }
            let c = m - 2 - a - b;
            out.push([
                (a as f64 + 1.0 - w[0]) / mf,
                (b as f64 + 1.0 - w[1]) / mf,
                (c as f64 + 1.0 - w[2]) / mf,
            ]);
        }
    }
    out
}

/// Discretized occupancy of a region: per-cell, per-triangle fractions in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    res: Resolution,
    /// `quads[i*n + j] = [left, bottom, right, top]`.
    quads: Vec<[f64; 4]>,
    supersample: usize,
}

impl RasterMask {
    /// Mask with uniform occupancy per cell (`w[i*n + j]`).
    pub fn from_cells(res: Resolution, w: &[f64]) -> Result<Self> {
        if w.len() != res.n * res.nt {
            return Err(Error::InvalidInput(format!(
                "expected {} cells, got {}",
                res.n * res.nt,
                w.len()
            )));
        }
        Self::from_quadrants(res, w.iter().map(|&v| [v; 4]).collect())
    }

    /// Mask from explicit triangle occupancies.
    pub fn from_quadrants(res: Resolution, quads: Vec<[f64; 4]>) -> Result<Self> {
        if quads.len() != res.n * res.nt {
            return Err(Error::InvalidInput(format!(
                "expected {} cells, got {}",
                res.n * res.nt,
                quads.len()
            )));
        }
        if quads
            .iter()
            .flatten()
            .any(|&v| !(0.0..=1.0).contains(&v))
        {
            return Err(Error::InvalidInput("occupancy must lie in [0, 1]".into()));
        }
        Ok(Self {
            res,
            quads,
            supersample: 0,
        })
    }

    pub fn resolution(&self) -> Resolution {
        self.res
    }

    /// Supersampling used to build the mask (0 for masks given directly).
    pub fn supersample(&self) -> usize {
        self.supersample
    }

    pub fn n(&self) -> usize {
        self.res.n
    }

    pub fn nt(&self) -> usize {
        self.res.nt
    }

    pub fn quad(&self, i: usize, j: usize) -> [f64; 4] {
        self.quads[i * self.res.n + j]
    }

    pub fn quads(&self) -> &[[f64; 4]] {
        &self.quads
    }

    /// Cell occupancy `w[i][j]`: the mean of the four triangles.
    pub fn w(&self, i: usize, j: usize) -> f64 {
        let q = self.quad(i, j);
        0.25 * (q[0] + q[1] + q[2] + q[3])
    }

    /// `|G| = Σ w·dt·dx`.
    pub fn measure(&self) -> f64 {
        let dx = self.res.dx();
        self.quads
            .iter()
            .map(|q| q.iter().sum::<f64>())
            .sum::<f64>()
            * dx
            * dx
            / 4.0
    }

    /// Set when the mask carries no mass at all.
    pub fn zero_measure_warning(&self) -> bool {
        self.quads.iter().flatten().all(|&v| v == 0.0)
    }

    /// Occupancy at a point `(t, x)` with `t ∈ [0, T_eff)`.
    pub fn value_at(&self, t: f64, x: f64) -> f64 {
        let dx = self.res.dx();
        let st = t / dx;
        let sx = x.rem_euclid(TAU) / dx;
        let i = (st.floor() as i64).clamp(0, self.res.nt as i64 - 1) as usize;
        let j = (sx.floor() as i64).rem_euclid(self.res.n as i64) as usize;
        let tri = Triangle::locate(st - i as f64, sx - sx.floor());
        self.quad(i, j)[tri as usize]
    }

    /// The mask rotated by `k` cells in `+x`.
    pub fn rotate_x(&self, k: usize) -> Self {
        let n = self.res.n;
        let mut quads = vec![[0.0; 4]; self.quads.len()];
        for i in 0..self.res.nt {
            for j in 0..n {
                quads[i * n + (j + k) % n] = self.quads[i * n + j];
            }
        }
        Self {
            quads,
            ..self.clone()
        }
    }

    /// The mask mirrored by `x ↦ −x` (cell `j ↦ n−1−j`, left ↔ right).
    pub fn reflect_x(&self) -> Self {
        let n = self.res.n;
        let mut quads = vec![[0.0; 4]; self.quads.len()];
        for i in 0..self.res.nt {
            for j in 0..n {
                let q = self.quads[i * n + j];
                quads[i * n + (n - 1 - j)] = [q[2], q[1], q[0], q[3]];
            }
        }
        Self {
            quads,
            ..self.clone()
        }
    }

    /// The mask restricted to the first `nt` time steps.
    pub fn truncate_time(&self, nt: usize) -> Result<Self> {
        let res = Resolution::with_steps(self.res.n, nt.min(self.res.nt))?;
        Ok(Self {
            res,
            quads: self.quads[..res.n * res.nt].to_vec(),
            supersample: self.supersample,
        })
    }

    /// Cellwise maximum of two masks on the same grid.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.res != other.res {
            return Err(Error::InvalidInput("mask grids differ".into()));
        }
        let quads = self
            .quads
            .iter()
            .zip(&other.quads)
            .map(|(a, b)| std::array::from_fn(|k| a[k].max(b[k])))
            .collect();
        Ok(Self {
            quads,
            ..self.clone()
        })
    }
}

/// Rasterizes `region` on the grid `res`.
///
/// Every triangle of every cell is split into `m²` congruent sub-triangles,
/// `m = ⌈supersample/2⌉`, and the region is evaluated at their incentres, so
/// a cell receives `4m²` samples (`supersample²` for even values). Sample
/// points never lie on cell edges or diagonals, so region boundaries that
/// follow grid lines or characteristics are captured exactly. Time is
/// mapped by `t ↦ t·T/T_eff` so that the region's horizon fills the grid.
pub fn rasterize(region: &SpacetimeRegion, res: Resolution, supersample: usize) -> Result<RasterMask> {
    let quads = sample_cells(region, res, supersample, |_, _| 1.0)?;
    let inv = 1.0 / sample_pattern(supersample).len() as f64;
    Ok(RasterMask {
        res,
        quads: quads.into_iter().map(|q| q.map(|a| (a * inv).clamp(0.0, 1.0))).collect(),
        supersample,
    })
}

/// `∫_G g(t, x) dt dx` by the stratified sampling used in [`rasterize`].
///
/// With `g` a closed-form field this measures the region itself rather than
/// its raster, which matters when `g` jumps inside a cell.
pub fn integrate_over<F>(region: &SpacetimeRegion, res: Resolution, supersample: usize, g: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let sums = sample_cells(region, res, supersample, g)?;
    let per_sample = res.dx() * res.dx() * region.horizon() / res.t_eff()
        / (4 * sample_pattern(supersample).len()) as f64;
    Ok(sums.iter().flatten().sum::<f64>() * per_sample)
}

/// Sample points of the four triangles in local cell coordinates.
fn sample_pattern(supersample: usize) -> Vec<[(f64, f64); 4]> {
    let tris: Vec<[(f64, f64); 3]> = TRIANGLES.iter().map(|t| t.local_vertices()).collect();
    subtriangle_samples(supersample.div_ceil(2))
        .iter()
        .map(|b| {
            std::array::from_fn(|k| {
                let v = tris[k];
                (
                    b[0] * v[0].0 + b[1] * v[1].0 + b[2] * v[2].0,
                    b[0] * v[0].1 + b[1] * v[1].1 + b[2] * v[2].1,
                )
            })
        })
        .collect()
}

/// Per-triangle sums of `1_G · g` over the sample points of every cell.
fn sample_cells<F>(region: &SpacetimeRegion, res: Resolution, supersample: usize, g: F) -> Result<Vec<[f64; 4]>>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if supersample == 0 {
        return Err(Error::Resolution("supersample must be at least 1".into()));
    }
    if res.n < MIN_RASTER_BINS {
        return Err(Error::Resolution(format!(
            "n = {} is too coarse; need n >= {MIN_RASTER_BINS}",
            res.n
        )));
    }
    let samples = sample_pattern(supersample);
    let dx = res.dx();
    let t_scale = region.horizon() / res.t_eff();
    let n = res.n;
    Ok((0..res.nt * n)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / n, cell % n);
            let mut acc = [0.0; 4];
            for s in &samples {
                for (k, &(u, v)) in s.iter().enumerate() {
                    let t = (i as f64 + u) * dx * t_scale;
                    let x = (j as f64 + v) * dx;
                    let occ = region.value(t, x);
                    if occ != 0.0 {
                        acc[k] += occ * g(t, x);
                    }
                }
            }
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtriangle_count_and_barycentric_sum() {
        for m in 1..6 {
            let c = subtriangle_samples(m);
            assert_eq!(c.len(), m * m);
            for b in c {
                assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(b.iter().all(|&x| x > 0.0));
            }
        }
    }

    #[test]
    fn locate_agrees_with_triangle_vertices() {
        for tri in TRIANGLES {
            let v = tri.local_vertices();
            let c = (
                (v[0].0 + v[1].0 + v[2].0) / 3.0,
                (v[0].1 + v[1].1 + v[2].1) / 3.0,
            );
            assert_eq!(Triangle::locate(c.0, c.1), tri);
        }
    }

    #[test]
    fn triangle_bins_match_null_coordinates() {
        // The centroid of each triangle must fall in the listed (ξ, η) bins.
        let n = 16;
        let dx = TAU / n as f64;
        for i in 0..5 {
            for j in 0..n {
                for tri in TRIANGLES {
                    let v = tri.local_vertices();
                    let u = (v[0].0 + v[1].0 + v[2].0) / 3.0;
                    let w = (v[0].1 + v[1].1 + v[2].1) / 3.0;
                    let (t, x) = ((i as f64 + u) * dx, (j as f64 + w) * dx);
                    let p = (((x + t) / dx).floor() as i64).rem_euclid(n as i64) as usize;
                    let q = (((x - t) / dx).floor() as i64).rem_euclid(n as i64) as usize;
                    assert_eq!(tri.bins(i, j, n), (p, q), "{tri:?} at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn resolution_rounds_horizon() {
        let r = Resolution::new(256, 6.2832).unwrap();
        assert_eq!(r.nt, 256);
        assert!((r.t_eff() - 6.2832).abs() <= r.dt() / 2.0);
    }
}
