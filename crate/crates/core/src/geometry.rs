//! Characteristic-fiber measures and the geometric control condition.
//!
//! For a characteristic line `L_{ξ=ξ₀} = {x + t = ξ₀}` the fiber measure is
//! the time it spends in `G`, `∫₀^T 1_G(s, ξ₀ − s) ds`; likewise for
//! `η = x − t`. Lines are labelled by their trace at `t = 0`, so `ξ`-bin `p`
//! is the family of lines through `x ∈ [p, p+1)·dx` at time zero.
//!
//! On the triangle raster the fiber measure is piecewise linear in `ξ₀`
//! with breakpoints only at the nodes `ξ₀ = k·dx`. It is therefore described
//! exactly by
//!
//! * the one-sided limits at each node (its essential infimum is the least of
//!   these), and
//! * the bin averages, which are the row and column sums of the `(ξ, η)`
//!   occupancy matrix `μ`.
//!
//! Measures are in the time-integral convention (seconds). Line measure along
//! the diagonal is `√2` times larger.

use serde::{Deserialize, Serialize};

use crate::region::{CharCoord, RasterMask, TRIANGLES};

/// Fibers with bin-average mass at or below this value count as empty.
pub const ZERO_MASS: f64 = 1e-12;

/// Threshold below which a fiber counts as failing the GCC: two time steps.
pub fn gcc_floor(dt: f64) -> f64 {
    (2.0 * dt).max(1e-9)
}

/// Exact characteristic measures of a raster mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberData {
    pub n: usize,
    pub nt: usize,
    pub dx: f64,
    /// Bin-average time spent in `G` by the `ξ`-lines of bin `p`
    /// (lines `x + t = const`, drifting towards `−x`).
    pub m_plus: Vec<f64>,
    /// Bin-average time spent in `G` by the `η`-lines of bin `q`
    /// (lines `x − t = const`, drifting towards `+x`).
    pub m_minus: Vec<f64>,
    /// `(from below, from above)` limits of the `ξ`-fiber measure at the
    /// node `ξ = k·dx`.
    pub plus_limits: Vec<(f64, f64)>,
    /// `(from below, from above)` limits of the `η`-fiber measure at the
    /// node `η = k·dx`.
    pub minus_limits: Vec<(f64, f64)>,
    /// Time the node line `ξ = k·dx` itself spends in the interior of `G`
    /// (both adjacent triangles occupied).
    pub plus_on_line: Vec<f64>,
    /// Same as `plus_on_line` for the node lines `η = k·dx`.
    pub minus_on_line: Vec<f64>,
    /// `mu[p*n + q]`: area of `G ∩ {ξ ∈ bin p, η ∈ bin q}` divided by `dx`
    /// (time units), so that row sums give `m_plus` and column sums `m_minus`.
    pub mu: Vec<f64>,
    /// `coupling[p*n + q]`: largest occupancy of a single `(p, q)` diamond
    /// (two triangles sharing both bins) anywhere in the raster.
    pub coupling: Vec<f64>,
    /// `|G|`.
    pub measure: f64,
}

impl FiberData {
    pub fn dt(&self) -> f64 {
        self.dx
    }

    pub fn t_eff(&self) -> f64 {
        self.nt as f64 * self.dx
    }

    pub fn mu(&self, p: usize, q: usize) -> f64 {
        self.mu[p * self.n + q]
    }

    pub fn coupling(&self, p: usize, q: usize) -> f64 {
        self.coupling[p * self.n + q]
    }

    /// Bin averages of one family.
    pub fn bin_averages(&self, family: CharCoord) -> &[f64] {
        match family {
            CharCoord::Xi => &self.m_plus,
            CharCoord::Eta => &self.m_minus,
        }
    }

    /// Node limits of one family.
    pub fn limits(&self, family: CharCoord) -> &[(f64, f64)] {
        match family {
            CharCoord::Xi => &self.plus_limits,
            CharCoord::Eta => &self.minus_limits,
        }
    }

    /// Essential infimum of the fiber measure of one family.
    pub fn essential_min(&self, family: CharCoord) -> f64 {
        self.limits(family)
            .iter()
            .map(|&(a, b)| a.min(b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Fiber measure of the line with coordinate `s` (`ξ` or `η`), by linear
    /// interpolation between the node limits.
    pub fn fiber_at(&self, family: CharCoord, s: f64) -> f64 {
        let lim = self.limits(family);
        let u = s.rem_euclid(std::f64::consts::TAU) / self.dx;
        let k = (u.floor() as usize).min(self.n - 1);
        let theta = u - k as f64;
        (1.0 - theta) * lim[k].1 + theta * lim[(k + 1) % self.n].0
    }
}

/// Computes all characteristic measures of a mask.
pub fn fiber_profiles(mask: &RasterMask) -> FiberData {
    let (n, nt) = (mask.n(), mask.nt());
    let dx = mask.resolution().dx();
    let half = 0.5 * dx;
    let mut mu = vec![0.0; n * n];
    let mut plus_limits = vec![(0.0, 0.0); n];
    let mut minus_limits = vec![(0.0, 0.0); n];
    let mut plus_on_line = vec![0.0; n];
    let mut minus_on_line = vec![0.0; n];
    let wrap = |v: i64| v.rem_euclid(n as i64) as usize;
    for i in 0..nt {
        for j in 0..n {
            let o = mask.quad(i, j);
            if o.iter().all(|&v| v == 0.0) {
                continue;
            }
            let [l, b, r, t] = o;
            for tri in TRIANGLES {
                let (p, q) = tri.bins(i, j, n);
                mu[p * n + q] += o[tri as usize] * dx / 4.0;
            }
            // The anti-diagonal is the node ξ = (i+j+1)·dx: bottom and left
            // lie below it, right and top above.
            let k = wrap(i as i64 + j as i64 + 1);
            plus_limits[k].0 += half * (b + l);
            plus_limits[k].1 += half * (r + t);
            plus_on_line[k] += half * (b.min(r) + l.min(t));
            // The main diagonal is the node η = (j−i)·dx: left and top lie
            // below it, bottom and right above.
            let k = wrap(j as i64 - i as i64);
            minus_limits[k].0 += half * (l + t);
            minus_limits[k].1 += half * (b + r);
            minus_on_line[k] += half * (l.min(b) + t.min(r));
        }
    }
    let m_plus: Vec<f64> = (0..n).map(|p| mu[p * n..(p + 1) * n].iter().sum()).collect();
    let m_minus: Vec<f64> = (0..n).map(|q| (0..n).map(|p| mu[p * n + q]).sum()).collect();
    let measure = m_plus.iter().sum::<f64>() * dx;
    FiberData {
        n,
        nt,
        dx,
        m_plus,
        m_minus,
        plus_limits,
        minus_limits,
        plus_on_line,
        minus_on_line,
        mu,
        coupling: diamond_coupling(mask),
        measure,
    }
}

/// Largest occupancy of each `(ξ-bin, η-bin)` diamond.
///
/// A diamond is the pair of triangles sharing both bins: the bottom triangle
/// of cell `(i, j)` with the top triangle of `(i−1, j)`, or the left
/// triangle of `(i, j)` with the right triangle of `(i, j−1)`. Diamonds cut
/// by `t = 0` or `t = T` consist of one triangle.
fn diamond_coupling(mask: &RasterMask) -> Vec<f64> {
    let (n, nt) = (mask.n(), mask.nt());
    let mut c = vec![0.0f64; n * n];
    let wrap = |v: i64| v.rem_euclid(n as i64) as usize;
    for i in 0..=nt {
        for j in 0..n {
            let (ii, jj) = (i as i64, j as i64);
            // Horizontal diamond centred at (t, x) = (i, j + ½).
            let below = (i >= 1).then(|| mask.quad(i - 1, j)[3]);
            let above = (i < nt).then(|| mask.quad(i, j)[1]);
            let phi = match (below, above) {
                (Some(a), Some(b)) => 0.5 * (a + b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => 0.0,
            };
            let idx = wrap(ii + jj) * n + wrap(jj - ii);
            c[idx] = c[idx].max(phi);
            // Vertical diamond centred at (i + ½, j).
            if i < nt {
                let phi = 0.5 * (mask.quad(i, j)[0] + mask.quad(i, wrap(jj - 1))[2]);
                let idx = wrap(ii + jj) * n + wrap(jj - ii - 1);
                c[idx] = c[idx].max(phi);
            }
        }
    }
    c
}

/// One of the weakest characteristic lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakFiber {
    pub family: CharCoord,
    /// Node index `k` of the line `ξ = k·dx` or `η = k·dx`.
    pub node: usize,
    /// Smaller one-sided fiber measure at the node (seconds).
    pub measure: f64,
}

/// Outcome of the GCC and weak-GCC checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GccReport {
    /// `c0_est > gcc_floor`.
    pub holds: bool,
    /// Essential infimum of all fiber measures (time-integral convention).
    pub c0_est: f64,
    /// `√2 · c0_est` (line-measure convention).
    pub c0_line_est: f64,
    pub gcc_floor: f64,
    /// Smallest fiber measure over node lines themselves, i.e. the GCC
    /// constant required for every line rather than almost every line.
    pub c0_every_line: f64,
    pub worst_fibers: Vec<WeakFiber>,
    /// No bin of either family has zero mass.
    pub weak_holds: bool,
    /// Smallest bin-average fiber measure over both families.
    pub min_bin_average: f64,
    /// `ξ`-bins whose lines miss `G`.
    pub xi_zero: Vec<usize>,
    /// `η`-bins whose lines miss `G`.
    pub eta_zero: Vec<usize>,
}

/// Number of weakest fibers listed in a report.
const WORST_LISTED: usize = 4;

/// Decides the GCC and weak GCC from fiber data.
pub fn check_gcc(fibers: &FiberData) -> GccReport {
    let floor = gcc_floor(fibers.dt());
    let mut all: Vec<WeakFiber> = [CharCoord::Xi, CharCoord::Eta]
        .iter()
        .flat_map(|&family| {
            fibers
                .limits(family)
                .iter()
                .enumerate()
                .map(move |(node, &(a, b))| WeakFiber {
                    family,
                    node,
                    measure: a.min(b),
                })
        })
        .collect();
    all.sort_by(|a, b| a.measure.total_cmp(&b.measure));
    let c0 = all.first().map_or(0.0, |w| w.measure.max(0.0));
    let zeros = |v: &[f64]| {
        v.iter()
            .enumerate()
            .filter(|(_, &m)| m <= ZERO_MASS)
            .map(|(k, _)| k)
            .collect::<Vec<_>>()
    };
    let xi_zero = zeros(&fibers.m_plus);
    let eta_zero = zeros(&fibers.m_minus);
    let every = fibers
        .plus_on_line
        .iter()
        .chain(&fibers.minus_on_line)
        .copied()
        .fold(f64::INFINITY, f64::min);
    GccReport {
        holds: c0 > floor,
        c0_est: c0,
        c0_line_est: std::f64::consts::SQRT_2 * c0,
        gcc_floor: floor,
        c0_every_line: every.max(0.0),
        worst_fibers: all.into_iter().take(WORST_LISTED).collect(),
        weak_holds: xi_zero.is_empty() && eta_zero.is_empty(),
        min_bin_average: fibers.m_plus.iter().chain(&fibers.m_minus).copied().fold(f64::INFINITY, f64::min),
        xi_zero,
        eta_zero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Resolution;
    use std::f64::consts::TAU;

    fn full(n: usize) -> RasterMask {
        let res = Resolution::new(n, TAU).unwrap();
        RasterMask::from_cells(res, &vec![1.0; n * res.nt]).unwrap()
    }

    #[test]
    fn full_square_fibers() {
        let f = fiber_profiles(&full(32));
        for k in 0..32 {
            assert!((f.m_plus[k] - TAU).abs() < 1e-12);
            assert!((f.m_minus[k] - TAU).abs() < 1e-12);
            assert!((f.plus_limits[k].0 - TAU).abs() < 1e-12);
            assert!((f.minus_on_line[k] - TAU).abs() < 1e-12);
        }
        let g = check_gcc(&f);
        assert!(g.holds && g.weak_holds);
        assert!((g.c0_est - TAU).abs() < 1e-12);
        assert!((f.measure - TAU * TAU).abs() < 1e-10);
    }

    #[test]
    fn single_cell_contributes_to_two_bins_per_family() {
        let res = Resolution::with_steps(8, 4).unwrap();
        let mut w = vec![0.0; 32];
        w[8 + 3] = 1.0; // cell (1, 3)
        let f = fiber_profiles(&RasterMask::from_cells(res, &w).unwrap());
        let dx = res.dx();
        // ξ-bins 4 and 5, η-bins 1 and 2, each half a time step.
        for (p, &m) in f.m_plus.iter().enumerate() {
            let want = if p == 4 || p == 5 { dx / 2.0 } else { 0.0 };
            assert!((m - want).abs() < 1e-15, "ξ-bin {p}: {m}");
        }
        for (q, &m) in f.m_minus.iter().enumerate() {
            let want = if q == 1 || q == 2 { dx / 2.0 } else { 0.0 };
            assert!((m - want).abs() < 1e-15, "η-bin {q}: {m}");
        }
        // The anti-diagonal node ξ = 5·dx and the main diagonal η = 2·dx
        // run through the cell for a full step.
        assert!((f.plus_on_line[5] - dx).abs() < 1e-15);
        assert!((f.minus_on_line[2] - dx).abs() < 1e-15);
        assert!((f.fiber_at(CharCoord::Xi, 5.0 * dx) - dx).abs() < 1e-15);
    }
}
