//! Spacetime observation regions `G ⊂ [0,T] × 𝕋`.
//!
//! A region is a tree of primitives (cylinders, products, polygons,
//! characteristic bands, raster literals) combined with set algebra. Regions
//! are written in a small text language (see [`parse_region`]), evaluated
//! pointwise, and rasterized onto a characteristic-aligned grid
//! (see [`rasterize`]).

mod figures;
mod parse;
mod pgm;
mod raster;

use std::f64::consts::TAU;
use std::sync::Arc;

pub use figures::{
    figure1_dilated, figure1_region, figure2_region, FigureReference, FIGURE1_DSL, FIGURE2_DSL,
};
pub use parse::{parse_region, parse_region_in, serialize_region};
pub use pgm::{read_pgm, write_pgm, GrayImage};
pub use raster::{integrate_over, rasterize, RasterMask, Resolution, Triangle, TRIANGLES};

/// Relative slack used when checking that time coordinates lie in `[0, T]`.
const HORIZON_SLACK: f64 = 1e-9;

/// A closed-open arc `[start, end)` of the circle `𝕋 = [0, 2π)`.
///
/// After normalization `start ∈ [0, 2π)` and `end − start ∈ (0, 2π]`; the
/// arc may wrap across the seam at `2π ≡ 0`. Normalization is idempotent, so
/// printing and re-reading an arc reproduces it bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleArc {
    pub start: f64,
    pub end: f64,
}

impl CircleArc {
    /// Builds the arc `[a, b]`, translating it by a multiple of `2π` so that
    /// it starts in `[0, 2π)`. Arcs of length at least `2π` become the full
    /// circle.
    pub fn new(a: f64, b: f64) -> Option<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return None;
        }
        if b - a >= TAU {
            return Some(Self::full());
        }
        let shift = a - a.rem_euclid(TAU);
        Some(Self {
            start: a - shift,
            end: b - shift,
        })
    }

    pub fn full() -> Self {
        Self {
            start: 0.0,
            end: TAU,
        }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, x: f64) -> bool {
        let len = self.len();
        len >= TAU || (x - self.start).rem_euclid(TAU) < len
    }
}

/// A time interval `[lo, hi] ⊂ [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl TimeInterval {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t < self.hi
    }
}

/// Which null coordinate a characteristic band constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CharCoord {
    /// `ξ = x + t`.
    Xi,
    /// `η = x − t`.
    Eta,
}

/// A simple polygon in `(t, x)` coordinates.
///
/// Vertices are stored unwrapped: the whole polygon is translated by a
/// multiple of `2π` in `x` so that the first vertex lies in `[0, 2π)`, and the
/// remaining vertices keep their offsets, so edges may cross the seam.
/// Membership uses the nonzero winding rule and tests every periodic image.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<(f64, f64)>,
    x_min: f64,
    x_max: f64,
}

impl Polygon {
    /// Builds a polygon from `(t, x)` vertices; `None` when fewer than three
    /// vertices are given or the enclosed area vanishes.
    pub fn new(vertices: Vec<(f64, f64)>) -> Option<Self> {
        if vertices.len() < 3 || vertices.iter().any(|v| !(v.0.is_finite() && v.1.is_finite())) {
            return None;
        }
        let shift = vertices[0].1 - vertices[0].1.rem_euclid(TAU);
        let vertices: Vec<(f64, f64)> = vertices.iter().map(|&(t, x)| (t, x - shift)).collect();
        let area = signed_area(&vertices);
        if area.abs() < 1e-14 {
            return None;
        }
        let x_min = vertices.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let x_max = vertices.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        Some(Self {
            vertices,
            x_min,
            x_max,
        })
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// Area of the polygon in the `(t, x)` plane.
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    /// Returns a polygon whose edges are pushed outward by `eps`
    /// (mitered offset). For convex polygons this contains the Minkowski sum
    /// with the disc of radius `eps`.
    pub fn offset(&self, eps: f64) -> Option<Self> {
        let v = &self.vertices;
        let k = v.len();
        let orient = signed_area(v).signum();
        // Each edge i runs v[i] -> v[i+1]; its outward normal for a
        // counter-clockwise polygon is (dy, -dx) in the (t, x) plane.
        let lines: Vec<((f64, f64), (f64, f64))> = (0..k)
            .map(|i| {
                let a = v[i];
                let b = v[(i + 1) % k];
                let (dt, dx) = (b.0 - a.0, b.1 - a.1);
                let len = (dt * dt + dx * dx).sqrt();
                let normal = (orient * dx / len, -orient * dt / len);
                let shift = (normal.0 * eps, normal.1 * eps);
                ((a.0 + shift.0, a.1 + shift.1), (dt, dx))
            })
            .collect();
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let (p1, d1) = lines[(i + k - 1) % k];
            let (p2, d2) = lines[i];
            let det = d1.0 * (-d2.1) - d1.1 * (-d2.0);
            if det.abs() < 1e-15 {
                out.push(p2);
                continue;
            }
            let rhs = (p2.0 - p1.0, p2.1 - p1.1);
            let s = (rhs.0 * (-d2.1) - rhs.1 * (-d2.0)) / det;
            out.push((p1.0 + s * d1.0, p1.1 + s * d1.1));
        }
        Polygon::new(out)
    }

    pub fn contains(&self, t: f64, x: f64) -> bool {
        let m_lo = ((self.x_min - x) / TAU).ceil() as i64;
        let m_hi = ((self.x_max - x) / TAU).floor() as i64;
        (m_lo..=m_hi).any(|m| winding_number(&self.vertices, t, x + m as f64 * TAU) != 0)
    }
}

fn signed_area(v: &[(f64, f64)]) -> f64 {
    let k = v.len();
    0.5 * (0..k)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % k];
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
}

fn winding_number(v: &[(f64, f64)], t: f64, x: f64) -> i32 {
    // Ray towards +x at fixed t; crossings are counted with orientation.
    let k = v.len();
    let mut wn = 0;
    for i in 0..k {
        let (t0, x0) = v[i];
        let (t1, x1) = v[(i + 1) % k];
        let cross = (t1 - t0) * (x - x0) - (x1 - x0) * (t - t0);
        if t0 <= t {
            if t1 > t && cross < 0.0 {
                wn += 1;
            }
        } else if t1 <= t && cross > 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// A gray-level raster referenced from region text.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterLiteral {
    /// Path as written in the region text.
    pub path: String,
    pub image: Arc<GrayImage>,
}

impl RasterLiteral {
    /// Occupancy at `(t, x)` on a horizon `horizon`: rows are time
    /// ascending, columns are `x` ascending.
    pub fn value(&self, t: f64, x: f64, horizon: f64) -> f64 {
        let img = &self.image;
        let row = ((t / horizon) * img.height as f64).floor() as i64;
        let col = ((x.rem_euclid(TAU) / TAU) * img.width as f64).floor() as i64;
        let row = row.clamp(0, img.height as i64 - 1) as usize;
        let col = col.clamp(0, img.width as i64 - 1) as usize;
        img.occupancy(row, col)
    }
}

/// Node of a region expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionExpr {
    /// `I × (ω₁ ∪ ω₂ ∪ …)`.
    Cylinder {
        time: TimeInterval,
        arcs: Vec<CircleArc>,
    },
    /// `(E₁ ∪ E₂ ∪ …) × (F₁ ∪ F₂ ∪ …)`.
    Product {
        times: Vec<TimeInterval>,
        arcs: Vec<CircleArc>,
    },
    Polygon(Polygon),
    /// `L_{ξ∈A}` or `L_{η∈B}` clipped to the horizon.
    CharBand {
        coord: CharCoord,
        arcs: Vec<CircleArc>,
    },
    Raster(RasterLiteral),
    Union(Vec<RegionExpr>),
    Intersect(Vec<RegionExpr>),
    /// First child minus all later children.
    Diff(Vec<RegionExpr>),
    Complement(Box<RegionExpr>),
}

impl RegionExpr {
    /// Membership value in `[0, 1]` at `(t, x)`; primitives are indicator
    /// functions, raster literals may be fractional. Union is `max`,
    /// intersection `min`, complement `1 − v`.
    pub fn value(&self, t: f64, x: f64, horizon: f64) -> f64 {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            RegionExpr::Cylinder { time, arcs } => {
                ind(time.contains(t) && arcs.iter().any(|a| a.contains(x)))
            }
            RegionExpr::Product { times, arcs } => ind(
                times.iter().any(|i| i.contains(t)) && arcs.iter().any(|a| a.contains(x)),
            ),
            RegionExpr::Polygon(p) => ind(p.contains(t, x)),
            RegionExpr::CharBand { coord, arcs } => {
                let c = match coord {
                    CharCoord::Xi => x + t,
                    CharCoord::Eta => x - t,
                };
                ind(arcs.iter().any(|a| a.contains(c)))
            }
            RegionExpr::Raster(r) => r.value(t, x, horizon),
            RegionExpr::Union(children) => children
                .iter()
                .map(|c| c.value(t, x, horizon))
                .fold(0.0, f64::max),
            RegionExpr::Intersect(children) => children
                .iter()
                .map(|c| c.value(t, x, horizon))
                .fold(1.0, f64::min),
            RegionExpr::Diff(children) => {
                let first = children[0].value(t, x, horizon);
                children[1..]
                    .iter()
                    .map(|c| 1.0 - c.value(t, x, horizon))
                    .fold(first, f64::min)
            }
            RegionExpr::Complement(c) => 1.0 - c.value(t, x, horizon),
        }
    }

    /// True when the expression is built from open primitives with unions
    /// and intersections only (no raster literals, differences or
    /// complements), so that it denotes an open set up to boundary null sets.
    pub fn is_open(&self) -> bool {
        match self {
            RegionExpr::Cylinder { .. }
            | RegionExpr::Product { .. }
            | RegionExpr::Polygon(_)
            | RegionExpr::CharBand { .. } => true,
            RegionExpr::Raster(_) | RegionExpr::Diff(_) | RegionExpr::Complement(_) => false,
            RegionExpr::Union(c) | RegionExpr::Intersect(c) => c.iter().all(|e| e.is_open()),
        }
    }
}

/// A spacetime region `G ⊂ [0, T] × 𝕋`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeRegion {
    horizon: f64,
    root: RegionExpr,
}

impl SpacetimeRegion {
    /// Builds a region; `None` when the horizon is not positive.
    pub fn new(horizon: f64, root: RegionExpr) -> Option<Self> {
        (horizon > 0.0 && horizon.is_finite()).then_some(Self { horizon, root })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn root(&self) -> &RegionExpr {
        &self.root
    }

    /// Membership value at `(t, x)` for `t ∈ [0, T]`.
    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.root.value(t, x.rem_euclid(TAU), self.horizon)
    }

    pub fn is_open(&self) -> bool {
        self.root.is_open()
    }
}

/// Clamps `t` into `[0, horizon]` if it lies within the slack, otherwise
/// reports `None`.
pub(crate) fn clamp_time(t: f64, horizon: f64) -> Option<f64> {
    let slack = HORIZON_SLACK * horizon.max(1.0);
    if t < -slack || t > horizon + slack || !t.is_finite() {
        None
    } else {
        Some(t.clamp(0.0, horizon))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn arc_wraps_across_seam() {
        let a = CircleArc::new(-1.0, 1.0).unwrap();
        assert!((a.start - (TAU - 1.0)).abs() < 1e-12);
        assert!((a.len() - 2.0).abs() < 1e-12);
        assert!(a.contains(0.5));
        assert!(a.contains(TAU - 0.5));
        assert!(!a.contains(PI));
    }

    #[test]
    fn long_arc_is_full_circle() {
        let a = CircleArc::new(3.0, 3.0 + 7.0).unwrap();
        assert_eq!(a, CircleArc::full());
        assert!(a.contains(1.234));
    }

    #[test]
    fn reversed_arc_is_rejected() {
        assert!(CircleArc::new(2.0, 1.0).is_none());
    }

    #[test]
    fn polygon_crossing_seam_contains_both_sides() {
        let p = Polygon::new(vec![(0.0, -1.0), (0.0, 1.0), (1.0, 0.0)]).unwrap();
        assert!(p.contains(0.1, 0.05));
        assert!(p.contains(0.1, TAU - 0.05));
        assert!(!p.contains(0.1, PI));
        assert!((p.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_orientation_does_not_matter() {
        let cw = Polygon::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let ccw = Polygon::new(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap();
        for &(t, x) in &[(0.5, 0.5), (0.2, 0.9), (1.5, 0.5), (0.5, 2.0)] {
            assert_eq!(cw.contains(t, x), ccw.contains(t, x));
        }
    }

    #[test]
    fn offset_square_grows_by_eps() {
        let sq = Polygon::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let big = sq.offset(0.25).unwrap();
        assert!((big.area() - 1.5 * 1.5).abs() < 1e-12);
        assert!(big.contains(-0.2, 0.5));
    }

    #[test]
    fn set_algebra_is_pointwise() {
        let a = RegionExpr::Cylinder {
            time: TimeInterval { lo: 0.0, hi: 1.0 },
            arcs: vec![CircleArc::new(0.0, 1.0).unwrap()],
        };
        let b = RegionExpr::CharBand {
            coord: CharCoord::Xi,
            arcs: vec![CircleArc::new(0.0, 0.5).unwrap()],
        };
        let u = RegionExpr::Union(vec![a.clone(), b.clone()]);
        let d = RegionExpr::Diff(vec![a.clone(), b.clone()]);
        let c = RegionExpr::Complement(Box::new(a.clone()));
        for &(t, x) in &[(0.1, 0.2), (0.5, 0.9), (0.9, 5.9), (0.1, 3.0)] {
            let (va, vb) = (a.value(t, x, 1.0), b.value(t, x, 1.0));
            assert_eq!(u.value(t, x, 1.0), va.max(vb));
            assert_eq!(d.value(t, x, 1.0), va.min(1.0 - vb));
            assert_eq!(c.value(t, x, 1.0), 1.0 - va);
        }
    }
}
