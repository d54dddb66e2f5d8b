//! The two classical configurations where the geometric control condition
//! holds but observability fails, with their invisible initial data.
//!
//! Both regions have horizon `2π` and are unions of 45° triangles and
//! diamonds. In null coordinates they read `G = ⋃_k {ξ ∈ A_k, η ∈ A_k}` for a
//! partition `{A_k}` of the circle, which is why data with `∂_ξu = ∂_ηu`
//! constant on each `A_k` have `u_t = ∂_ξu − ∂_ηu = 0` on `G`.

use std::f64::consts::{PI, TAU};

use super::{parse_region, CircleArc, RegionExpr, SpacetimeRegion};

/// First configuration: triangles and diamonds split at `x ∈ {0, π}`.
/// Coordinates are `(t, x)`.
pub const FIGURE1_DSL: &str = "\
# Two-colour checkerboard of 45-degree triangles and diamonds, T = 2*pi.
# G = {xi, eta both in (0,pi)} U {xi, eta both in (pi,2*pi)}.
region { T=2*pi
  union {
    # first colour
    polygon { (0,0) (0,pi) (pi/2,pi/2) }
    polygon { (2*pi,0) (3*pi/2,pi/2) (2*pi,pi) }
    polygon { (pi,pi) (pi/2,3*pi/2) (pi,2*pi) (3*pi/2,3*pi/2) }
    # second colour
    polygon { (0,pi) (0,2*pi) (pi/2,3*pi/2) }
    polygon { (2*pi,pi) (3*pi/2,3*pi/2) (2*pi,2*pi) }
    polygon { (pi,0) (pi/2,pi/2) (pi,pi) (3*pi/2,pi/2) }
  }
}
";

/// Second configuration: split of the circle into arcs of length `4π/3`
/// and `2π/3`. Coordinates are `(t, x)`; polygons may cross the seam.
pub const FIGURE2_DSL: &str = "\
# G = {xi, eta both in R} U {xi, eta both in B}, with
# R = (-2*pi/3, 2*pi/3) and B = (2*pi/3, 4*pi/3), T = 2*pi.
region { T=2*pi
  union {
    # pieces over R
    polygon { (0,-2*pi/3) (0,2*pi/3) (2*pi/3,0) }
    polygon { (pi/3,pi) (pi,pi/3) (5*pi/3,pi) (pi,5*pi/3) }
    polygon { (2*pi,-2*pi/3) (2*pi,2*pi/3) (4*pi/3,0) }
    # pieces over B
    polygon { (0,2*pi/3) (0,4*pi/3) (pi/3,pi) }
    polygon { (2*pi/3,0) (pi,-pi/3) (4*pi/3,0) (pi,pi/3) }
    polygon { (2*pi,2*pi/3) (2*pi,4*pi/3) (5*pi/3,pi) }
  }
}
";

/// Piecewise-constant characteristic data `∂_ξu|_{t=0}` and `∂_ηu|_{t=0}`
/// (functions of `x`) that are invisible on a figure region.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureReference {
    /// `(arc, value)` pieces of `∂_ξu|_{t=0}`.
    pub xi_levels: Vec<(CircleArc, f64)>,
    /// `(arc, value)` pieces of `∂_ηu|_{t=0}`.
    pub eta_levels: Vec<(CircleArc, f64)>,
}

impl FigureReference {
    fn eval(levels: &[(CircleArc, f64)], x: f64) -> f64 {
        levels
            .iter()
            .find(|(a, _)| a.contains(x))
            .map_or(0.0, |(_, v)| *v)
    }

    pub fn xi_value(&self, x: f64) -> f64 {
        Self::eval(&self.xi_levels, x)
    }

    pub fn eta_value(&self, x: f64) -> f64 {
        Self::eval(&self.eta_levels, x)
    }

    /// `‖∂_x u₀‖² + ‖u₁‖² = 2(‖∂_ξu‖² + ‖∂_ηu‖²)` computed from the pieces.
    pub fn energy(&self) -> f64 {
        let sq = |l: &[(CircleArc, f64)]| l.iter().map(|(a, v)| a.len() * v * v).sum::<f64>();
        2.0 * (sq(&self.xi_levels) + sq(&self.eta_levels))
    }

    /// Samples `(∂_ξu, ∂_ηu)` at bin centres `(j + ½)·2π/n`.
    pub fn characteristic_samples(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let dx = TAU / n as f64;
        let xs = (0..n).map(|j| (j as f64 + 0.5) * dx);
        xs.map(|x| (self.xi_value(x), self.eta_value(x))).unzip()
    }
}

fn arc(a: f64, b: f64) -> CircleArc {
    CircleArc::new(a, b).expect("nonempty arc")
}

/// The first configuration and its invisible data: `∂_ξu = ∂_ηu = −1` on
/// `(0, π)` and `+1` on `(π, 2π)`, total energy `8π`.
pub fn figure1_region() -> (SpacetimeRegion, FigureReference) {
    let region = parse_region(FIGURE1_DSL).expect("built-in region parses");
    let levels = vec![(arc(0.0, PI), -1.0), (arc(PI, TAU), 1.0)];
    (
        region,
        FigureReference {
            xi_levels: levels.clone(),
            eta_levels: levels,
        },
    )
}

/// The second configuration and its invisible data: value `1` on the long
/// arc `(−2π/3, 2π/3)` and `−2` on `(2π/3, 4π/3)` for both `∂_ξu` and
/// `∂_ηu`; the mean vanishes since `(4π/3)·1 + (2π/3)·(−2) = 0`.
pub fn figure2_region() -> (SpacetimeRegion, FigureReference) {
    let region = parse_region(FIGURE2_DSL).expect("built-in region parses");
    let levels = vec![
        (arc(-2.0 * PI / 3.0, 2.0 * PI / 3.0), 1.0),
        (arc(2.0 * PI / 3.0, 4.0 * PI / 3.0), -2.0),
    ];
    (
        region,
        FigureReference {
            xi_levels: levels.clone(),
            eta_levels: levels,
        },
    )
}

/// The first configuration with every polygon pushed outward by `eps`.
/// The dilated set covers the seams `ξ, η ∈ {0, π}` where the original only
/// touches them.
pub fn figure1_dilated(eps: f64) -> SpacetimeRegion {
    let (region, _) = figure1_region();
    let RegionExpr::Union(children) = region.root() else {
        unreachable!("figure region is a union");
    };
    let horizon = region.horizon();
    let grown = children
        .iter()
        .map(|c| match c {
            RegionExpr::Polygon(p) => RegionExpr::Polygon(p.offset(eps).expect("offset polygon")),
            other => other.clone(),
        })
        .collect();
    SpacetimeRegion::new(horizon, RegionExpr::Union(grown)).expect("positive horizon")
}
