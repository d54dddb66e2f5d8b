//! Mask generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use wavesym::region::{parse_region, rasterize, RasterMask, Resolution, SpacetimeRegion, TRIANGLES};

pub fn full_mask(n: usize, nt: usize) -> RasterMask {
    let res = Resolution::with_steps(n, nt).unwrap();
    RasterMask::from_cells(res, &vec![1.0; n * nt]).unwrap()
}

/// Every triangle independently occupied with probability `density`.
pub fn random_binary_mask<R: Rng>(n: usize, nt: usize, density: f64, rng: &mut R) -> RasterMask {
    let res = Resolution::with_steps(n, nt).unwrap();
    let quads = (0..n * nt)
        .map(|_| std::array::from_fn(|_| if rng.random_bool(density) { 1.0 } else { 0.0 }))
        .collect();
    RasterMask::from_quadrants(res, quads).unwrap()
}

/// Every triangle occupied with a uniform random fraction.
pub fn random_fractional_mask<R: Rng>(n: usize, nt: usize, rng: &mut R) -> RasterMask {
    let res = Resolution::with_steps(n, nt).unwrap();
    let quads = (0..n * nt)
        .map(|_| std::array::from_fn(|_| rng.random_range(0.0..1.0)))
        .collect();
    RasterMask::from_quadrants(res, quads).unwrap()
}

/// Triangles whose `(ξ, η)` bins carry equal labels, then `flips` random
/// triangles toggled. With no flips the classes of equal labels form exact
/// observable-symmetry pairs.
pub fn block_mask<R: Rng>(n: usize, nt: usize, labels: &[usize], flips: usize, rng: &mut R) -> RasterMask {
    let res = Resolution::with_steps(n, nt).unwrap();
    let mut quads: Vec<[f64; 4]> = (0..nt)
        .flat_map(|i| {
            (0..n).map(move |j| {
                std::array::from_fn(|k| {
                    let (p, q) = TRIANGLES[k].bins(i, j, n);
                    if labels[p] == labels[q] {
                        1.0
                    } else {
                        0.0
                    }
                })
            })
        })
        .collect();
    for _ in 0..flips {
        let c = rng.random_range(0..n * nt);
        let k = rng.random_range(0..4);
        quads[c][k] = 1.0 - quads[c][k];
    }
    RasterMask::from_quadrants(res, quads).unwrap()
}

/// A random binary mask from one of several families, so that pairs,
/// connected graphs and zero fibers all occur.
pub fn mixed_mask<R: Rng>(n: usize, rng: &mut R) -> RasterMask {
    let nt = rng.random_range(n / 2..=2 * n);
    match rng.random_range(0..4) {
        0 => random_binary_mask(n, nt, rng.random_range(0.2..0.9), rng),
        1 => {
            let k = rng.random_range(2..=3);
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            block_mask(n, nt, &labels, 0, rng)
        }
        2 => {
            let k = rng.random_range(2..=3);
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
            let flips = rng.random_range(1..=3);
            block_mask(n, nt, &labels, flips, rng)
        }
        _ => {
            // Contiguous arcs, as in the classical examples.
            let cut = rng.random_range(1..n);
            let labels: Vec<usize> = (0..n).map(|p| usize::from(p >= cut)).collect();
            block_mask(n, nt, &labels, 0, rng)
        }
    }
}

pub fn region(src: &str) -> SpacetimeRegion {
    parse_region(src).unwrap()
}

pub fn mask_of(region: &SpacetimeRegion, n: usize) -> RasterMask {
    rasterize(region, Resolution::new(n, region.horizon()).unwrap(), 4).unwrap()
}
