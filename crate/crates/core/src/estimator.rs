//! Quantitative observability over trigonometric data.
//!
//! A free wave with band-limited data reads
//! `u_t = b₀ + Σ_{k=1}^{N} (α_k cos kξ + β_k sin kξ + γ_k cos kη + δ_k sin kη)`,
//! with `ξ = x + t`, `η = x − t`. In the real coordinates
//! `c = (b₀, α₁, β₁, γ₁, δ₁, …)` the energy is `E = 2π|c|²` and the observed
//! energy is the quadratic form `∫_G |u_t|² = cᵀQc`. Entries of `Q` are
//! Fourier coefficients of the mask, which are computed exactly: each
//! triangle of the raster contributes a closed-form kernel times a 2D FFT
//! of its occupancies.
//!
//! The smallest eigenvalue of `Q/2π` is the best constant `λ` in
//! `∫_G|u_t|² ≥ λ·E` over the trial space. Its inverse is the observability
//! constant.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::FiberData;
use crate::region::{CharCoord, RasterMask};
use crate::wave::{SpectralState, WaveState};

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        // Chebyshev initial guess, then Newton on P_m.
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Quadrature points used for the triangle kernels.
const KERNEL_POINTS: usize = 16;

/// `∫_{−h}^{0} e^{−i a s} · 2|s| · sinc(b|s|) ds`: the transform of the
/// bottom triangle `{s ∈ [−h, 0], |y| ≤ |s|}` of a cell, relative to the
/// cell centre.
fn bottom_kernel(a: f64, b: f64, h: f64, gl: &[(f64, f64)]) -> Complex64 {
    gl.iter()
        .map(|&(z, w)| {
            let s = -0.5 * h * (z + 1.0);
            let r = -s;
            let sinc = if (b * r).abs() < 1e-8 {
                1.0 - (b * r).powi(2) / 6.0
            } else {
                (b * r).sin() / (b * r)
            };
            Complex64::from_polar(w * 0.5 * h * 2.0 * r * sinc, -a * s)
        })
        .sum()
}

/// Exact Fourier integrals of the occupancy function of a mask,
/// `S(α) = ∫∫ g(t, x) e^{−i(α₁t + α₂x)} dt dx`, for `|α₁|, |α₂| ≤ M`.
/// The time axis is folded modulo `2π`, so for integer frequencies `S` is
/// exact on `[0, T_eff] × 𝕋` for any horizon.
#[derive(Debug, Clone)]
pub struct IndicatorSpectrum {
    pub n: usize,
    pub max_order: usize,
    data: Vec<Complex64>,
    /// `Σ_{α∈ℤ²} |ĝ(α)|²` computed in physical space (Parseval).
    pub total_power: f64,
}

impl IndicatorSpectrum {
    fn index(&self, a1: i64, a2: i64) -> Option<usize> {
        let m = self.max_order as i64;
        if a1.abs() > m || a2.abs() > m {
            return None;
        }
        let w = (2 * m + 1) as usize;
        Some((a1 + m) as usize * w + (a2 + m) as usize)
    }

    /// `S(α₁, α₂)`; panics outside the stored range.
    pub fn integral(&self, a1: i64, a2: i64) -> Complex64 {
        let idx = self
            .index(a1, a2)
            .unwrap_or_else(|| panic!("frequency ({a1}, {a2}) beyond order {}", self.max_order));
        self.data[idx]
    }

    /// Normalized coefficient `ĝ(α) = S(α)/4π²`.
    pub fn coefficient(&self, a1: i64, a2: i64) -> Complex64 {
        self.integral(a1, a2) / (4.0 * PI * PI)
    }

    /// `(Σ_{|α|² > 2N²} |ĝ(α)|²)^{1/2}`, using Parseval for the part beyond
    /// the stored range. Requires `√2·N ≤ M`.
    pub fn tail(&self, order: usize) -> f64 {
        let m = self.max_order as i64;
        let r2 = 2 * (order as i64).pow(2);
        let mut inner = 0.0;
        for a1 in -m..=m {
            for a2 in -m..=m {
                if a1 * a1 + a2 * a2 <= r2 {
                    inner += self.coefficient(a1, a2).norm_sqr();
                }
            }
        }
        (self.total_power - inner).max(0.0).sqrt()
    }
}

/// Computes the Fourier integrals of a mask up to order `M ≤ n/2`.
pub fn indicator_fourier(mask: &RasterMask, max_order: usize) -> Result<IndicatorSpectrum> {
    let n = mask.n();
    if max_order > n / 2 {
        return Err(Error::SpectrumOrder {
            requested: max_order,
            limit: n / 2,
        });
    }
    let h = mask.resolution().dx();
    // Fold rows modulo n (time period 2π) per triangle orientation.
    let mut folded = vec![vec![Complex64::new(0.0, 0.0); n * n]; 4];
    let mut power_grid = vec![[0.0f64; 4]; n * n];
    for i in 0..mask.nt() {
        for j in 0..n {
            let o = mask.quad(i, j);
            let c = (i % n) * n + j;
            for k in 0..4 {
                folded[k][c].re += o[k];
                power_grid[c][k] += o[k];
            }
        }
    }
    let total_power = power_grid
        .iter()
        .flat_map(|q| q.iter())
        .map(|v| v * v)
        .sum::<f64>()
        * h
        * h
        / 4.0
        / (4.0 * PI * PI);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    for grid in &mut folded {
        // Rows (x direction), then columns (t direction).
        for row in grid.chunks_mut(n) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = grid[i * n + j];
            }
            fft.process(&mut col);
            for i in 0..n {
                grid[i * n + j] = col[i];
            }
        }
    }
    let gl = gauss_legendre(KERNEL_POINTS);
    let m = max_order as i64;
    let w = (2 * m + 1) as usize;
    let mut data = vec![Complex64::new(0.0, 0.0); w * w];
    let half = 0.5 * h;
    for a1 in -m..=m {
        for a2 in -m..=m {
            let (f1, f2) = (a1 as f64, a2 as f64);
            let kernels = [
                bottom_kernel(f2, f1, half, &gl),  // left
                bottom_kernel(f1, f2, half, &gl),  // bottom
                bottom_kernel(-f2, f1, half, &gl), // right
                bottom_kernel(-f1, f2, half, &gl), // top
            ];
            let shift = Complex64::from_polar(1.0, -(f1 + f2) * half);
            let c = a1.rem_euclid(n as i64) as usize * n + a2.rem_euclid(n as i64) as usize;
            let s: Complex64 = (0..4).map(|k| kernels[k] * folded[k][c]).sum();
            data[(a1 + m) as usize * w + (a2 + m) as usize] = s * shift;
        }
    }
    Ok(IndicatorSpectrum {
        n,
        max_order,
        data,
        total_power,
    })
}

/// Range of wave numbers in a trial space: `lo ≤ k ≤ hi`, plus the constant
/// velocity mode `b₀` when `lo = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeBand {
    pub lo: usize,
    pub hi: usize,
}

impl ModeBand {
    pub fn up_to(n_modes: usize) -> Self {
        Self { lo: 0, hi: n_modes }
    }

    pub fn has_constant(&self) -> bool {
        self.lo == 0
    }

    fn first_k(&self) -> usize {
        self.lo.max(1)
    }

    /// Number of real coordinates.
    pub fn dim(&self) -> usize {
        usize::from(self.has_constant()) + 4 * (self.hi + 1 - self.first_k())
    }
}

/// One real basis function of `u_t`.
#[derive(Debug, Clone, Copy)]
enum Basis {
    Constant,
    /// `cos(k ζ)` or `sin(k ζ)` with `ζ = x + σt`.
    Wave { k: i64, sigma: i64, sine: bool },
}

fn basis(band: ModeBand) -> Vec<Basis> {
    let mut v = Vec::with_capacity(band.dim());
    if band.has_constant() {
        v.push(Basis::Constant);
    }
    for k in band.first_k()..=band.hi {
        for (sigma, sine) in [(1, false), (1, true), (-1, false), (-1, true)] {
            v.push(Basis::Wave {
                k: k as i64,
                sigma,
                sine,
            });
        }
    }
    v
}

/// Observed-energy quadratic form `Q` on a mode band.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub band: ModeBand,
    pub q: DMatrix<f64>,
}

impl GramMatrix {
    /// `cᵀQc`.
    pub fn form(&self, c: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(c);
        (v.transpose() * &self.q * &v)[(0, 0)]
    }
}

/// `∫_G φ_a φ_b` for two basis functions.
fn entry(spec: &IndicatorSpectrum, a: Basis, b: Basis) -> f64 {
    // ∫ g e^{i(θ₁t + θ₂x)} = S(−θ₁, −θ₂).
    let s = |t: i64, x: i64| spec.integral(-t, -x);
    match (a, b) {
        (Basis::Constant, Basis::Constant) => s(0, 0).re,
        (Basis::Constant, Basis::Wave { k, sigma, sine }) | (Basis::Wave { k, sigma, sine }, Basis::Constant) => {
            let v = s(sigma * k, k);
            if sine {
                v.im
            } else {
                v.re
            }
        }
        (
            Basis::Wave {
                k,
                sigma,
                sine: sa,
            },
            Basis::Wave {
                k: l,
                sigma: tau,
                sine: sb,
            },
        ) => {
            let minus = s(sigma * k - tau * l, k - l);
            let plus = s(sigma * k + tau * l, k + l);
            match (sa, sb) {
                (false, false) => 0.5 * (minus.re + plus.re),
                (true, true) => 0.5 * (minus.re - plus.re),
                (false, true) => 0.5 * (plus.im - minus.im),
                (true, false) => 0.5 * (plus.im + minus.im),
            }
        }
    }
}

/// Assembles `Q` on a band; the spectrum must reach order `2·hi`.
pub fn gram_matrix(spec: &IndicatorSpectrum, band: ModeBand) -> Result<GramMatrix> {
    if 2 * band.hi > spec.max_order {
        return Err(Error::SpectrumOrder {
            requested: 2 * band.hi,
            limit: spec.max_order,
        });
    }
    let b = basis(band);
    let d = b.len();
    let mut q = DMatrix::zeros(d, d);
    for r in 0..d {
        for c in r..d {
            let v = entry(spec, b[r], b[c]);
            q[(r, c)] = v;
            q[(c, r)] = v;
        }
    }
    Ok(GramMatrix { band, q })
}

/// Real coordinates of spectral data on `0 ≤ k ≤ modes`.
pub fn real_coordinates(state: &SpectralState) -> Vec<f64> {
    let mut c = vec![state.b(0).re];
    for k in 1..=state.modes as i64 {
        let ik = Complex64::new(0.0, k as f64);
        let p = 0.5 * (ik * state.a(k) + state.b(k));
        let q = 0.5 * (ik * state.a(k) - state.b(k));
        c.extend([2.0 * p.re, -2.0 * p.im, -2.0 * q.re, 2.0 * q.im]);
    }
    c
}

/// Grid data `(∂_x u₀, u₁)` for real coordinates on a band.
pub fn coordinates_to_state(band: ModeBand, c: &[f64], n: usize) -> WaveState {
    let b = basis(band);
    let dx = TAU / n as f64;
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for (coef, f) in c.iter().zip(&b) {
        for j in 0..n {
            let x = (j as f64 + 0.5) * dx;
            match *f {
                Basis::Constant => {
                    p[j] += 0.5 * coef;
                    q[j] -= 0.5 * coef;
                }
                Basis::Wave { k, sigma, sine } => {
                    let phase = k as f64 * x;
                    let v = coef * if sine { phase.sin() } else { phase.cos() };
                    if sigma == 1 {
                        p[j] += v;
                    } else {
                        q[j] -= v;
                    }
                }
            }
        }
    }
    WaveState::from_characteristic(&p, &q)
}

/// Smallest ratio `∫_G|u_t|²/E` over a trial space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub band: ModeBand,
    pub lambda_min: f64,
    /// Real coordinates of a minimizer, normalized to `E = 1`.
    pub argmin: Vec<f64>,
}

impl EstimatorResult {
    /// `1/λ_min`, the observability constant on the trial space.
    pub fn observability_constant(&self) -> Option<f64> {
        (self.lambda_min > 0.0).then(|| 1.0 / self.lambda_min)
    }
}

/// Minimal generalized Rayleigh quotient of `(Q, 2π·I)`.
pub fn min_rayleigh(gram: &GramMatrix) -> EstimatorResult {
    let eig = SymmetricEigen::new(gram.q.clone() / TAU);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty band");
    let v = eig.eigenvectors.column(idx);
    let scale = 1.0 / TAU.sqrt();
    EstimatorResult {
        band: gram.band,
        lambda_min: lambda.max(0.0),
        argmin: v.iter().map(|x| x * scale).collect(),
    }
}

/// `λ_min` for each trial order, from a single spectrum.
pub fn convergence_trace(mask: &RasterMask, orders: &[usize]) -> Result<Vec<EstimatorResult>> {
    let top = orders.iter().copied().max().unwrap_or(1);
    let spec = indicator_fourier(mask, 2 * top)?;
    orders
        .iter()
        .map(|&n| Ok(min_rayleigh(&gram_matrix(&spec, ModeBand::up_to(n))?)))
        .collect()
}

/// Outcome of the high-frequency threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighFrequencyThreshold {
    pub order: usize,
    pub tail: f64,
    /// The constant `c` the tail was compared with (`tail ≤ c/10`).
    pub c0: f64,
    /// `c/2 − π·tail`: certified lower bound of `∫_G|u_t|²/E` for data
    /// without modes `|k| ≤ order`.
    pub guaranteed_ratio: f64,
}

/// Smallest `N` with `(Σ_{|α|²>2N²}|ĝ(α)|²)^{1/2} ≤ c0/10`.
///
/// For data without modes `|k| ≤ N` the cross term of `∫_G|u_ξ − u_η|²`
/// only involves coefficients with `|α|² > 2N²`, which gives
/// `∫_G|u_t|² ≥ (c0/2 − π·tail)·E` with `c0` the least time a
/// characteristic spends in `G`.
pub fn high_freq_threshold(spec: &IndicatorSpectrum, c0: f64) -> Result<HighFrequencyThreshold> {
    if c0 <= 0.0 {
        return Err(Error::InvalidInput("the fiber constant must be positive".into()));
    }
    let max_n = (spec.max_order as f64 / std::f64::consts::SQRT_2).floor() as usize;
    let target = c0 / 10.0;
    let mut best = f64::INFINITY;
    for order in 1..=max_n.max(1) {
        let tail = spec.tail(order);
        best = best.min(tail);
        if tail <= target {
            return Ok(HighFrequencyThreshold {
                order,
                tail,
                c0,
                guaranteed_ratio: 0.5 * c0 - PI * tail,
            });
        }
    }
    Err(Error::TailUnreachable {
        threshold: target,
        best_tail: best,
        max_order: max_n,
    })
}

/// Result of sampling the high-frequency inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighFrequencyCheck {
    pub band: ModeBand,
    pub trials: usize,
    /// Smallest sampled `∫_G|u_t|²/E`.
    pub worst_ratio: f64,
    /// Exact minimum of the ratio on the band.
    pub band_lambda_min: f64,
    /// Certified lower bound from the threshold.
    pub guaranteed_ratio: f64,
}

/// Samples random data on the modes `N < k ≤ min(N + 32, M/2)` and records
/// the worst observed ratio.
pub fn verify_high_freq_inequality<R: Rng>(
    spec: &IndicatorSpectrum,
    threshold: &HighFrequencyThreshold,
    trials: usize,
    rng: &mut R,
) -> Result<HighFrequencyCheck> {
    let hi = (threshold.order + 32).min(spec.max_order / 2);
    if hi <= threshold.order {
        return Err(Error::SpectrumOrder {
            requested: 2 * (threshold.order + 1),
            limit: spec.max_order,
        });
    }
    let band = ModeBand {
        lo: threshold.order + 1,
        hi,
    };
    let gram = gram_matrix(spec, band)?;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let c: Vec<f64> = (0..band.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let e = TAU * c.iter().map(|v| v * v).sum::<f64>();
        worst = worst.min(gram.form(&c) / e);
    }
    Ok(HighFrequencyCheck {
        band,
        trials,
        worst_ratio: worst,
        band_lambda_min: min_rayleigh(&gram).lambda_min,
        guaranteed_ratio: threshold.guaranteed_ratio,
    })
}

/// Best constant `c` in `∫_G |u|² ≥ c‖u₀‖²` for transport `u_t ± u_x = 0`:
/// the least time a characteristic of the transported family spends in `G`.
/// `direction = +1` (`u = u₀(x − t)`) follows `η`-lines, `−1` follows
/// `ξ`-lines.
pub fn transport_obs_constant(fibers: &FiberData, direction: i32) -> Result<f64> {
    match direction {
        1 => Ok(fibers.essential_min(CharCoord::Eta).max(0.0)),
        -1 => Ok(fibers.essential_min(CharCoord::Xi).max(0.0)),
        _ => Err(Error::InvalidInput("transport direction must be +1 or -1".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Resolution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn full(n: usize) -> RasterMask {
        let res = Resolution::new(n, TAU).unwrap();
        RasterMask::from_cells(res, &vec![1.0; n * res.nt]).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(16);
        let w: f64 = gl.iter().map(|p| p.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let x30: f64 = gl.iter().map(|&(x, w)| w * x.powi(30)).sum();
        assert!((x30 - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn full_square_spectrum_and_gram() {
        let spec = indicator_fourier(&full(32), 16).unwrap();
        assert!((spec.coefficient(0, 0).re - 1.0).abs() < 1e-13);
        for a1 in -16..=16 {
            for a2 in -16..=16 {
                if (a1, a2) != (0, 0) {
                    assert!(spec.coefficient(a1, a2).norm() < 1e-13);
                }
            }
        }
        assert!(spec.tail(1) < 1e-6);
        let r = min_rayleigh(&gram_matrix(&spec, ModeBand::up_to(8)).unwrap());
        assert!((r.lambda_min - PI).abs() < 1e-10);
    }

    #[test]
    fn single_triangle_transform_matches_quadrature() {
        // One occupied right triangle of cell (2, 5); the oracle integrates
        // over it with a collapsed (Duffy) Gauss rule.
        let res = Resolution::with_steps(8, 8).unwrap();
        let mut quads = vec![[0.0; 4]; 64];
        quads[2 * 8 + 5] = [0.0, 0.0, 1.0, 0.0];
        let mask = RasterMask::from_quadrants(res, quads).unwrap();
        let spec = indicator_fourier(&mask, 4).unwrap();
        let h = res.dx();
        let v = crate::region::Triangle::Right.local_vertices();
        let pt = |k: usize| ((2.0 + v[k].0) * h, (5.0 + v[k].1) * h);
        let (p0, p1, p2) = (pt(0), pt(1), pt(2));
        let area = 0.25 * h * h;
        let gl: Vec<(f64, f64)> = gauss_legendre(20)
            .into_iter()
            .map(|(z, w)| (0.5 * (z + 1.0), 0.5 * w))
            .collect();
        for (a1, a2) in [(0i64, 0i64), (1, 2), (-3, 4), (4, -1)] {
            let mut s = Complex64::new(0.0, 0.0);
            for &(u1, w1) in &gl {
                for &(u2, w2) in &gl {
                    let t = p0.0 + u1 * (p1.0 - p0.0) + u1 * u2 * (p2.0 - p1.0);
                    let x = p0.1 + u1 * (p1.1 - p0.1) + u1 * u2 * (p2.1 - p1.1);
                    let jac = 2.0 * area * u1;
                    s += Complex64::from_polar(w1 * w2 * jac, -(a1 as f64 * t + a2 as f64 * x));
                }
            }
            let got = spec.integral(a1, a2);
            assert!((s - got).norm() < 1e-13, "α = ({a1},{a2}): {s} vs {got}");
        }
    }

    #[test]
    fn gram_form_matches_plancherel_on_full_square() {
        let spec = indicator_fourier(&full(64), 16).unwrap();
        let gram = gram_matrix(&spec, ModeBand::up_to(8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let s = SpectralState::random_band(8, 0, &mut rng);
            let c = real_coordinates(&s);
            let b0 = s.b(0).re;
            let want = PI * (s.energy() - TAU * b0 * b0) + 4.0 * PI * PI * b0 * b0;
            assert!((gram.form(&c) - want).abs() < 1e-9 * s.energy());
            let e = TAU * c.iter().map(|v| v * v).sum::<f64>();
            assert!((e - s.energy()).abs() < 1e-10 * e);
        }
    }

    #[test]
    fn coordinates_round_trip_through_grid_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SpectralState::random_band(5, 0, &mut rng);
        let c = real_coordinates(&s);
        let a = coordinates_to_state(ModeBand::up_to(5), &c, 32);
        let b = s.to_grid(32);
        for j in 0..32 {
            assert!((a.u0x[j] - b.u0x[j]).abs() < 1e-12);
            assert!((a.u1[j] - b.u1[j]).abs() < 1e-12);
        }
    }
}
