//! Solvers for `u_tt − u_xx = f·1_G` on the torus.
//!
//! The primary solver works with the characteristic derivatives
//! `p = u_ξ = ½(u_x + u_t)` and `q = u_η = ½(u_x − u_t)`. For free waves
//! they are constant along `ξ`- and `η`-lines respectively. On the grid
//! `dt = dx` with samples at `x_j = (j + ½)·dx`, one time step is an exact
//! circular shift: `p_{i+1}[j] = p_i[j+1]` and `q_{i+1}[j] = q_i[j−1]`.
//! Forcing enters along each characteristic segment through the triangle
//! occupancies it crosses: `∂_t p = f/2` along `ξ`-lines and
//! `∂_t q = −f/2` along `η`-lines.
//!
//! Grid data are piecewise constant on bins. Each raster triangle lies in a
//! single `(ξ, η)` bin pair, so observed energies of free waves are exact
//! sums.
//!
//! Fourier convention: `û(k) = (1/2π)∫u e^{−ikx}dx`, `‖u‖² = 2πΣ|û(k)|²`.

use rand::{Rng, SeedableRng};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::region::{RasterMask, Resolution, TRIANGLES};

/// Initial data `(∂_x u₀, u₁)` sampled at `x_j = (j + ½)·2π/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveState {
    pub u0x: Vec<f64>,
    pub u1: Vec<f64>,
}

impl WaveState {
    pub fn new(u0x: Vec<f64>, u1: Vec<f64>) -> Result<Self> {
        if u0x.len() != u1.len() || u0x.is_empty() {
            return Err(Error::InvalidInput(format!(
                "u0x has {} samples but u1 has {}",
                u0x.len(),
                u1.len()
            )));
        }
        Ok(Self { u0x, u1 })
    }

    /// Builds data from `p = u_ξ|_{t=0}` and `q = u_η|_{t=0}`.
    pub fn from_characteristic(p: &[f64], q: &[f64]) -> Self {
        Self {
            u0x: p.iter().zip(q).map(|(a, b)| a + b).collect(),
            u1: p.iter().zip(q).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.u0x.len()
    }

    pub fn p(&self) -> Vec<f64> {
        self.u0x.iter().zip(&self.u1).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn q(&self) -> Vec<f64> {
        self.u0x.iter().zip(&self.u1).map(|(a, b)| 0.5 * (a - b)).collect()
    }

    /// Mean of `∂_x u₀`; zero for data coming from some `u₀ ∈ Ḣ¹`.
    pub fn u0x_mean(&self) -> f64 {
        self.u0x.iter().sum::<f64>() / self.n() as f64
    }

    /// Removes the mean of `∂_x u₀`.
    pub fn remove_u0x_mean(&mut self) {
        let m = self.u0x_mean();
        self.u0x.iter_mut().for_each(|v| *v -= m);
    }

    /// Scales the data by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            u0x: self.u0x.iter().map(|v| v * s).collect(),
            u1: self.u1.iter().map(|v| v * s).collect(),
        }
    }
}

/// `E = ‖∂_x u₀‖² + ‖u₁‖² = 2(‖p‖² + ‖q‖²)`.
pub fn total_energy(state: &WaveState) -> f64 {
    let dx = TAU / state.n() as f64;
    dx * state
        .u0x
        .iter()
        .zip(&state.u1)
        .map(|(a, b)| a * a + b * b)
        .sum::<f64>()
}

/// Fourier data of `(u₀, u₁)` for `|k| ≤ modes`, stored at index `k + modes`.
/// Real data satisfy `a_{−k} = conj(a_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub modes: usize,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl SpectralState {
    pub fn zeros(modes: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); 2 * modes + 1];
        Self {
            modes,
            a: z.clone(),
            b: z,
        }
    }

    pub fn a(&self, k: i64) -> Complex64 {
        self.a[(k + self.modes as i64) as usize]
    }

    pub fn b(&self, k: i64) -> Complex64 {
        self.b[(k + self.modes as i64) as usize]
    }

    /// Sets `a_k` and `a_{−k} = conj(a_k)`.
    pub fn set_a(&mut self, k: i64, v: Complex64) {
        let m = self.modes as i64;
        self.a[(k + m) as usize] = v;
        self.a[(m - k) as usize] = v.conj();
    }

    /// Sets `b_k` and `b_{−k} = conj(b_k)`.
    pub fn set_b(&mut self, k: i64, v: Complex64) {
        let m = self.modes as i64;
        self.b[(k + m) as usize] = v;
        self.b[(m - k) as usize] = v.conj();
    }

    /// Random real data on the band `lo ≤ |k| ≤ modes`, coefficients uniform
    /// in the unit square, with `a_k` scaled by `1/k` so that both energy
    /// components are comparable. `lo = 0` also draws `b₀`.
    pub fn random_band<R: Rng>(modes: usize, lo: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(modes);
        let draw = |rng: &mut R| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for k in lo.max(1)..=modes {
            let a = draw(rng) / k as f64;
            let b = draw(rng);
            s.set_a(k as i64, a);
            s.set_b(k as i64, b);
        }
        if lo == 0 {
            s.set_b(0, Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        }
        s
    }

    /// [`SpectralState::random_band`] driven by a ChaCha8 stream seeded
    /// with `seed`, reproducible across platforms.
    pub fn seeded_band(modes: usize, lo: usize, seed: u64) -> Self {
        Self::random_band(modes, lo, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    /// `‖∂_x u₀‖² + ‖u₁‖² = 2π Σ (k²|a_k|² + |b_k|²)`.
    pub fn energy(&self) -> f64 {
        let m = self.modes as i64;
        TAU * (-m..=m)
            .map(|k| (k * k) as f64 * self.a(k).norm_sqr() + self.b(k).norm_sqr())
            .sum::<f64>()
    }

    /// Samples `(∂_x u₀, u₁)` at the grid points of an `n`-bin grid.
    pub fn to_grid(&self, n: usize) -> WaveState {
        let m = self.modes as i64;
        let dx = TAU / n as f64;
        let (u0x, u1) = (0..n)
            .map(|j| {
                let x = (j as f64 + 0.5) * dx;
                (-m..=m).fold((0.0, 0.0), |(ux, v), k| {
                    let e = Complex64::from_polar(1.0, k as f64 * x);
                    let ik = Complex64::new(0.0, k as f64);
                    (ux + (ik * self.a(k) * e).re, v + (self.b(k) * e).re)
                })
            })
            .unzip();
        WaveState { u0x, u1 }
    }
}

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    CharacteristicExact,
    Spectral,
    CharacteristicForced,
    Transport,
}

/// Characteristic fields `p = u_ξ`, `q = u_η` at the grid points, one row
/// per stored time. For grid trajectories row `i` is time `i·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl Trajectory {
    pub fn levels(&self) -> usize {
        self.times.len()
    }

    pub fn u_t(&self, i: usize) -> Vec<f64> {
        self.p[i].iter().zip(&self.q[i]).map(|(a, b)| a - b).collect()
    }

    pub fn u_x(&self, i: usize) -> Vec<f64> {
        self.p[i].iter().zip(&self.q[i]).map(|(a, b)| a + b).collect()
    }

    /// `‖u_x(t_i)‖² + ‖u_t(t_i)‖²`.
    pub fn energy(&self, i: usize) -> f64 {
        let dx = TAU / self.n as f64;
        2.0 * dx * self.p[i].iter().chain(&self.q[i]).map(|v| v * v).sum::<f64>()
    }
}

fn shift_left(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|j| v[(j + 1) % n]).collect()
}

fn shift_right(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|j| v[(j + n - 1) % n]).collect()
}

fn check_width(state: &WaveState, res: Resolution) -> Result<()> {
    if state.n() != res.n {
        return Err(Error::InvalidInput(format!(
            "data have {} samples but the grid has {} bins",
            state.n(),
            res.n
        )));
    }
    Ok(())
}

/// Exact free evolution on the grid `dt = dx` for `res.nt` steps.
pub fn solve_free_wave(state: &WaveState, res: Resolution) -> Result<Trajectory> {
    check_width(state, res)?;
    let mut p = vec![state.p()];
    let mut q = vec![state.q()];
    for i in 0..res.nt {
        p.push(shift_left(&p[i]));
        q.push(shift_right(&q[i]));
    }
    Ok(Trajectory {
        n: res.n,
        dt: res.dt(),
        times: (0..=res.nt).map(|i| i as f64 * res.dt()).collect(),
        p,
        q,
        provenance: Provenance::CharacteristicExact,
    })
}

/// Free evolution from Fourier data,
/// `u = a₀ + b₀t + Σ_{k≠0} (c_k e^{ik(x+t)} + d_k e^{ik(x−t)})` with
/// `c_k = ½(a_k + b_k/(ik))` and `d_k = ½(a_k − b_k/(ik))`, sampled at the
/// grid points of an `n`-bin grid at the requested times.
pub fn solve_free_wave_spectral(state: &SpectralState, n: usize, times: &[f64]) -> Result<Trajectory> {
    if state.modes < 1 {
        return Err(Error::InvalidInput("at least one Fourier mode is required".into()));
    }
    let m = state.modes as i64;
    // p = ½b₀ + Σ ik c_k e^{ikξ},  q = −½b₀ + Σ ik d_k e^{ikη}.
    let mut ikc = Vec::new();
    let mut ikd = Vec::new();
    for k in (-m..=m).filter(|&k| k != 0) {
        let ik = Complex64::new(0.0, k as f64);
        let c = 0.5 * (state.a(k) + state.b(k) / ik);
        let d = 0.5 * (state.a(k) - state.b(k) / ik);
        ikc.push((k, ik * c));
        ikd.push((k, ik * d));
    }
    let b0 = state.b(0).re;
    let dx = TAU / n as f64;
    let eval = |coef: &[(i64, Complex64)], s: f64| {
        coef.iter()
            .map(|&(k, c)| (c * Complex64::from_polar(1.0, k as f64 * s)).re)
            .sum::<f64>()
    };
    let mut p = Vec::with_capacity(times.len());
    let mut q = Vec::with_capacity(times.len());
    for &t in times {
        let xs = (0..n).map(|j| (j as f64 + 0.5) * dx);
        p.push(xs.clone().map(|x| 0.5 * b0 + eval(&ikc, x + t)).collect());
        q.push(xs.map(|x| -0.5 * b0 + eval(&ikd, x - t)).collect());
    }
    Ok(Trajectory {
        n,
        dt: dx,
        times: times.to_vec(),
        p,
        q,
        provenance: Provenance::Spectral,
    })
}

/// Transport `u_t ± u_x = 0`: `direction = +1` gives `u = f₀(x − t)` (stored
/// in `q`, carried by `η`-lines), `direction = −1` gives `u = f₀(x + t)`
/// (stored in `p`, carried by `ξ`-lines). The other field is zero.
pub fn solve_transport(f0: &[f64], direction: i32, res: Resolution) -> Result<Trajectory> {
    if f0.len() != res.n {
        return Err(Error::InvalidInput(format!(
            "datum has {} samples but the grid has {} bins",
            f0.len(),
            res.n
        )));
    }
    let zero = vec![0.0; res.n];
    let (p0, q0) = match direction {
        1 => (zero.as_slice(), f0),
        -1 => (f0, zero.as_slice()),
        _ => return Err(Error::InvalidInput("transport direction must be +1 or -1".into())),
    };
    let mut traj = solve_free_wave(&WaveState::from_characteristic(p0, q0), res)?;
    traj.provenance = Provenance::Transport;
    Ok(traj)
}

/// Force density sampled per cell, `f[i*n + j]` for cell `(i, j)`. The
/// effective source is `f·1_G` with the mask's triangle occupancies.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub nt: usize,
    pub n: usize,
    pub f: Vec<f64>,
}

impl Forcing {
    pub fn new(nt: usize, n: usize, f: Vec<f64>) -> Result<Self> {
        if f.len() != nt * n {
            return Err(Error::InvalidInput(format!(
                "forcing has {} samples, expected {nt}×{n}",
                f.len()
            )));
        }
        Ok(Self { nt, n, f })
    }

    pub fn zero(res: Resolution) -> Self {
        Self::constant(res, 0.0)
    }

    pub fn constant(res: Resolution, value: f64) -> Self {
        Self {
            nt: res.nt,
            n: res.n,
            f: vec![value; res.nt * res.n],
        }
    }

    /// Samples `f(t, x)` at cell centres.
    pub fn from_fn(res: Resolution, f: impl Fn(f64, f64) -> f64) -> Self {
        let dx = res.dx();
        let f = (0..res.nt * res.n)
            .map(|c| {
                let (i, j) = (c / res.n, c % res.n);
                f((i as f64 + 0.5) * dx, (j as f64 + 0.5) * dx)
            })
            .collect();
        Self {
            nt: res.nt,
            n: res.n,
            f,
        }
    }

    /// Independent uniform samples in `[−1, 1]`.
    pub fn random<R: Rng>(res: Resolution, rng: &mut R) -> Self {
        Self {
            nt: res.nt,
            n: res.n,
            f: (0..res.nt * res.n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.f[i * self.n + j]
    }

    /// `‖f‖_{L²(G)}`.
    pub fn l2_on(&self, mask: &RasterMask) -> f64 {
        let dx = mask.resolution().dx();
        let s: f64 = (0..self.nt * self.n)
            .map(|c| {
                let occ: f64 = mask.quad(c / self.n, c % self.n).iter().sum();
                self.f[c] * self.f[c] * occ
            })
            .sum();
        (s * dx * dx / 4.0).sqrt()
    }

    fn check(&self, mask: &RasterMask) -> Result<()> {
        if self.nt != mask.nt() || self.n != mask.n() {
            return Err(Error::InvalidInput(format!(
                "forcing grid {}×{} does not match mask grid {}×{}",
                self.nt,
                self.n,
                mask.nt(),
                mask.n()
            )));
        }
        Ok(())
    }
}

/// Forced evolution `u_tt − u_xx = f·1_G` on the mask's grid.
pub fn solve_forced_wave(state: &WaveState, forcing: &Forcing, mask: &RasterMask) -> Result<Trajectory> {
    let res = mask.resolution();
    check_width(state, res)?;
    forcing.check(mask)?;
    let n = res.n;
    let c = res.dx() / 8.0;
    let mut p = vec![state.p()];
    let mut q = vec![state.q()];
    for i in 0..res.nt {
        let src = |j: usize| {
            let o = mask.quad(i, j);
            (forcing.at(i, j), o)
        };
        let mut pn = shift_left(&p[i]);
        let mut qn = shift_right(&q[i]);
        for j in 0..n {
            // ξ-segment ending at x_j: upper-right half of cell j, then the
            // lower-left half of cell j+1.
            let (f0, o0) = src(j);
            let (f1, o1) = src((j + 1) % n);
            pn[j] += c * (f0 * (o0[2] + o0[3]) + f1 * (o1[0] + o1[1]));
            // η-segment ending at x_j: upper-left half of cell j, then the
            // lower-right half of cell j−1.
            let (f2, o2) = src((j + n - 1) % n);
            qn[j] -= c * (f0 * (o0[0] + o0[3]) + f2 * (o2[1] + o2[2]));
        }
        p.push(pn);
        q.push(qn);
    }
    Ok(Trajectory {
        n,
        dt: res.dt(),
        times: (0..=res.nt).map(|i| i as f64 * res.dt()).collect(),
        p,
        q,
        provenance: Provenance::CharacteristicForced,
    })
}

/// Values of `(p, q)` seen by the four triangles of cell `(i, j)`.
fn cell_values(traj: &Trajectory, i: usize, j: usize) -> [(f64, f64); 4] {
    let n = traj.n;
    let (p, q) = (&traj.p[i], &traj.q[i]);
    let (jp, jm) = ((j + 1) % n, (j + n - 1) % n);
    [(p[j], q[jm]), (p[j], q[j]), (p[jp], q[j]), (p[jp], q[jm])]
}

fn check_levels(traj: &Trajectory, mask: &RasterMask) -> Result<()> {
    if traj.n != mask.n() || traj.levels() < mask.nt() + 1 {
        return Err(Error::InvalidInput(format!(
            "trajectory ({} bins, {} levels) does not cover the mask ({} bins, {} steps)",
            traj.n,
            traj.levels(),
            mask.n(),
            mask.nt()
        )));
    }
    Ok(())
}

/// `∫_G |u_t|²`, exact for free grid trajectories.
pub fn observed_energy(traj: &Trajectory, mask: &RasterMask) -> Result<f64> {
    check_levels(traj, mask)?;
    Ok(observed_series(traj, mask).last().copied().unwrap_or(0.0))
}

/// `∫_{G ∩ [0, t_i]} |u_t|²` for `i = 0..=nt`.
pub fn observed_series(traj: &Trajectory, mask: &RasterMask) -> Vec<f64> {
    let w = mask.resolution().dx().powi(2) / 4.0;
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for i in 0..mask.nt().min(traj.levels().saturating_sub(1)) {
        for j in 0..traj.n {
            let o = mask.quad(i, j);
            let v = cell_values(traj, i, j);
            for k in 0..4 {
                if o[k] != 0.0 {
                    let d = v[k].0 - v[k].1;
                    acc += o[k] * w * d * d;
                }
            }
        }
        out.push(acc);
    }
    out
}

/// `∫_G |u|²` for a transport trajectory.
pub fn transport_observed_energy(traj: &Trajectory, mask: &RasterMask) -> Result<f64> {
    observed_energy(traj, mask)
}

fn bin_set(n: usize, set: &[usize]) -> Vec<bool> {
    let mut v = vec![false; n];
    for &b in set {
        v[b % n] = true;
    }
    v
}

/// `I(t_i) = ∫_{A−t}(u_x + u_t) + ∫_{B+t}(u_x − u_t)` at grid level `i`,
/// with `A` a set of `ξ`-bins and `B` a set of `η`-bins.
pub fn conservation_functional(traj: &Trajectory, xi_set: &[usize], eta_set: &[usize], i: usize) -> f64 {
    let n = traj.n;
    let dx = TAU / n as f64;
    let shift = i % n;
    let a: f64 = xi_set.iter().map(|&k| traj.p[i][(k % n + n - shift) % n]).sum();
    let b: f64 = eta_set.iter().map(|&k| traj.q[i][(k % n + shift) % n]).sum();
    2.0 * dx * (a + b)
}

/// Which characteristic family a Green identity is taken along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Xi,
    Eta,
}

/// Both sides of a Green identity over the horizon `[0, T]`:
///
/// * `ξ` side: `∫_A U(0) − ∫_{A−T} U(T) = −∬_{G∩L_{ξ∈A}} f`,
/// * `η` side: `∫_{B+T} V(T) − ∫_B V(0) = −∬_{G∩L_{η∈B}} f`,
///
/// with `U = u_x + u_t = 2p` and `V = u_x − u_t = 2q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

impl GreenIdentity {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Boundary terms of a Green identity for a forced trajectory.
pub fn green_identity_lhs(traj: &Trajectory, set: &[usize], side: Side) -> f64 {
    let n = traj.n;
    let last = traj.levels() - 1;
    let dx = TAU / n as f64;
    let s = last % n;
    let ind = bin_set(n, set);
    let mut acc = 0.0;
    for k in (0..n).filter(|&k| ind[k]) {
        acc += match side {
            Side::Xi => traj.p[0][k] - traj.p[last][(k + n - s) % n],
            Side::Eta => traj.q[last][(k + s) % n] - traj.q[0][k],
        };
    }
    2.0 * dx * acc
}

/// `−∬_{G ∩ L} f` over the triangles whose `ξ`-bin (or `η`-bin) is in `set`.
pub fn green_identity_rhs(forcing: &Forcing, mask: &RasterMask, set: &[usize], side: Side) -> Result<f64> {
    forcing.check(mask)?;
    let n = mask.n();
    let ind = bin_set(n, set);
    let w = mask.resolution().dx().powi(2) / 4.0;
    let mut acc = 0.0;
    for i in 0..mask.nt() {
        for j in 0..n {
            let o = mask.quad(i, j);
            for t in TRIANGLES {
                let (p, q) = t.bins(i, j, n);
                let bin = if side == Side::Xi { p } else { q };
                if ind[bin] {
                    acc += forcing.at(i, j) * o[t as usize] * w;
                }
            }
        }
    }
    Ok(-acc)
}

/// Both sides of the Green identity for `set` along `side`.
pub fn green_identity(traj: &Trajectory, forcing: &Forcing, mask: &RasterMask, set: &[usize], side: Side) -> Result<GreenIdentity> {
    check_levels(traj, mask)?;
    Ok(GreenIdentity {
        lhs: green_identity_lhs(traj, set, side),
        rhs: green_identity_rhs(forcing, mask, set, side)?,
    })
}

/// `|lhs − rhs|` of the Green identity.
pub fn green_identity_residual(traj: &Trajectory, forcing: &Forcing, mask: &RasterMask, set: &[usize], side: Side) -> Result<f64> {
    Ok(green_identity(traj, forcing, mask, set, side)?.residual())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn full(res: Resolution) -> RasterMask {
        RasterMask::from_cells(res, &vec![1.0; res.n * res.nt]).unwrap()
    }

    #[test]
    fn spike_travels_left() {
        let res = Resolution::with_steps(16, 5).unwrap();
        let mut p = vec![0.0; 16];
        p[7] = 1.0;
        let traj = solve_free_wave(&WaveState::from_characteristic(&p, &[0.0; 16]), res).unwrap();
        for i in 0..=5 {
            let ut = traj.u_t(i);
            assert_eq!(ut[7 - i], 1.0);
            assert_eq!(ut.iter().filter(|&&v| v != 0.0).count(), 1);
            assert_eq!(traj.energy(i), traj.energy(0));
        }
    }

    #[test]
    fn spectral_zero_mode_and_standing_wave() {
        let mut s = SpectralState::zeros(2);
        s.set_b(0, Complex64::new(1.0, 0.0));
        let t = solve_free_wave_spectral(&s, 8, &[0.3, 1.7]).unwrap();
        assert!(t.u_t(1).iter().all(|v| (v - 1.0).abs() < 1e-14));
        let mut s = SpectralState::zeros(1);
        s.set_a(1, Complex64::new(0.5, 0.0)); // u₀ = cos x
        let n = 16;
        let t = solve_free_wave_spectral(&s, n, &[0.9]).unwrap();
        for j in 0..n {
            let x = (j as f64 + 0.5) * TAU / n as f64;
            assert!((t.u_x(0)[j] + x.sin() * 0.9f64.cos()).abs() < 1e-14);
            assert!((t.u_t(0)[j] + x.cos() * 0.9f64.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn solvers_agree_on_band_limited_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SpectralState::random_band(8, 1, &mut rng);
        let res = Resolution::with_steps(64, 40).unwrap();
        let grid = solve_free_wave(&s.to_grid(64), res).unwrap();
        let spec = solve_free_wave_spectral(&s, 64, &grid.times).unwrap();
        for i in 0..grid.levels() {
            for j in 0..64 {
                assert!((grid.p[i][j] - spec.p[i][j]).abs() < 1e-11);
                assert!((grid.q[i][j] - spec.q[i][j]).abs() < 1e-11);
            }
        }
        assert!((total_energy(&s.to_grid(64)) - s.energy()).abs() < 1e-10 * s.energy());
    }

    #[test]
    fn zero_forcing_reduces_to_free_solution() {
        let res = Resolution::with_steps(12, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = SpectralState::random_band(3, 0, &mut rng).to_grid(12);
        let free = solve_free_wave(&state, res).unwrap();
        let forced = solve_forced_wave(&state, &Forcing::zero(res), &full(res)).unwrap();
        assert_eq!(free.p, forced.p);
        assert_eq!(free.q, forced.q);
    }

    #[test]
    fn constant_forcing_on_full_square() {
        // u = f t²/2 for spatially constant f: u_t = f t, u_x = 0.
        let res = Resolution::with_steps(32, 20).unwrap();
        let state = WaveState::from_characteristic(&[0.0; 32], &[0.0; 32]);
        let traj = solve_forced_wave(&state, &Forcing::constant(res, 3.0), &full(res)).unwrap();
        for i in 0..=20 {
            let t = i as f64 * res.dt();
            assert!(traj.u_t(i).iter().all(|v| (v - 3.0 * t).abs() < 1e-12));
            assert!(traj.u_x(i).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn green_identities_hold_at_raster_level() {
        let res = Resolution::with_steps(16, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w: Vec<f64> = (0..256).map(|_| rng.random_range(0.0..1.0)).collect();
        let mask = RasterMask::from_cells(res, &w).unwrap();
        let forcing = Forcing::random(res, &mut rng);
        let state = SpectralState::random_band(4, 0, &mut rng).to_grid(16);
        let traj = solve_forced_wave(&state, &forcing, &mask).unwrap();
        let set = [1, 2, 3, 9, 15];
        for side in [Side::Xi, Side::Eta] {
            let g = green_identity(&traj, &forcing, &mask, &set, side).unwrap();
            assert!(g.residual() < 1e-12, "{side:?}: {g:?}");
        }
    }

    #[test]
    fn transport_on_full_square() {
        let res = Resolution::new(32, TAU).unwrap();
        let f0: Vec<f64> = (0..32).map(|j| (j as f64 * 0.37).sin()).collect();
        let traj = solve_transport(&f0, 1, res).unwrap();
        let norm: f64 = f0.iter().map(|v| v * v).sum::<f64>() * res.dx();
        let obs = transport_observed_energy(&traj, &full(res)).unwrap();
        assert!((obs - TAU * norm).abs() < 1e-10);
    }
}
