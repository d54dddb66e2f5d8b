//! Observability, unique continuation and controllability of the 1D wave
//! equation `u_tt − u_xx = f·1_G` on the torus `𝕋 = ℝ/2πℤ`, for spacetime
//! observation regions `G ⊂ [0,T] × 𝕋`.
//!
//! The pipeline is:
//!
//! 1. [`region`] — describe `G` in a small text language and rasterize it on
//!    a characteristic-aligned grid (`dt = dx`).
//! 2. [`geometry`] — measure `G` along every characteristic line and decide
//!    the geometric control condition (GCC) and its weak form.
//! 3. [`symmetry`] — find observable-symmetry pairs `(A, B)` through the
//!    bipartite fiber graph and build initial data invisible on `G`.
//! 4. [`wave`] — exact characteristic and spectral solvers, energies, the
//!    conservation functional and Green identities.
//! 5. [`estimator`] — the observation quadratic form over truncated Fourier
//!    data, its minimal Rayleigh quotient and the high-frequency threshold.
//! 6. [`verdict`] — combine the above into yes / no / indeterminate verdicts
//!    for observability, unique continuation and controllability.
//! 7. [`report`] — report rendering, images and file formats.

pub mod error;
pub mod estimator;
pub mod geometry;
pub mod region;
pub mod report;
pub mod symmetry;
pub mod verdict;
pub mod wave;

pub use error::{Error, Result};
