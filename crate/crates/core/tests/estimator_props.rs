mod common;

use common::{full_mask, mask_of, random_fractional_mask, region};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;
use wavesym::estimator::{
    convergence_trace, gauss_legendre, gram_matrix, indicator_fourier, min_rayleigh, real_coordinates, ModeBand,
};
use wavesym::region::{RasterMask, TRIANGLES};
use wavesym::wave::SpectralState;

/// `∫_G |u_t|²` by a collapsed Gauss rule on every occupied triangle.
fn quadrature_observed(mask: &RasterMask, s: &SpectralState, order: usize) -> f64 {
    let res = mask.resolution();
    let (n, nt, h) = (res.n, res.nt, res.dx());
    let modes = s.modes as i64;
    let gl: Vec<(f64, f64)> = gauss_legendre(order).into_iter().map(|(z, w)| (0.5 * (z + 1.0), 0.5 * w)).collect();
    let ks: Vec<i64> = (-modes..=modes).collect();
    let mut total = 0.0;
    for (k_tri, tri) in TRIANGLES.iter().enumerate() {
        let v = tri.local_vertices();
        for &(u1, w1) in &gl {
            for &(u2, w2) in &gl {
                let lu = v[0].0 + u1 * (v[1].0 - v[0].0) + u1 * u2 * (v[2].0 - v[1].0);
                let lv = v[0].1 + u1 * (v[1].1 - v[0].1) + u1 * u2 * (v[2].1 - v[1].1);
                let weight = w1 * w2 * 2.0 * 0.25 * h * h * u1;
                // time factors per row, space factors per column
                let rows: Vec<Vec<Complex64>> = (0..nt)
                    .map(|i| {
                        let t = (i as f64 + lu) * h;
                        ks.iter()
                            .map(|&k| {
                                if k == 0 {
                                    s.b(0)
                                } else {
                                    let kf = k as f64;
                                    s.b(k) * (kf * t).cos() - s.a(k) * kf * (kf * t).sin()
                                }
                            })
                            .collect()
                    })
                    .collect();
                let cols: Vec<Vec<Complex64>> = (0..n)
                    .map(|j| {
                        let x = (j as f64 + lv) * h;
                        ks.iter().map(|&k| Complex64::from_polar(1.0, k as f64 * x)).collect()
                    })
                    .collect();
                for i in 0..nt {
                    for j in 0..n {
                        let o = mask.quad(i, j)[k_tri];
                        if o == 0.0 {
                            continue;
                        }
                        let ut: f64 = rows[i].iter().zip(&cols[j]).map(|(a, b)| (a * b).re).sum();
                        total += o * weight * ut * ut;
                    }
                }
            }
        }
    }
    total
}

#[test]
fn gram_form_is_exact_on_band_limited_data() {
    let r = region("region { T=2*pi union { polygon { (0.3,0.1) (2.9,1.4) (1.2,4.0) } cylinder { t=[3.5,5.9] x=[2.2,3.7] } } }");
    let mask = mask_of(&r, 256);
    let modes = 32; // n/8
    let spec = indicator_fourier(&mask, 2 * modes).unwrap();
    let gram = gram_matrix(&spec, ModeBand::up_to(modes)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..2 {
        let s = SpectralState::random_band(modes, 0, &mut rng);
        let form = gram.form(&real_coordinates(&s));
        let quad = quadrature_observed(&mask, &s, 6);
        assert!((form - quad).abs() <= 1e-8 * s.energy(), "form {form} vs quadrature {quad}");
    }
}

#[test]
fn plancherel_on_full_square() {
    let n = 128;
    let mask = full_mask(n, n);
    let spec = indicator_fourier(&mask, 32).unwrap();
    let gram = gram_matrix(&spec, ModeBand::up_to(16)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let s = SpectralState::random_band(16, 0, &mut rng);
        let b0 = s.b(0).re;
        let sum: f64 = (1..=16i64).map(|k| 2.0 * ((k * k) as f64 * s.a(k).norm_sqr() + s.b(k).norm_sqr())).sum();
        let want = 2.0 * PI * PI * sum + 4.0 * PI * PI * b0 * b0;
        assert!((gram.form(&real_coordinates(&s)) - want).abs() <= 1e-8 * s.energy());
    }
    assert!((min_rayleigh(&gram).lambda_min - PI).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_is_rotation_invariant(seed in any::<u64>(), k in 0usize..32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 32;
        let mask = random_fractional_mask(n, n, &mut rng);
        let a = convergence_trace(&mask, &[4, 8]).unwrap();
        let b = convergence_trace(&mask.rotate_x(k % n), &[4, 8]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.lambda_min - y.lambda_min).abs() <= 1e-10);
        }
    }

    #[test]
    fn enlarging_g_never_lowers_lambda(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 32;
        let small = common::random_binary_mask(n, n, rng.random_range(0.05..0.5), &mut rng);
        let extra = common::random_binary_mask(n, n, rng.random_range(0.05..0.5), &mut rng);
        let big = small.union(&extra).unwrap();
        for (x, y) in convergence_trace(&small, &[4, 8]).unwrap().iter().zip(&convergence_trace(&big, &[4, 8]).unwrap()) {
            prop_assert!(y.lambda_min >= x.lambda_min - 1e-10);
        }
    }

    #[test]
    fn lambda_never_increases_with_the_band(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = random_fractional_mask(32, 32, &mut rng);
        let t = convergence_trace(&mask, &[2, 4, 8]).unwrap();
        prop_assert!(t[1].lambda_min <= t[0].lambda_min + 1e-10);
        prop_assert!(t[2].lambda_min <= t[1].lambda_min + 1e-10);
    }
}

#[test]
fn spectrum_order_is_limited_by_the_grid() {
    let mask = full_mask(16, 16);
    assert!(indicator_fourier(&mask, 9).is_err());
    assert!(indicator_fourier(&mask, 8).is_ok());
}
