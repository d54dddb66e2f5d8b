mod common;

use common::{block_mask, mixed_mask};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavesym::geometry::{check_gcc, fiber_profiles};
use wavesym::symmetry::{brute_force_osc, build_fiber_graph, detect_osc, osc_check_pair, witness_from_pair, SymmetryVerdict};
use wavesym::wave::{conservation_functional, observed_energy, solve_forced_wave, solve_free_wave, total_energy, Forcing};

fn pair_sets(v: &SymmetryVerdict) -> Option<(Vec<usize>, Vec<usize>)> {
    match v {
        SymmetryVerdict::Pair { xi_set, eta_set, .. } => Some((xi_set.clone(), eta_set.clone())),
        _ => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn detection_matches_exhaustive_search(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 6, 8, 10])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = mixed_mask(n, &mut rng);
        let f = fiber_profiles(&mask);
        let fast = detect_osc(&f, &check_gcc(&f));
        let slow = brute_force_osc(&f).unwrap();
        prop_assert_eq!(fast.class_name(), slow.class_name());
        for v in [&fast, &slow] {
            if let Some((a, b)) = pair_sets(v) {
                prop_assert_eq!(osc_check_pair(&f, &a, &b), 0.0);
            }
        }
    }

    #[test]
    fn class_count_is_bounded_by_c0(seed in any::<u64>(), n in 4usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = mixed_mask(n, &mut rng);
        let f = fiber_profiles(&mask);
        let gcc = check_gcc(&f);
        if gcc.c0_est > 0.0 {
            // A characteristic winds T/π times, so classes shrink like
            // 2π·c0/T once T exceeds 2π.
            let k = build_fiber_graph(&f).component_count();
            let span = f.t_eff().max(std::f64::consts::TAU);
            prop_assert!(k <= (span / gcc.c0_est + 1e-9).floor() as usize + 1, "K = {}, c0 = {}, T = {}", k, gcc.c0_est, f.t_eff());
        }
    }

    #[test]
    fn detection_commutes_with_rotation(seed in any::<u64>(), n in 4usize..14, k in 0usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = mixed_mask(n, &mut rng);
        let k = k % n;
        let f = fiber_profiles(&mask);
        let g = fiber_profiles(&mask.rotate_x(k));
        let (v, w) = (detect_osc(&f, &check_gcc(&f)), detect_osc(&g, &check_gcc(&g)));
        prop_assert_eq!(v.class_name(), w.class_name());
        if let (Some((a, b)), Some(_)) = (pair_sets(&v), pair_sets(&w)) {
            // The rotated pair is a pair of the rotated mask, though the
            // reported representative may be a different class.
            let a2: Vec<usize> = a.iter().map(|p| (p + k) % n).collect();
            let b2: Vec<usize> = b.iter().map(|q| (q + k) % n).collect();
            prop_assert_eq!(osc_check_pair(&g, &a2, &b2), 0.0);
            let mut classes: Vec<Vec<usize>> = match (&v, &w) {
                (SymmetryVerdict::Pair { decomposition: d, .. }, _) => d.classes.iter().map(|c| {
                    let mut s: Vec<usize> = c.xi_bins.iter().map(|p| (p + k) % n).collect();
                    s.sort_unstable();
                    s
                }).collect(),
                _ => unreachable!(),
            };
            let mut rotated: Vec<Vec<usize>> = match &w {
                SymmetryVerdict::Pair { decomposition: d, .. } => d.classes.iter().map(|c| c.xi_bins.clone()).collect(),
                _ => unreachable!(),
            };
            classes.sort();
            rotated.sort();
            prop_assert_eq!(classes, rotated);
        }
    }

    #[test]
    fn witnesses_of_exact_pairs_are_invisible_and_conserve(seed in any::<u64>(), n in prop::sample::select(vec![6usize, 8, 12, 16])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let nt = rng.random_range(n / 2..=2 * n);
        let mask = block_mask(n, nt, &labels, 0, &mut rng);
        let f = fiber_profiles(&mask);
        let v = detect_osc(&f, &check_gcc(&f));
        if let Some((a, b)) = pair_sets(&v) {
            let res = mask.resolution();
            let w = witness_from_pair(&a, &b, res).unwrap();
            let e = total_energy(&w.state);
            let traj = solve_free_wave(&w.state, res).unwrap();
            prop_assert!(observed_energy(&traj, &mask).unwrap() <= res.dx() * e * 1e-12);
            // Any forcing supported in G leaves the pair functional unchanged.
            let forcing = Forcing::random(res, &mut rng);
            let forced = solve_forced_wave(&w.state, &forcing, &mask).unwrap();
            let i0 = conservation_functional(&forced, &a, &b, 0);
            for i in 0..forced.levels() {
                let drift = (conservation_functional(&forced, &a, &b, i) - i0).abs();
                prop_assert!(drift <= 1e-10 * (1.0 + i0.abs()), "drift {} at level {}", drift, i);
            }
        }
    }
}

#[test]
fn two_blocks_at_n8_form_the_expected_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let labels: Vec<usize> = (0..8).map(|p| usize::from(p >= 4)).collect();
    let mask = block_mask(8, 8, &labels, 0, &mut rng);
    let f = fiber_profiles(&mask);
    let v = detect_osc(&f, &check_gcc(&f));
    let (a, b) = pair_sets(&v).expect("pair");
    assert_eq!(a.len(), 4);
    assert_eq!(a, b);
    assert_eq!(brute_force_osc(&f).unwrap().class_name(), "pair");
}

#[test]
fn brute_force_rejects_large_grids() {
    let mask = common::full_mask(16, 16);
    assert!(brute_force_osc(&fiber_profiles(&mask)).is_err());
}
