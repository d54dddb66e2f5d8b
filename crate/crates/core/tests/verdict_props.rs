mod common;

use common::{mask_of, mixed_mask, random_binary_mask, region};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use wavesym::region::{figure1_region, figure2_region, rasterize, CircleArc, Resolution, TimeInterval};
use wavesym::verdict::{
    classify, classify_open_everywhere, classify_product, gcc_necessity_check, Tri, WitnessKind,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn verdict_classes_follow_from_the_evidence(seed in any::<u64>(), n in 4usize..24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = mixed_mask(n, &mut rng);
        prop_assume!(mask.measure() > 0.0);
        let v = classify(&mask).unwrap();
        prop_assert_eq!(v.recompose(), (v.observable, v.ucp));
        prop_assert_eq!(v.controllable, v.observable);
        // Observability implies unique continuation.
        if v.observable == Tri::Yes {
            prop_assert_eq!(v.ucp, Tri::Yes);
        }
        // A weak-GCC failure rules out observability outright.
        if !v.gcc.weak_holds {
            prop_assert_eq!(v.observable, Tri::No);
        }
        // Every negative or undecided verdict carries evidence.
        if v.observable != Tri::Yes {
            prop_assert!(v.witness.is_some());
        }
        if let Some(w) = &v.witness {
            if matches!(w.kind, WitnessKind::SymmetryPair | WitnessKind::ZeroFiber) && v.observable == Tri::No {
                let dt = TAU / n as f64;
                prop_assert!(w.ratio() <= 5.0 * dt, "{:?} ratio {}", w.kind, w.ratio());
            }
        }
    }

    #[test]
    fn enlarging_g_keeps_observability(seed in any::<u64>(), n in 4usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = mixed_mask(n, &mut rng);
        prop_assume!(g.measure() > 0.0);
        let nt = g.resolution().nt;
        let h = random_binary_mask(n, nt, rng.random_range(0.05..0.5), &mut rng);
        let before = classify(&g).unwrap();
        let after = classify(&g.union(&h).unwrap()).unwrap();
        if before.observable == Tri::Yes {
            prop_assert_eq!(after.observable, Tri::Yes);
        }
        prop_assert!(after.gcc.c0_est >= before.gcc.c0_est - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn product_fast_path_agrees_with_full_analysis(
        t0 in 0.0f64..3.0, tl in 0.5f64..6.0, x0 in 0.0f64..6.0, xl in 0.3f64..6.0,
        n in prop::sample::select(vec![64usize, 128]),
    ) {
        let t1 = (t0 + tl).min(TAU);
        let times = [TimeInterval { lo: t0, hi: t1 }];
        let arcs = [CircleArc::new(x0, x0 + xl).unwrap()];
        let fast = classify_product(&times, &arcs, TAU, n, 4).unwrap();
        let src = format!("region {{ T=2*pi product {{ t={{[{t0},{t1}]}} x={{[{x0},{}]}} }} }}", x0 + xl);
        let full = classify(&mask_of(&region(&src), n)).unwrap();
        prop_assert_eq!(fast.gcc.c0_est, full.gcc.c0_est);
        prop_assert_eq!(fast.observable, full.observable, "c0 = {}", fast.gcc.c0_est);
        // The sum condition is necessary for the GCC on a product.
        if fast.observable == Tri::Yes {
            prop_assert!(fast.product.unwrap().sum_condition);
        }
    }
}

#[test]
fn figures_are_not_observable_with_invisible_witnesses() {
    for (fig, n) in [(figure1_region().0, 128), (figure2_region().0, 256)] {
        let mask = rasterize(&fig, Resolution::new(n, fig.horizon()).unwrap(), 4).unwrap();
        let v = classify(&mask).unwrap();
        assert_eq!((v.observable, v.ucp, v.controllable), (Tri::No, Tri::No, Tri::No));
        assert!(v.gcc.holds, "both figures satisfy the GCC");
        let w = v.witness.unwrap();
        assert_eq!(w.kind, WitnessKind::SymmetryPair);
        assert!(w.ratio() <= 5.0 * TAU / n as f64, "ratio {}", w.ratio());
    }
}

#[test]
fn gcc_necessity_probes() {
    // Square minus a thin η-band: a sub-bin neighbourhood of one η-line is
    // nearly missed.
    let eps = 0.25 * TAU / 64.0;
    let thin = region(&format!(
        "region {{ T=2*pi diff {{ cylinder {{ t=[0,2*pi] x=[0,2*pi] }} charband {{ eta=[1,{}] }} }} }}",
        1.0 + eps
    ));
    let fig2 = figure2_region().0;
    let full = region("region { T=2*pi cylinder { t=[0,2*pi] x=[0,2*pi] } }");
    for r in [thin, fig2, full] {
        let rep = gcc_necessity_check(&mask_of(&r, 64), 6).unwrap();
        assert!(rep.all_pass, "{:?}", rep.probes);
    }
    // A band wider than a bin leaves a bin with no mass, and so no energy.
    let band = region("region { T=2*pi diff { cylinder { t=[0,2*pi] x=[0,2*pi] } charband { eta=[1,1.5] } } }");
    let rep = gcc_necessity_check(&mask_of(&band, 64), 2).unwrap();
    assert!(rep.all_pass);
    assert!(rep.min_wave_ratio < 1e-12);
}

#[test]
fn open_regions_observed_by_every_line() {
    let cyl = region("region { T=2*pi cylinder { t=[0,2*pi] x=[0,pi] } }");
    let v = classify_open_everywhere(&mask_of(&cyl, 64), &cyl).unwrap();
    assert_eq!(v.observable, Tri::Yes);
    assert!(v.gcc.c0_every_line > PI - 0.1);
    // A strip around one ξ-line: parallel ξ-lines outside it never enter.
    let strip = region("region { T=2*pi charband { xi=[1,2] } }");
    let v = classify_open_everywhere(&mask_of(&strip, 64), &strip).unwrap();
    assert_eq!(v.observable, Tri::No);
    assert!(v.reasons[0].contains("falls back") || v.reasons[0].contains("falling back"));
}

#[test]
fn empty_region_is_an_input_error() {
    let r = region("region { T=2*pi cylinder { t=[0,1e-9] x=[0,1e-9] } }");
    assert!(classify(&mask_of(&r, 16)).is_err());
    assert!(classify_product(&[], &[CircleArc::new(0.0, 1.0).unwrap()], TAU, 16, 4).is_err());
}
