mod common;

use common::hier::*;

use imig_core::hierarchy::{build_thb, HierMesh, LevelSequence};
use imig_core::spline::TensorBSplineSpace;
use proptest::prelude::*;
use std::collections::BTreeSet;

#[test]
fn truncated_basis_sums_to_one_and_hb_does_not() {
    for (k, mesh) in configurations().into_iter().enumerate() {
        for p in 1..=2 {
            let (thb, hb) = spaces(mesh.clone(), p);
            let pts = common::random_points(100 + k as u64, 1000, [0.0, 0.0], [6.0, 6.0]);
            let mut worst_thb: f64 = 0.0;
            let mut worst_hb: f64 = 0.0;
            for &x in &pts {
                let e = thb.eval(x).unwrap();
                assert!(e.iter().all(|(_, v)| *v >= -1e-14));
                worst_thb = worst_thb.max((e.iter().map(|e| e.1).sum::<f64>() - 1.0).abs());
                worst_hb = worst_hb.max((hb.eval(x).unwrap().iter().map(|e| e.1).sum::<f64>() - 1.0).abs());
            }
            assert!(worst_thb < 1e-12, "config {k} p={p}: {worst_thb}");
            assert!(worst_hb > 1e-2, "config {k} p={p}: HB deviation only {worst_hb}");
        }
    }
}

#[test]
fn active_set_matches_enumeration_on_strips() {
    for p in 1..=2 {
        let (thb, oracle) = strip_case(p);
        let got: BTreeSet<(usize, usize)> = thb.functions().iter().map(|f| (f.level, f.index)).collect();
        assert_eq!(got, oracle, "p={p}");
        assert_eq!(thb.n_functions(), oracle.len());
    }
}

#[test]
fn linear_field_keeps_level_coefficients() {
    // truncation keeps the level coefficients of a polynomial; for p = 1 those
    // of x are the node abscissae of each level
    let mesh = configurations().remove(1);
    let (thb, _) = spaces(mesh, 1);
    let coef: Vec<f64> = thb
        .functions()
        .iter()
        .map(|f| {
            let l = f.level;
            let n = 6usize << l;
            let i = f.index % (n + 1);
            i as f64 * 6.0 / n as f64
        })
        .collect();
    for x in common::random_points(7, 300, [0.0, 0.0], [6.0, 6.0]) {
        let v: f64 = thb.eval(x).unwrap().iter().map(|&(f, b)| coef[f] * b).sum();
        assert!((v - x[0]).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_refinement_keeps_partition_of_unity(
        p in 1usize..=2,
        marks in prop::collection::vec(any::<bool>(), 16),
        ring in 0usize..2,
        seed in 0u64..1000,
    ) {
        let base = HierMesh::uniform([4, 4], [0.0, 0.0], [1.0, 1.0]).unwrap();
        let m1 = base.refined(1, ring, |lo, _| marks[lo[0] as usize + 4 * lo[1] as usize]).unwrap();
        let m2 = m1.refined(1, 0, |lo, _| lo[0] < 2.0 && lo[1] < 2.0).unwrap();
        let s = TensorBSplineSpace::uniform([4, 4], [p, p], [0.0, 0.0], [1.0, 1.0]).unwrap();
        let thb = build_thb(LevelSequence::new(s, m2).unwrap());
        for x in common::random_points(seed, 50, [0.0, 0.0], [4.0, 4.0]) {
            let e = thb.eval(x).unwrap();
            prop_assert!(e.iter().all(|(_, v)| *v >= -1e-14));
            prop_assert!((e.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
