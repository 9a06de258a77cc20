//! Hierarchical mesh configurations shared by the basis tests.

use imig_core::hierarchy::{build_hb, build_thb, HierMesh, LevelSequence, ThbSpace};
use imig_core::spline::TensorBSplineSpace;
use std::collections::BTreeSet;

pub fn mesh_from(base: [usize; 2], levels: &[&dyn Fn(usize, usize) -> bool]) -> HierMesh {
    let mut subs = vec![vec![true; base[0] * base[1]]];
    for (k, f) in levels.iter().enumerate() {
        let l = k + 1;
        let d = [base[0] << l, base[1] << l];
        let mut s = vec![false; d[0] * d[1]];
        for j in 0..d[1] {
            for i in 0..d[0] {
                s[i + d[0] * j] = f(i, j);
            }
        }
        subs.push(s);
    }
    HierMesh::new(base, [0.0, 0.0], [1.0, 1.0], subs).unwrap()
}

/// Three refinement patterns on a 6x6 base grid (cell size 1).
pub fn configurations() -> Vec<HierMesh> {
    vec![
        // nested corner blocks, three levels
        mesh_from([6, 6], &[&|i, j| i < 6 && j < 6, &|i, j| i < 6 && j < 6]),
        // central square, then an off-centre block inside it
        mesh_from([6, 6], &[&|i, j| (2..10).contains(&i) && (2..10).contains(&j), &|i, j| (6..14).contains(&i) && (4..12).contains(&j)]),
        // L-shaped region
        mesh_from([6, 6], &[&|i, j| (i < 4 && j < 12) || (j < 4 && i < 12)]),
    ]
}

pub fn spaces(mesh: HierMesh, p: usize) -> (ThbSpace, ThbSpace) {
    let s = TensorBSplineSpace::uniform([6, 6], [p, p], [0.0, 0.0], [1.0, 1.0]).unwrap();
    let seq = LevelSequence::new(s, mesh).unwrap();
    (build_thb(seq.clone()), build_hb(seq))
}

/// Spans supporting function i of an open uniform space with n spans.
fn support_1d(i: usize, p: usize, n: usize) -> (usize, usize) {
    (i.saturating_sub(p), (i + 1).min(n))
}

/// Three-level refinement by full-height strips on an 8x1 base, with the
/// active (level, index) set enumerated from the definition. The strips make
/// the active set a product of a 1D set with all y-functions of the level.
pub fn strip_case(p: usize) -> (ThbSpace, BTreeSet<(usize, usize)>) {
    let n0 = 8;
    let strip1 = |i: usize| (2..14).contains(&i); // x in [1, 7)
    let strip2 = |i: usize| (8..20).contains(&i); // x in [2, 5)
    let mesh = mesh_from([n0, 1], &[&move |i, _| strip1(i), &move |i, _| strip2(i)]);
    let s = TensorBSplineSpace::uniform([n0, 1], [p, p], [0.0, 0.0], [1.0, 1.0]).unwrap();
    let thb = build_thb(LevelSequence::new(s, mesh).unwrap());
    let inside = |l: usize, lo: usize, hi: usize| -> bool {
        // level-l cells lo..hi all in Omega^l
        (lo..hi).all(|i| match l {
            0 => true,
            1 => strip1(i),
            2 => strip2(i),
            _ => false,
        })
    };
    let mut oracle = BTreeSet::new();
    for l in 0..3 {
        let n = n0 << l;
        let ny = 1usize << l;
        for i in 0..n + p {
            let (lo, hi) = support_1d(i, p, n);
            let in_here = inside(l, lo, hi);
            let in_next = l < 2 && inside(l + 1, 2 * lo, 2 * hi);
            if in_here && !in_next {
                for j in 0..ny + p {
                    oracle.insert((l, i + (n + p) * j));
                }
            }
        }
    }
    (thb, oracle)
}

/// Largest |sum - 1| of the basis over n random points of [0, 6]^2.
pub fn pu_deviation(space: &ThbSpace, seed: u64, n: usize) -> f64 {
    super::random_points(seed, n, [0.0, 0.0], [6.0, 6.0])
        .into_iter()
        .map(|x| (space.eval(x).unwrap().iter().map(|e| e.1).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}
