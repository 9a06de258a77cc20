mod common;

use common::conforming::*;

use imig_core::geometry::Material;
use imig_core::physics::Block;
use imig_core::solver::{error_norms, reduce, reduce_blocks, solve};
use imig_core::sparse::Csr;
use imig_core::Error;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn reduced_laplacian_matches_conforming_spline_stiffness() {
    for p in 1..=2 {
        let (k, f) = laplacian_mismatch(p);
        assert!(k < 1e-10 && f < 1e-10, "p={p}: {k:e} {f:e}");
    }
}

#[test]
fn reduced_elasticity_matches_conforming_spline_stiffness() {
    for p in 1..=2 {
        let d = elasticity_mismatch(p);
        assert!(d < 1e-10, "p={p}: {d:e}");
    }
}

fn random_csr(rng: &mut impl Rng, r: usize, c: usize, density: f64) -> Csr {
    let rows: Vec<Vec<f64>> = (0..r)
        .map(|_| (0..c).map(|_| if rng.random_bool(density) { rng.random_range(-1.0..1.0) } else { 0.0 }).collect())
        .collect();
    Csr::from_dense(&rows)
}

fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, l) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..l).map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn block_reduction_is_a_triple_product(seed in 0u64..10_000, nr in 1usize..6, nc in 1usize..6, nf in 2usize..9, nb in 0usize..6) {
        let mut rng = common::rng(seed);
        let r = random_csr(&mut rng, nr, nf, 0.5);
        let c = random_csr(&mut rng, nc, nf, 0.5);
        let mut a = vec![vec![0.0; nf]; nf];
        let mut blocks = vec![];
        for _ in 0..nb {
            let rows: Vec<usize> = (0..rng.random_range(1..4)).map(|_| rng.random_range(0..nf)).collect();
            let cols: Vec<usize> = (0..rng.random_range(1..4)).map(|_| rng.random_range(0..nf)).collect();
            let values: Vec<f64> = (0..rows.len() * cols.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    a[ri][cj] += values[i * cols.len() + j];
                }
            }
            blocks.push(Block { rows, cols, values });
        }
        let want = dense_mul(&dense_mul(&r.to_dense(), &a), &transpose(&c.to_dense()));
        let got = reduce_blocks(&r, &blocks, &c).unwrap().to_dense();
        for (g, w) in got.iter().flatten().zip(want.iter().flatten()) {
            prop_assert!((g - w).abs() < 1e-12);
        }
        if nr == nc {
            let b: Vec<f64> = (0..nf).map(|i| i as f64 - 1.0).collect();
            let red = reduce(&Csr::from_dense(&a), &b, &r).unwrap();
            let rd = r.to_dense();
            let want = dense_mul(&dense_mul(&rd, &a), &transpose(&rd));
            for (g, w) in red.k.to_dense().iter().flatten().zip(want.iter().flatten()) {
                prop_assert!((g - w).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn identity_operator_leaves_system_unchanged() {
    let mut rng = common::rng(3);
    let a = random_csr(&mut rng, 7, 7, 0.4);
    let b: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
    let red = reduce(&a, &b, &Csr::identity(7)).unwrap();
    assert_eq!(red.k.to_dense(), a.to_dense());
    assert_eq!(red.f, b);
    assert!(reduce(&a, &b[1..], &Csr::identity(7)).is_err());
}

#[test]
fn direct_solve_matches_elimination() {
    let mut rng = common::rng(11);
    for sym in [true, false] {
        let n = 6;
        let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let a: Vec<Vec<f64>> = if sym {
            let mut a = dense_mul(&g, &transpose(&g));
            (0..n).for_each(|i| a[i][i] += 0.5);
            a
        } else {
            let mut a = g.clone();
            (0..n).for_each(|i| a[i][i] += 4.0);
            a
        };
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rep = solve(&Csr::from_dense(&a), &b).unwrap();
        assert_eq!(rep.method, if sym { "cholesky" } else { "lu" });
        assert!(common::max_abs_diff(&rep.x, &common::dense_solve(&a, &b)) < 1e-12);
        assert!(rep.residual < 1e-14 && rep.diagonal_ratio >= 1.0);
    }
}

#[test]
fn singular_systems_are_reported() {
    let a = Csr::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
    assert!(matches!(solve(&a, &[1.0, 0.0]), Err(Error::Singular(_))));
    let z = Csr::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
    assert!(matches!(solve(&z, &[1.0, 0.0]), Err(Error::Singular(_))));
    assert!(matches!(solve(&Csr::identity(3), &[1.0]), Err(Error::Dimension(_))));
}

#[test]
fn error_norms_of_interpolated_polynomial() {
    for q in 1..=2 {
        let (_, mesh, basis) = uncut_patch(q, Material::thermal("a", 1.0));
        let f = |x: [f64; 2]| 2.0 - x[0] + 0.5 * x[1];
        let v: Vec<f64> = basis.nodes.iter().map(|&x| f(x)).collect();
        let exact = |x: [f64; 2], _| Some(([f(x), 0.0], [[-1.0, 0.5], [0.0; 2]]));
        let (l2, h1) = error_norms(&mesh, &basis, &v, 1, &exact).unwrap();
        assert!(l2 < 1e-13 && h1 < 1e-13);
        // a unit offset has L2 error equal to the root of the area
        let shifted: Vec<f64> = v.iter().map(|x| x + 1.0).collect();
        let (l2, h1) = error_norms(&mesh, &basis, &shifted, 1, &exact).unwrap();
        let area = N[0] as f64 * H[0] * N[1] as f64 * H[1];
        assert!((l2 - area.sqrt()).abs() < 1e-12 && h1 < 1e-13);
        assert!(error_norms(&mesh, &basis, &v, 2, &exact).is_err());
    }
}
