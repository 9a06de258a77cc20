//! Uncut single-material patch and a directly assembled conforming spline oracle.

use imig_core::bench::{thb_space, Field};
use imig_core::foreground::{decomposition_mesh, ForegroundBasis, ForegroundMesh};
use imig_core::geometry::{discretize_lsf, Material, NodalGrid, PhaseConfig};
use imig_core::hierarchy::HierMesh;
use imig_core::physics::{assemble_elastic, assemble_thermal, ElasticProblem, ThermalProblem};
use imig_core::solver::reduce_system;
use imig_core::sparse::Csr;
use std::sync::Arc;

pub const N: [usize; 2] = [4, 3];
pub const H: [f64; 2] = [0.5, 0.4];

/// Single-material, uncut foreground on a uniform background.
pub fn uncut_patch(q: usize, mat: Material) -> (HierMesh, ForegroundMesh, ForegroundBasis) {
    let hi = [N[0] as f64 * H[0], N[1] as f64 * H[1]];
    let grid = NodalGrid::covering(N, [0.0, 0.0], hi).unwrap();
    let fields = vec![discretize_lsf(|_| 1.0, grid, 0.0).unwrap()];
    let phases = PhaseConfig::single(1, mat);
    let bg = HierMesh::uniform(N, [0.0, 0.0], H).unwrap();
    let decomp = decomposition_mesh(&[&bg], 0, 1, &fields, &phases).unwrap();
    let mesh = ForegroundMesh::build(&decomp, &fields, &phases).unwrap();
    let basis = ForegroundBasis::new(&mesh, q).unwrap();
    (bg, mesh, basis)
}

/// Gauss points of every background cell with the tensor B-spline values and
/// gradients of all functions (in THB order) there.
pub fn conforming_quadrature(field: &Field, p: usize) -> Vec<(f64, [f64; 2], Vec<(f64, [f64; 2])>)> {
    let g = super::gauss3();
    let stride = N[0] + p;
    let mut out = vec![];
    for cj in 0..N[1] {
        for ci in 0..N[0] {
            for &(a, wa) in &g {
                for &(b, wb) in &g {
                    let x = [(ci as f64 + a) * H[0], (cj as f64 + b) * H[1]];
                    let vals = field
                        .space
                        .functions()
                        .iter()
                        .map(|f| {
                            assert_eq!(f.level, 0);
                            super::tensor(N, p, [0.0, 0.0], H, [f.index % stride, f.index / stride], x)
                        })
                        .collect();
                    out.push((wa * wb * H[0] * H[1], x, vals));
                }
            }
        }
    }
    out
}

pub fn rel_diff(k: &Csr, dense: &[Vec<f64>]) -> f64 {
    let scale = dense.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let kd = k.to_dense();
    kd.iter().flatten().zip(dense.iter().flatten()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / scale
}

/// Relative differences of the reduced conduction matrix and load from the
/// conforming spline ones, degree p = q on the uncut patch.
pub fn laplacian_mismatch(p: usize) -> (f64, f64) {
    let kappa = 1.7;
    let (bg, mesh, basis) = uncut_patch(p, Material::thermal("a", kappa));
    let field = Field::build(thb_space(bg, p).unwrap(), &mesh, &basis).unwrap();
    let n = field.space.n_functions();
    assert_eq!(field.dofs(), n);
    assert_eq!(n, (N[0] + p) * (N[1] + p));
    // row r is enriched function r is background function r
    assert_eq!(field.extraction.row_ids, (0..n).collect::<Vec<_>>());
    let mut prob = ThermalProblem::new(vec![kappa], 20.0);
    let src = |x: [f64; 2]| 1.0 + x[0] - 2.0 * x[1];
    prob.source = Some(Arc::new(move |x, _| src(x)));
    let red = reduce_system(&assemble_thermal(&prob, &mesh, &basis).unwrap(), &field.extraction).unwrap();
    let mut k = vec![vec![0.0; n]; n];
    let mut f = vec![0.0; n];
    for (w, x, v) in conforming_quadrature(&field, p) {
        for i in 0..n {
            f[i] += w * src(x) * v[i].0;
            for j in 0..n {
                k[i][j] += w * kappa * (v[i].1[0] * v[j].1[0] + v[i].1[1] * v[j].1[1]);
            }
        }
    }
    let fs = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    (rel_diff(&red.k, &k), super::max_abs_diff(&red.f, &f) / fs)
}

/// Same for plane-strain elasticity with interleaved components.
pub fn elasticity_mismatch(p: usize) -> f64 {
    let (lam, mu) = (2.0, 0.8);
    let (bg, mesh, basis) = uncut_patch(p, Material::lame("a", lam, mu));
    let field = Field::build(thb_space(bg, p).unwrap(), &mesh, &basis).unwrap();
    let n = field.space.n_functions();
    let prob = ElasticProblem::from_materials(&[Material::lame("a", lam, mu)], 20.0);
    let red = reduce_system(&assemble_elastic(&prob, &mesh, &basis).unwrap(), &field.extraction.vector()).unwrap();
    // ε(N e_k)_ij = (δ_ik g_j + δ_jk g_i) / 2
    let eps = |g: [f64; 2], k: usize, i: usize, j: usize| {
        0.5 * ((i == k) as u8 as f64 * g[j] + (j == k) as u8 as f64 * g[i])
    };
    let mut k = vec![vec![0.0; 2 * n]; 2 * n];
    for (w, _, v) in conforming_quadrature(&field, p) {
        for a in 0..2 * n {
            for b in 0..2 * n {
                let (ga, ka) = (v[a / 2].1, a % 2);
                let (gb, kb) = (v[b / 2].1, b % 2);
                let mut e = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        e += eps(ga, ka, i, j) * eps(gb, kb, i, j);
                    }
                }
                k[a][b] += w * (lam * ga[ka] * gb[kb] + 2.0 * mu * e);
            }
        }
    }
    rel_diff(&red.k, &k)
}
