//! Reduction of foreground systems to background unknowns, sparse direct
//! solves and error norms.

use crate::error::{Error, Result};
use crate::extraction::ExtractionOperator;
use crate::foreground::{ForegroundBasis, ForegroundMesh};
use crate::physics::{Assembled, Block};
use crate::sparse::Csr;
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub k: Csr,
    pub f: Vec<f64>,
}

/// K = M A Mᵀ and f = M b for an operator M with rows on the reduced unknowns.
pub fn reduce(a: &Csr, b: &[f64], m: &Csr) -> Result<ReducedSystem> {
    if a.nrows != m.ncols || a.ncols != m.ncols || b.len() != m.ncols {
        return Err(Error::Dimension(format!(
            "system {}x{} with {} entries against operator {}x{}",
            a.nrows,
            a.ncols,
            b.len(),
            m.nrows,
            m.ncols
        )));
    }
    let k = m.matmul(&a.matmul(&m.transpose())?)?;
    let f = m.mul_vec(b)?;
    Ok(ReducedSystem { k, f })
}

/// R A Cᵀ for A given as element blocks, accumulated on a symbolic pattern
/// in block order so the result is independent of the thread count.
pub fn reduce_blocks(r: &Csr, blocks: &[Block], c: &Csr) -> Result<Csr> {
    let rt = r.transpose();
    let ct = c.transpose();
    for b in blocks {
        if b.rows.iter().any(|&i| i >= rt.nrows) || b.cols.iter().any(|&j| j >= ct.nrows) {
            return Err(Error::Dimension("block index outside the extraction operator".into()));
        }
    }
    let gather = |t: &Csr, dofs: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = dofs.iter().flat_map(|&d| t.row(d).0.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let sym: Vec<(Vec<usize>, Vec<usize>)> =
        blocks.par_iter().map(|b| (gather(&rt, &b.rows), gather(&ct, &b.cols))).collect();

    let mut row_blocks: Vec<Vec<usize>> = vec![vec![]; r.nrows];
    for (k, (br, _)) in sym.iter().enumerate() {
        for &i in br {
            row_blocks[i].push(k);
        }
    }
    let pattern: Vec<Vec<usize>> = row_blocks
        .par_iter()
        .map(|bs| {
            let mut v: Vec<usize> = bs.iter().flat_map(|&k| sym[k].1.iter().copied()).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    drop(row_blocks);
    let mut indptr = Vec::with_capacity(r.nrows + 1);
    indptr.push(0);
    for p in &pattern {
        indptr.push(indptr.last().unwrap() + p.len());
    }
    let indices: Vec<usize> = pattern.into_iter().flatten().collect();
    let mut values = vec![0.0; indices.len()];

    const CHUNK: usize = 4096;
    for start in (0..blocks.len()).step_by(CHUNK) {
        let end = (start + CHUNK).min(blocks.len());
        let local: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|k| {
                let b = &blocks[k];
                let (br, bc) = &sym[k];
                let (nr, nc) = (b.rows.len(), b.cols.len());
                // T = B Cᵀ restricted to columns bc
                let mut t = vec![0.0; nr * bc.len()];
                for (j, &dof) in b.cols.iter().enumerate() {
                    let (gi, gv) = ct.row(dof);
                    for (&g, &v) in gi.iter().zip(gv) {
                        let s = bc.binary_search(&g).unwrap();
                        for i in 0..nr {
                            t[i * bc.len() + s] += b.values[i * nc + j] * v;
                        }
                    }
                }
                let mut out = vec![0.0; br.len() * bc.len()];
                for (i, &dof) in b.rows.iter().enumerate() {
                    let (gi, gv) = rt.row(dof);
                    for (&g, &v) in gi.iter().zip(gv) {
                        let s = br.binary_search(&g).unwrap();
                        for q in 0..bc.len() {
                            out[s * bc.len() + q] += v * t[i * bc.len() + q];
                        }
                    }
                }
                out
            })
            .collect();
        for (k, out) in (start..end).zip(local) {
            let (br, bc) = &sym[k];
            for (s, &i) in br.iter().enumerate() {
                let row = &indices[indptr[i]..indptr[i + 1]];
                let base = indptr[i];
                let mut p = 0;
                for (q, &j) in bc.iter().enumerate() {
                    while row[p] != j {
                        p += 1;
                    }
                    values[base + p] += out[s * bc.len() + q];
                }
            }
        }
    }
    Ok(Csr { nrows: r.nrows, ncols: c.nrows, indptr, indices, values })
}

/// Reduce a foreground system through one extraction operator.
pub fn reduce_system(a: &Assembled, m: &ExtractionOperator) -> Result<ReducedSystem> {
    if a.n_rows != m.n_nodes() || a.n_cols != m.n_nodes() {
        return Err(Error::Dimension(format!(
            "system of size {} against operator with {} columns",
            a.n_rows,
            m.n_nodes()
        )));
    }
    let k = reduce_blocks(&m.matrix, &a.blocks, &m.matrix)?;
    let f = m.matrix.mul_vec(&a.rhs)?;
    Ok(ReducedSystem { k, f })
}

/// Largest accepted relative residual of a direct solve.
pub const SOLVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// ‖f − Kx‖ / ‖f‖ after refinement (absolute when f = 0)
    pub residual: f64,
    /// max |K_ii| / min |K_ii|
    pub diagonal_ratio: f64,
    pub method: &'static str,
}

fn to_faer(k: &Csr) -> Result<SparseColMat<usize, f64>> {
    let mut t = Vec::with_capacity(k.nnz());
    for r in 0..k.nrows {
        let (cols, vals) = k.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            t.push(Triplet::new(r, c, v));
        }
    }
    SparseColMat::try_new_from_triplets(k.nrows, k.ncols, &t).map_err(|e| Error::Input(format!("{e:?}")))
}

fn residual(k: &Csr, x: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    let kx = k.mul_vec(x)?;
    Ok(f.iter().zip(kx).map(|(a, b)| a - b).collect())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diagonal_ratio(k: &Csr) -> f64 {
    let d = k.diagonal();
    let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v.abs()), hi.max(v.abs())));
    hi / lo
}

/// Direct sparse solve: Cholesky, falling back to LU, then one step of
/// iterative refinement.
pub fn solve(k: &Csr, f: &[f64]) -> Result<SolveReport> {
    if k.nrows != k.ncols || f.len() != k.nrows {
        return Err(Error::Dimension(format!("{}x{} system with {} right-hand entries", k.nrows, k.ncols, f.len())));
    }
    let diag = k.diagonal();
    if let Some(i) = diag.iter().position(|&v| v == 0.0) {
        return Err(Error::Singular(format!("zero diagonal at unknown {i}")));
    }
    let a = to_faer(k)?;
    let rhs = |v: &[f64]| Mat::<f64>::from_fn(v.len(), 1, |i, _| v[i]);
    let col = |m: Mat<f64>| (0..m.nrows()).map(|i| m[(i, 0)]).collect::<Vec<f64>>();
    let symmetric = k.asymmetry() <= 1e-12;
    let (mut x, solver, method): (Vec<f64>, Box<dyn Fn(&[f64]) -> Vec<f64>>, &'static str) =
        match symmetric.then(|| a.sp_cholesky(Side::Lower)) {
            Some(Ok(llt)) => {
                let x = col(llt.solve(&rhs(f)));
                (x, Box::new(move |v: &[f64]| col(llt.solve(&rhs(v)))), "cholesky")
            }
            other => {
                if let Some(Err(e)) = other {
                    log::warn!("cholesky failed ({e:?}), falling back to LU");
                }
                let lu = a.sp_lu().map_err(|e| Error::Singular(format!("LU factorization failed: {e:?}")))?;
                let x = col(lu.solve(&rhs(f)));
                (x, Box::new(move |v: &[f64]| col(lu.solve(&rhs(v)))), "lu")
            }
        };
    let r = residual(k, &x, f)?;
    let dx = solver(&r);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    let r = residual(k, &x, f)?;
    let fn_ = norm(f);
    let res = if fn_ > 0.0 { norm(&r) / fn_ } else { norm(&r) };
    if !(res <= SOLVE_TOL) || x.iter().any(|v| !v.is_finite()) {
        let worst = (0..diag.len()).min_by(|&a, &b| diag[a].abs().total_cmp(&diag[b].abs())).unwrap_or(0);
        return Err(Error::Singular(format!(
            "relative residual {res:e} after {method}; smallest diagonal {:e} at unknown {worst}",
            diag[worst]
        )));
    }
    Ok(SolveReport { x, residual: res, diagonal_ratio: diagonal_ratio(k), method })
}

/// Reduced one-way coupled thermo-elastic system.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub thermal: ReducedSystem,
    pub elastic: ReducedSystem,
    /// K^{vθ} = M_u A^{vθ} M_Tᵀ
    pub coupling: Csr,
    /// load from the reference temperature, −T₀ M_u A^{vθ} 1
    pub reference_load: Vec<f64>,
}

impl CoupledSystem {
    pub fn new(
        thermal: ReducedSystem,
        elastic: ReducedSystem,
        coupling: &Assembled,
        m_t: &ExtractionOperator,
        m_u: &ExtractionOperator,
        t_ref: f64,
    ) -> Result<Self> {
        let k = reduce_blocks(&m_u.matrix, &coupling.blocks, &m_t.matrix)?;
        let mut ones = vec![0.0; coupling.n_rows];
        for b in &coupling.blocks {
            for (i, &r) in b.rows.iter().enumerate() {
                ones[r] += b.values[i * b.cols.len()..(i + 1) * b.cols.len()].iter().sum::<f64>();
            }
        }
        let reference_load = m_u.matrix.mul_vec(&ones)?.into_iter().map(|v| -t_ref * v).collect();
        Ok(CoupledSystem { thermal, elastic, coupling: k, reference_load })
    }
}

#[derive(Debug, Clone)]
pub struct CoupledSolution {
    pub d_t: Vec<f64>,
    pub d_u: Vec<f64>,
    pub thermal: Option<SolveReport>,
    pub elastic: Option<SolveReport>,
    pub residual: f64,
}

/// Temperature first, then displacement under the resulting thermal load.
pub fn solve_staggered(s: &CoupledSystem) -> Result<CoupledSolution> {
    let t = solve(&s.thermal.k, &s.thermal.f)?;
    let load = s.coupling.mul_vec(&t.x)?;
    let f: Vec<f64> =
        s.elastic.f.iter().zip(&load).zip(&s.reference_load).map(|((a, b), c)| a + b + c).collect();
    let u = solve(&s.elastic.k, &f)?;
    let residual = t.residual.max(u.residual);
    Ok(CoupledSolution { d_t: t.x.clone(), d_u: u.x.clone(), thermal: Some(t), elastic: Some(u), residual })
}

/// The block lower-triangular system solved in one factorization.
pub fn solve_monolithic(s: &CoupledSystem) -> Result<CoupledSolution> {
    let nt = s.thermal.k.nrows;
    let nu = s.elastic.k.nrows;
    let mut t = Vec::new();
    for r in 0..nt {
        let (c, v) = s.thermal.k.row(r);
        t.extend(c.iter().zip(v).map(|(&c, &v)| (r, c, v)));
    }
    for r in 0..nu {
        let (c, v) = s.coupling.row(r);
        t.extend(c.iter().zip(v).map(|(&c, &v)| (nt + r, c, -v)));
        let (c, v) = s.elastic.k.row(r);
        t.extend(c.iter().zip(v).map(|(&c, &v)| (nt + r, nt + c, v)));
    }
    let k = Csr::from_triplets(nt + nu, nt + nu, &t)?;
    let mut f = s.thermal.f.clone();
    f.extend(s.elastic.f.iter().zip(&s.reference_load).map(|(a, b)| a + b));
    let rep = solve(&k, &f)?;
    Ok(CoupledSolution {
        d_t: rep.x[..nt].to_vec(),
        d_u: rep.x[nt..].to_vec(),
        residual: rep.residual,
        thermal: None,
        elastic: None,
    })
}

/// Exact field at (x, material): component values and gradients (rows are
/// components). Scalar fields use component 0.
pub type ExactField<'a> = dyn Fn([f64; 2], usize) -> Option<([f64; 2], [[f64; 2]; 2])> + Sync + 'a;

/// Absolute L2 and H1-seminorm errors of foreground nodal values with
/// `ncomp` interleaved components.
pub fn error_norms(
    mesh: &ForegroundMesh,
    basis: &ForegroundBasis,
    values: &[f64],
    ncomp: usize,
    exact: &ExactField,
) -> Result<(f64, f64)> {
    if values.len() != ncomp * basis.n_nodes() || !(1..=2).contains(&ncomp) {
        return Err(Error::Dimension(format!(
            "{} values for {} nodes with {ncomp} components",
            values.len(),
            basis.n_nodes()
        )));
    }
    let nq = basis.q + 2;
    let parts: Vec<(f64, f64)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let m = mesh.cells[c].material;
            let mut l2 = 0.0;
            let mut h1 = 0.0;
            for (xi, x, w) in basis.cell_quadrature(c, nq) {
                let (ev, eg) = exact(x, m)
                    .ok_or_else(|| Error::Input(format!("exact solution undefined in material {m}")))?;
                let s = basis.eval_ref(c, xi);
                for k in 0..ncomp {
                    let mut v = 0.0;
                    let mut g = [0.0; 2];
                    for (a, j) in basis.cell_nodes(c).enumerate() {
                        let d = values[ncomp * j + k];
                        v += d * s.values[a];
                        g[0] += d * s.gradients[a][0];
                        g[1] += d * s.gradients[a][1];
                    }
                    l2 += w * (v - ev[k]).powi(2);
                    h1 += w * ((g[0] - eg[k][0]).powi(2) + (g[1] - eg[k][1]).powi(2));
                }
            }
            Ok((l2, h1))
        })
        .collect::<Result<_>>()?;
    let (l2, h1) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((l2.sqrt(), h1.sqrt()))
}
