//! Lagrange extraction: enriched background functions evaluated at foreground nodes.

use crate::enrichment::EnrichedSpace;
use crate::error::{Error, Result};
use crate::foreground::ForegroundBasis;
use crate::hierarchy::ThbSpace;
use crate::sparse::Csr;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const PRUNE_TOL: f64 = 1e-14;
/// relative residual below which an interpolated function counts as dependent
pub const DEPENDENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ExtractionOperator {
    /// rows: retained enriched functions, columns: foreground nodes
    pub matrix: Csr,
    /// enriched function id of each row
    pub row_ids: Vec<usize>,
    /// row of each enriched function, None when pruned
    pub row_of: Vec<Option<usize>>,
}

impl ExtractionOperator {
    pub fn n_rows(&self) -> usize {
        self.matrix.nrows
    }

    pub fn n_nodes(&self) -> usize {
        self.matrix.ncols
    }

    /// Interleaved vector operator, I = 2i + k, J = 2j + k.
    pub fn vector(&self) -> ExtractionOperator {
        let m = &self.matrix;
        let mut indptr = vec![0];
        let mut indices = Vec::with_capacity(2 * m.nnz());
        let mut values = Vec::with_capacity(2 * m.nnz());
        for r in 0..m.nrows {
            let (cols, vals) = m.row(r);
            for k in 0..2 {
                for (&c, &v) in cols.iter().zip(vals) {
                    indices.push(2 * c + k);
                    values.push(v);
                }
                indptr.push(indices.len());
            }
        }
        let matrix = Csr { nrows: 2 * m.nrows, ncols: 2 * m.ncols, indptr, indices, values };
        let row_ids = self.row_ids.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
        let row_of = self
            .row_of
            .iter()
            .flat_map(|r| [r.map(|r| 2 * r), r.map(|r| 2 * r + 1)])
            .collect();
        ExtractionOperator { matrix, row_ids, row_of }
    }

    /// Foreground coefficients Mᵀ d.
    pub fn interpolate(&self, d: &[f64]) -> Result<Vec<f64>> {
        if d.len() != self.matrix.nrows {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} functions",
                d.len(),
                self.matrix.nrows
            )));
        }
        let m = &self.matrix;
        let mut out = vec![0.0; m.ncols];
        for (r, &dr) in d.iter().enumerate() {
            let (cols, vals) = m.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v * dr;
            }
        }
        Ok(out)
    }

    /// Coordinate dump, one `row col value` line per entry.
    pub fn write_coo(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "% {} {} {}", self.matrix.nrows, self.matrix.ncols, self.matrix.nnz())?;
        for r in 0..self.matrix.nrows {
            let (cols, vals) = self.matrix.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(w, "{r} {c} {v:e}")?;
            }
        }
        Ok(())
    }
}

pub fn build_extraction(space: &ThbSpace, enr: &EnrichedSpace, basis: &ForegroundBasis) -> Result<ExtractionOperator> {
    let n_cells = enr.background_cell.len();
    let per_cell: Vec<Vec<(usize, usize, f64)>> = (0..n_cells)
        .into_par_iter()
        .map(|c| {
            let b = enr.background_cell[c];
            let mut t = Vec::new();
            for j in basis.cell_nodes(c) {
                for v in space.eval_in_cell(b, basis.nodes[j]) {
                    if v.value == 0.0 {
                        continue;
                    }
                    let e = enr.enriched_id(c, v.function).ok_or_else(|| {
                        Error::Input(format!(
                            "background function {} has no enriched copy on foreground cell {c}",
                            v.function
                        ))
                    })?;
                    t.push((e, j, v.value));
                }
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let trips: Vec<(usize, usize, f64)> = per_cell.into_iter().flatten().collect();
    let full = Csr::from_triplets(enr.n_functions(), basis.n_nodes(), &trips)?;

    let mut keep: Vec<bool> = (0..full.nrows)
        .map(|r| full.row(r).1.iter().fold(0.0f64, |m, v| m.max(v.abs())) >= PRUNE_TOL)
        .collect();
    drop_dependent(&full, enr, &mut keep);
    let mut row_of = vec![None; enr.n_functions()];
    let mut row_ids = Vec::new();
    for r in 0..full.nrows {
        if keep[r] {
            row_of[r] = Some(row_ids.len());
            row_ids.push(r);
        }
    }
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for &r in &row_ids {
        let (cols, vals) = full.row(r);
        indices.extend_from_slice(cols);
        values.extend_from_slice(vals);
        indptr.push(indices.len());
    }
    let matrix = Csr { nrows: row_ids.len(), ncols: full.ncols, indptr, indices, values };
    Ok(ExtractionOperator { matrix, row_ids, row_of })
}

/// Interpolated functions confined to the foreground cells of one background
/// cell can coincide at the nodes (a triangle cannot tell the bilinear
/// functions apart along an edge it shares with the cell). Within each such
/// group, rows that are linear combinations of earlier rows are dropped; the
/// interpolated span is unchanged.
fn drop_dependent(full: &Csr, enr: &EnrichedSpace, keep: &mut [bool]) {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (r, f) in enr.functions.iter().enumerate() {
        if !keep[r] {
            continue;
        }
        let b = enr.background_cell[f.cells[0]];
        if f.cells.iter().all(|&c| enr.background_cell[c] == b) {
            groups.entry(b).or_default().push(r);
        }
    }
    let dropped: Vec<Vec<usize>> = groups
        .into_values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|rows| {
            let mut out = vec![];
            if rows.len() < 2 {
                return out;
            }
            let mut cols: Vec<usize> = rows.iter().flat_map(|&r| full.row(r).0.iter().copied()).collect();
            cols.sort_unstable();
            cols.dedup();
            let mut basis: Vec<Vec<f64>> = vec![];
            for &r in &rows {
                let mut v = vec![0.0; cols.len()];
                let (ci, cv) = full.row(r);
                for (&c, &x) in ci.iter().zip(cv) {
                    v[cols.binary_search(&c).unwrap()] = x;
                }
                let n0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                for _ in 0..2 {
                    for q in &basis {
                        let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                        for (x, a) in v.iter_mut().zip(q) {
                            *x -= d * a;
                        }
                    }
                }
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n <= DEPENDENCE_TOL * n0 {
                    out.push(r);
                } else {
                    basis.push(v.into_iter().map(|x| x / n).collect());
                }
            }
            out
        })
        .collect();
    for r in dropped.into_iter().flatten() {
        log::debug!("dropping enriched function {r}: dependent at the foreground nodes");
        keep[r] = false;
    }
}
