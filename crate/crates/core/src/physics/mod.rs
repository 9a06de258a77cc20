//! Foreground weak forms: heat conduction, linear elasticity and the
//! thermo-elastic coupling operator, with symmetric Nitsche boundary and
//! interface terms.

mod elastic;
mod thermal;

pub use elastic::{assemble_coupling, assemble_elastic, stress_at, Components, CouplingProblem, ElasticProblem};
pub use thermal::{assemble_thermal, ThermalProblem};

use crate::error::{Error, Result};
use crate::foreground::{ForegroundMesh, ShapeEval};
use crate::sparse::Csr;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
/// Field data that may differ between materials: f(x, material).
pub type MaterialScalarFn = Arc<dyn Fn([f64; 2], usize) -> f64 + Send + Sync>;
pub type MaterialVectorFn = Arc<dyn Fn([f64; 2], usize) -> [f64; 2] + Send + Sync>;

/// Lower bound on the penalty length scale relative to the size of the
/// decomposition cell a foreground cell was cut from.
pub const H_CAP: f64 = 1e-3;

pub fn default_penalty(q: usize) -> f64 {
    20.0 * (q * q) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceParams {
    /// averaging weights of the two sides, summing to one
    pub w: [f64; 2],
    pub gamma: f64,
}

/// Weighted-average weights and interface penalty for cells of size h and
/// material parameter ω on both sides, in dimension d.
pub fn interface_params(h: [f64; 2], omega: [f64; 2], beta: f64, d: i32) -> Result<InterfaceParams> {
    if !(h[0] > 0.0 && h[1] > 0.0 && omega[0] > 0.0 && omega[1] > 0.0) {
        return Err(Error::Input(format!("interface sizes {h:?} and parameters {omega:?} must be positive")));
    }
    if !(beta >= 0.0) {
        return Err(Error::Input(format!("negative penalty {beta}")));
    }
    let a = h[0].powi(d) / omega[0];
    let b = h[1].powi(d) / omega[1];
    let s = a + b;
    let w0 = a / s;
    Ok(InterfaceParams {
        w: [w0, 1.0 - w0],
        gamma: 2.0 * beta * (h[0].powi(d - 1) + h[1].powi(d - 1)) / s,
    })
}

/// Dense element contribution on global rows x cols (row-major values).
#[derive(Debug, Clone)]
pub struct Block {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl Block {
    fn square(dofs: Vec<usize>) -> Self {
        let n = dofs.len();
        Block { rows: dofs.clone(), cols: dofs, values: vec![0.0; n * n] }
    }

    fn rect(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        let n = rows.len() * cols.len();
        Block { rows, cols, values: vec![0.0; n] }
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let n = self.cols.len();
        self.values[i * n + j] += v;
    }
}

/// Foreground system A x = b stored as element blocks.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub n_rows: usize,
    pub n_cols: usize,
    pub blocks: Vec<Block>,
    pub rhs: Vec<f64>,
    /// cells whose penalty length was raised to the cap
    pub h_capped: usize,
}

impl Assembled {
    pub fn to_csr(&self) -> Result<Csr> {
        let mut t = Vec::new();
        for b in &self.blocks {
            for (i, &r) in b.rows.iter().enumerate() {
                for (j, &c) in b.cols.iter().enumerate() {
                    t.push((r, c, b.values[i * b.cols.len() + j]));
                }
            }
        }
        Csr::from_triplets(self.n_rows, self.n_cols, &t)
    }
}

/// One assembled item: an optional block and right-hand-side entries.
type Item = (Option<Block>, Vec<(usize, f64)>);

fn collect(n_rows: usize, n_cols: usize, items: Vec<Item>, h_capped: usize) -> Assembled {
    let mut rhs = vec![0.0; n_rows];
    let mut blocks = Vec::with_capacity(items.len());
    for (b, r) in items {
        if let Some(b) = b {
            blocks.push(b);
        }
        for (i, v) in r {
            rhs[i] += v;
        }
    }
    Assembled { n_rows, n_cols, blocks, rhs, h_capped }
}

/// Penalty length of a cell and whether the cap was active.
fn penalty_h(mesh: &ForegroundMesh, c: usize) -> (f64, bool) {
    let cell = &mesh.cells[c];
    let cap = H_CAP * cell.parent_size;
    if cell.h < cap {
        (cap, true)
    } else {
        (cell.h, false)
    }
}

fn count_capped(mesh: &ForegroundMesh) -> usize {
    (0..mesh.n_cells()).filter(|&c| penalty_h(mesh, c).1).count()
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn normal_derivatives(s: &ShapeEval, n: [f64; 2]) -> Vec<f64> {
    s.gradients.iter().map(|&g| dot(g, n)).collect()
}

fn check_len(what: &str, v: usize, n: usize) -> Result<()> {
    if v < n {
        return Err(Error::Input(format!("{what} given for {v} materials, mesh has {n}")));
    }
    Ok(())
}
