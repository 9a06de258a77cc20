//! Cell-wise discontinuous Lagrange basis on the foreground mesh.

use super::ForegroundMesh;
use crate::error::{Error, Result};
use crate::quadrature::{self, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Tri,
    Quad,
}

const TRI_P1: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
const TRI_P2: [[f64; 2]; 6] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];
const QUAD_Q1: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
const QUAD_Q2: [[f64; 2]; 9] = [
    [0.0, 0.0],
    [1.0, 0.0],
    [1.0, 1.0],
    [0.0, 1.0],
    [0.5, 0.0],
    [1.0, 0.5],
    [0.5, 1.0],
    [0.0, 0.5],
    [0.5, 0.5],
];
// 1D node indices (0 -> 0, 1 -> 1/2, 2 -> 1) of the Q2 nodes above
const Q2_IDX: [[usize; 2]; 9] = [[0, 0], [2, 0], [2, 2], [0, 2], [1, 0], [2, 1], [1, 2], [0, 1], [1, 1]];

pub fn reference_nodes(kind: CellKind, q: usize) -> &'static [[f64; 2]] {
    match (kind, q) {
        (CellKind::Tri, 1) => &TRI_P1,
        (CellKind::Tri, _) => &TRI_P2,
        (CellKind::Quad, 1) => &QUAD_Q1,
        (CellKind::Quad, _) => &QUAD_Q2,
    }
}

/// Values and reference gradients of the degree-q Lagrange functions.
pub fn reference_shape(kind: CellKind, q: usize, xi: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let (u, v) = (xi[0], xi[1]);
    match (kind, q) {
        (CellKind::Tri, 1) => (vec![1.0 - u - v, u, v], vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]),
        (CellKind::Tri, _) => {
            let l = [1.0 - u - v, u, v];
            let g = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let mut val = Vec::with_capacity(6);
            let mut grad = Vec::with_capacity(6);
            for i in 0..3 {
                val.push(l[i] * (2.0 * l[i] - 1.0));
                let s = 4.0 * l[i] - 1.0;
                grad.push([s * g[i][0], s * g[i][1]]);
            }
            for (i, j) in [(0, 1), (1, 2), (2, 0)] {
                val.push(4.0 * l[i] * l[j]);
                grad.push([4.0 * (l[j] * g[i][0] + l[i] * g[j][0]), 4.0 * (l[j] * g[i][1] + l[i] * g[j][1])]);
            }
            (val, grad)
        }
        (CellKind::Quad, 1) => (
            vec![(1.0 - u) * (1.0 - v), u * (1.0 - v), u * v, (1.0 - u) * v],
            vec![[-(1.0 - v), -(1.0 - u)], [1.0 - v, -u], [v, u], [-v, 1.0 - u]],
        ),
        (CellKind::Quad, _) => {
            let l = |t: f64| [2.0 * (t - 0.5) * (t - 1.0), -4.0 * t * (t - 1.0), 2.0 * t * (t - 0.5)];
            let d = |t: f64| [4.0 * t - 3.0, -8.0 * t + 4.0, 4.0 * t - 1.0];
            let (lu, lv, du, dv) = (l(u), l(v), d(u), d(v));
            let mut val = Vec::with_capacity(9);
            let mut grad = Vec::with_capacity(9);
            for [a, b] in Q2_IDX {
                val.push(lu[a] * lv[b]);
                grad.push([du[a] * lv[b], lu[a] * dv[b]]);
            }
            (val, grad)
        }
    }
}

/// Affine map x = origin + J xi of a cell (quads are axis-aligned rectangles).
#[derive(Debug, Clone, Copy)]
pub struct CellMap {
    pub kind: CellKind,
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
}

impl CellMap {
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let j = &self.jac;
        [
            self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1],
        ]
    }

    pub fn inverse(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        let i = &self.inv;
        [i[0][0] * d[0] + i[0][1] * d[1], i[1][0] * d[0] + i[1][1] * d[1]]
    }

    /// Physical gradient from a reference gradient: J^{-T} g.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let i = &self.inv;
        [i[0][0] * g[0] + i[1][0] * g[1], i[0][1] * g[0] + i[1][1] * g[1]]
    }
}

#[derive(Debug, Clone)]
pub struct ShapeEval {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct ForegroundBasis {
    pub q: usize,
    offsets: Vec<usize>,
    pub nodes: Vec<[f64; 2]>,
    pub node_cell: Vec<usize>,
    maps: Vec<CellMap>,
}

impl ForegroundBasis {
    pub fn new(mesh: &ForegroundMesh, q: usize) -> Result<Self> {
        if !(1..=2).contains(&q) {
            return Err(Error::Input(format!("foreground degree {q} unsupported, expected 1 or 2")));
        }
        let mut offsets = Vec::with_capacity(mesh.n_cells() + 1);
        let mut nodes = Vec::new();
        let mut node_cell = Vec::new();
        let mut maps = Vec::with_capacity(mesh.n_cells());
        for (c, cell) in mesh.cells.iter().enumerate() {
            let p = mesh.cell_points(c);
            let kind = cell.kind();
            let jac = match kind {
                CellKind::Tri => [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]],
                CellKind::Quad => [[p[2][0] - p[0][0], 0.0], [0.0, p[2][1] - p[0][1]]],
            };
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            let mut diam2: f64 = 0.0;
            for a in &p {
                for b in &p {
                    diam2 = diam2.max((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2));
                }
            }
            let area = match kind {
                CellKind::Tri => 0.5 * det,
                CellKind::Quad => det,
            };
            if !(area > 1e-13 * diam2) {
                return Err(Error::Degenerate(format!(
                    "foreground cell {c} (decomposition cell {}) has area {area:e}",
                    cell.decomp_cell
                )));
            }
            let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
            let m = CellMap { kind, origin: p[0], jac, inv, det };
            offsets.push(nodes.len());
            for &xi in reference_nodes(kind, q) {
                nodes.push(m.map(xi));
                node_cell.push(c);
            }
            maps.push(m);
        }
        offsets.push(nodes.len());
        Ok(ForegroundBasis { q, offsets, nodes, node_cell, maps })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_nodes(&self, c: usize) -> std::ops::Range<usize> {
        self.offsets[c]..self.offsets[c + 1]
    }

    pub fn cell_map(&self, c: usize) -> &CellMap {
        &self.maps[c]
    }

    pub fn eval_ref(&self, c: usize, xi: [f64; 2]) -> ShapeEval {
        let m = &self.maps[c];
        let (values, g) = reference_shape(m.kind, self.q, xi);
        ShapeEval { values, gradients: g.into_iter().map(|g| m.push_gradient(g)).collect() }
    }

    pub fn eval_at(&self, c: usize, x: [f64; 2]) -> ShapeEval {
        self.eval_ref(c, self.maps[c].inverse(x))
    }

    /// Physical quadrature points and weights over cell c with n points per direction.
    pub fn cell_quadrature(&self, c: usize, n: usize) -> Vec<([f64; 2], [f64; 2], f64)> {
        let m = &self.maps[c];
        let rule: Rule = match m.kind {
            CellKind::Tri => quadrature::triangle(n),
            CellKind::Quad => quadrature::square(n),
        };
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(&xi, &w)| (xi, m.map(xi), w * m.det.abs()))
            .collect()
    }
}

/// Gauss points and weights along the segment a-b.
pub fn segment_quadrature(a: [f64; 2], b: [f64; 2], n: usize) -> Vec<([f64; 2], f64)> {
    let (p, w) = quadrature::gauss_legendre(n);
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    p.iter()
        .zip(&w)
        .map(|(&t, &w)| ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * len))
        .collect()
}
