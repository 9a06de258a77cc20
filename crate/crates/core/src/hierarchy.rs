//! Hierarchical meshes and (truncated) hierarchical B-spline spaces.

use crate::error::{Error, Result};
use crate::spline::{RefinementMap, TensorBSplineSpace};
use std::collections::BTreeMap;

pub const MAX_DEPTH: usize = 5;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierCell {
    pub level: usize,
    pub ij: [usize; 2],
}

/// Nested dyadic subdomains over a Cartesian base grid and the active cells
/// they induce: a level-l cell is active iff it lies in Ω^l but not in Ω^{l+1}.
#[derive(Debug, Clone)]
pub struct HierMesh {
    base: [usize; 2],
    origin: [f64; 2],
    h0: [f64; 2],
    subdomains: Vec<Vec<bool>>,
    cells: Vec<HierCell>,
    lookup: Vec<Vec<usize>>,
}

impl HierMesh {
    pub fn new(base: [usize; 2], origin: [f64; 2], h0: [f64; 2], subdomains: Vec<Vec<bool>>) -> Result<Self> {
        let r = subdomains.len();
        if r == 0 || r > MAX_DEPTH {
            return Err(Error::Validation(format!("depth {r} outside 1..={MAX_DEPTH}")));
        }
        if base[0] == 0 || base[1] == 0 || !(h0[0] > 0.0 && h0[1] > 0.0) {
            return Err(Error::Validation("empty base grid".into()));
        }
        for (l, s) in subdomains.iter().enumerate() {
            let n = (base[0] << l) * (base[1] << l);
            if s.len() != n {
                return Err(Error::Validation(format!("level {l} has {} flags, expected {n}", s.len())));
            }
        }
        if !subdomains[0].iter().all(|&b| b) {
            return Err(Error::Validation("level 0 subdomain must cover the grid".into()));
        }
        let mut mesh = HierMesh { base, origin, h0, subdomains, cells: vec![], lookup: vec![] };
        for l in 1..r {
            let d = mesh.level_dims(l);
            for j in 0..d[1] {
                for i in 0..d[0] {
                    if !mesh.subdomains[l][i + d[0] * j] {
                        continue;
                    }
                    let pij = [i / 2, j / 2];
                    if !mesh.in_subdomain(l - 1, pij) {
                        return Err(Error::Validation(format!(
                            "level {l} cell ({i}, {j}) not nested in level {}",
                            l - 1
                        )));
                    }
                    for c in children(pij) {
                        if !mesh.in_subdomain(l, c) {
                            return Err(Error::Validation(format!(
                                "level {l} subdomain splits the children of level {} cell {:?}",
                                l - 1,
                                pij
                            )));
                        }
                    }
                }
            }
        }
        for l in 0..r {
            let d = mesh.level_dims(l);
            let mut lk = vec![NONE; d[0] * d[1]];
            for j in 0..d[1] {
                for i in 0..d[0] {
                    if mesh.in_subdomain(l, [i, j]) && !mesh.is_refined(l, [i, j]) {
                        lk[i + d[0] * j] = mesh.cells.len();
                        mesh.cells.push(HierCell { level: l, ij: [i, j] });
                    }
                }
            }
            mesh.lookup.push(lk);
        }
        Ok(mesh)
    }

    pub fn uniform(base: [usize; 2], origin: [f64; 2], h0: [f64; 2]) -> Result<Self> {
        HierMesh::new(base, origin, h0, vec![vec![true; base[0] * base[1]]])
    }

    pub fn depth(&self) -> usize {
        self.subdomains.len()
    }

    pub fn base(&self) -> [usize; 2] {
        self.base
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn base_size(&self) -> [f64; 2] {
        self.h0
    }

    pub fn subdomains(&self) -> &[Vec<bool>] {
        &self.subdomains
    }

    pub fn level_dims(&self, l: usize) -> [usize; 2] {
        [self.base[0] << l, self.base[1] << l]
    }

    pub fn level_size(&self, l: usize) -> [f64; 2] {
        let s = (1u64 << l) as f64;
        [self.h0[0] / s, self.h0[1] / s]
    }

    pub fn in_subdomain(&self, l: usize, ij: [usize; 2]) -> bool {
        l < self.depth() && self.subdomains[l][ij[0] + self.level_dims(l)[0] * ij[1]]
    }

    /// True if the level-l cell has its children in Ω^{l+1}.
    pub fn is_refined(&self, l: usize, ij: [usize; 2]) -> bool {
        self.in_subdomain(l + 1, [2 * ij[0], 2 * ij[1]])
    }

    pub fn cells(&self) -> &[HierCell] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, id: usize) -> HierCell {
        self.cells[id]
    }

    pub fn active_id(&self, l: usize, ij: [usize; 2]) -> Option<usize> {
        if l >= self.depth() {
            return None;
        }
        let d = self.level_dims(l);
        if ij[0] >= d[0] || ij[1] >= d[1] {
            return None;
        }
        let v = self.lookup[l][ij[0] + d[0] * ij[1]];
        (v != NONE).then_some(v)
    }

    pub fn parent(&self, id: usize) -> Option<HierCell> {
        let c = self.cells[id];
        (c.level > 0).then(|| HierCell { level: c.level - 1, ij: [c.ij[0] / 2, c.ij[1] / 2] })
    }

    /// The active cell covering the level-l cell ij (ij itself or an ancestor).
    pub fn active_ancestor(&self, l: usize, ij: [usize; 2]) -> Option<usize> {
        let mut ij = ij;
        let mut l = l;
        // cells finer than the hierarchy are first mapped to its finest level
        while l >= self.depth() {
            ij = [ij[0] / 2, ij[1] / 2];
            l -= 1;
        }
        loop {
            if let Some(a) = self.active_id(l, ij) {
                return Some(a);
            }
            if l == 0 {
                return None;
            }
            l -= 1;
            ij = [ij[0] / 2, ij[1] / 2];
        }
    }

    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        (
            self.origin,
            [
                self.origin[0] + self.h0[0] * self.base[0] as f64,
                self.origin[1] + self.h0[1] * self.base[1] as f64,
            ],
        )
    }

    pub fn level_cell_bounds(&self, l: usize, ij: [usize; 2]) -> ([f64; 2], [f64; 2]) {
        let h = self.level_size(l);
        let lo = [self.origin[0] + h[0] * ij[0] as f64, self.origin[1] + h[1] * ij[1] as f64];
        let hi = [self.origin[0] + h[0] * (ij[0] + 1) as f64, self.origin[1] + h[1] * (ij[1] + 1) as f64];
        (lo, hi)
    }

    pub fn cell_bounds(&self, id: usize) -> ([f64; 2], [f64; 2]) {
        let c = self.cells[id];
        self.level_cell_bounds(c.level, c.ij)
    }

    /// Active cell containing x; points on shared edges go to the cell above/right,
    /// the upper domain boundary to the last cell.
    pub fn locate(&self, x: [f64; 2]) -> Result<usize> {
        let (lo, hi) = self.bounds();
        let tol = 1e-12 * ((hi[0] - lo[0]) + (hi[1] - lo[1]));
        if !(x[0] >= lo[0] - tol && x[0] <= hi[0] + tol && x[1] >= lo[1] - tol && x[1] <= hi[1] + tol) {
            return Err(Error::Domain(x[0], x[1]));
        }
        let l = self.depth() - 1;
        let d = self.level_dims(l);
        let h = self.level_size(l);
        let ij = [
            (((x[0] - lo[0]) / h[0]).floor().max(0.0) as usize).min(d[0] - 1),
            (((x[1] - lo[1]) / h[1]).floor().max(0.0) as usize).min(d[1] - 1),
        ];
        self.active_ancestor(l, ij).ok_or(Error::Domain(x[0], x[1]))
    }

    /// Active cells sharing an edge segment of positive length with `id`.
    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        let c = self.cells[id];
        let r = self.depth();
        let fine = r - 1;
        let s = 1usize << (fine - c.level);
        let d = self.level_dims(fine);
        let (i0, j0) = (c.ij[0] * s, c.ij[1] * s);
        let mut out = Vec::new();
        let mut push = |i: isize, j: isize| {
            if i < 0 || j < 0 || i as usize >= d[0] || j as usize >= d[1] {
                return;
            }
            if let Some(a) = self.active_ancestor(fine, [i as usize, j as usize]) {
                if a != id && !out.contains(&a) {
                    out.push(a);
                }
            }
        };
        for k in 0..s as isize {
            push(i0 as isize - 1, j0 as isize + k);
            push((i0 + s) as isize, j0 as isize + k);
            push(i0 as isize + k, j0 as isize - 1);
            push(i0 as isize + k, (j0 + s) as isize);
        }
        out.sort_unstable();
        out
    }

    /// Per-level union of subdomains (meshes must share the base grid).
    pub fn union(meshes: &[&HierMesh]) -> Result<HierMesh> {
        let first = meshes.first().ok_or_else(|| Error::Validation("no meshes to merge".into()))?;
        for m in meshes {
            if m.base != first.base || m.origin != first.origin || m.h0 != first.h0 {
                return Err(Error::Validation("merged meshes must share the base grid".into()));
            }
        }
        let r = meshes.iter().map(|m| m.depth()).max().unwrap();
        let subs = (0..r)
            .map(|l| {
                let n = (first.base[0] << l) * (first.base[1] << l);
                (0..n).map(|k| meshes.iter().any(|m| l < m.depth() && m.subdomains[l][k])).collect()
            })
            .collect();
        HierMesh::new(first.base, first.origin, first.h0, subs)
    }

    /// Add `extra` levels: at each level from the current finest one, cells of Ω^l
    /// flagged by `marker(lo, hi)` are dilated by `ring` cells inside Ω^l and
    /// their children join Ω^{l+1}. Existing deeper subdomains are kept.
    pub fn refined<F>(&self, extra: usize, ring: usize, marker: F) -> Result<HierMesh>
    where
        F: Fn([f64; 2], [f64; 2]) -> bool + Sync,
    {
        let mut subs = self.subdomains.clone();
        let start = self.depth() - 1;
        for l in start..start + extra {
            let d = [self.base[0] << l, self.base[1] << l];
            let h = self.level_size(l);
            let flags: Vec<bool> = {
                use rayon::prelude::*;
                (0..d[0] * d[1])
                    .into_par_iter()
                    .map(|k| {
                        if !subs[l][k] {
                            return false;
                        }
                        let ij = [k % d[0], k / d[0]];
                        let lo = [self.origin[0] + h[0] * ij[0] as f64, self.origin[1] + h[1] * ij[1] as f64];
                        let hi = [lo[0] + h[0], lo[1] + h[1]];
                        marker(lo, hi)
                    })
                    .collect()
            };
            let grown = dilate(&flags, &subs[l], d, ring);
            let dn = [d[0] * 2, d[1] * 2];
            if subs.len() <= l + 1 {
                subs.push(vec![false; dn[0] * dn[1]]);
            }
            for j in 0..d[1] {
                for i in 0..d[0] {
                    if grown[i + d[0] * j] {
                        for c in children([i, j]) {
                            subs[l + 1][c[0] + dn[0] * c[1]] = true;
                        }
                    }
                }
            }
        }
        while subs.len() > 1 && subs.last().unwrap().iter().all(|b| !b) {
            subs.pop();
        }
        HierMesh::new(self.base, self.origin, self.h0, subs)
    }
}

fn children(ij: [usize; 2]) -> [[usize; 2]; 4] {
    let (i, j) = (2 * ij[0], 2 * ij[1]);
    [[i, j], [i + 1, j], [i, j + 1], [i + 1, j + 1]]
}

fn dilate(flags: &[bool], within: &[bool], d: [usize; 2], ring: usize) -> Vec<bool> {
    let mut out = vec![false; flags.len()];
    let r = ring as isize;
    for j in 0..d[1] {
        for i in 0..d[0] {
            if !flags[i + d[0] * j] {
                continue;
            }
            for dj in -r..=r {
                for di in -r..=r {
                    let (a, b) = (i as isize + di, j as isize + dj);
                    if a < 0 || b < 0 || a as usize >= d[0] || b as usize >= d[1] {
                        continue;
                    }
                    let k = a as usize + d[0] * b as usize;
                    if within[k] {
                        out[k] = true;
                    }
                }
            }
        }
    }
    out
}

/// Spaces of a nested dyadic sequence together with its refinement subdomains.
#[derive(Debug, Clone)]
pub struct LevelSequence {
    pub mesh: HierMesh,
    pub spaces: Vec<TensorBSplineSpace>,
    pub maps: Vec<RefinementMap>,
}

impl LevelSequence {
    /// `base` must be uniform and match the mesh's base grid.
    pub fn new(base: TensorBSplineSpace, mesh: HierMesh) -> Result<Self> {
        let cd = base.cell_dims();
        if cd != mesh.base() {
            return Err(Error::Validation(format!(
                "space has {:?} cells but the mesh base grid is {:?}",
                cd,
                mesh.base()
            )));
        }
        for d in 0..2 {
            let kv = base.dir(d);
            let w: Vec<f64> = (0..kv.n_elements()).map(|e| kv.element_bounds(e)).map(|(a, b)| b - a).collect();
            if w.iter().any(|&x| (x - w[0]).abs() > 1e-12 * w[0]) {
                return Err(Error::Validation("base space must have uniform spans".into()));
            }
            let h = w[0] * base.scale()[d];
            if (h - mesh.base_size()[d]).abs() > 1e-12 * h {
                return Err(Error::Validation("space and mesh cell sizes differ".into()));
            }
        }
        let mut spaces = vec![base];
        let mut maps = vec![];
        for _ in 1..mesh.depth() {
            let (fine, map) = spaces.last().unwrap().refinement_coefficients();
            spaces.push(fine);
            maps.push(map);
        }
        Ok(LevelSequence { mesh, spaces, maps })
    }

    pub fn depth(&self) -> usize {
        self.mesh.depth()
    }

    /// True if the support box of level-k function f (k <= l+1) lies inside Ω^{l+1}.
    fn support_in_next(&self, k: usize, f: usize, l: usize) -> bool {
        if l + 1 >= self.depth() {
            return false;
        }
        let sup = self.spaces[k].support_cells(f);
        let s = 1usize << (l + 1 - k);
        for j in sup[1].start * s..sup[1].end * s {
            for i in sup[0].start * s..sup[0].end * s {
                if !self.mesh.in_subdomain(l + 1, [i, j]) {
                    return false;
                }
            }
        }
        true
    }
}

pub type SparseVec = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
pub struct ThbFunction {
    pub level: usize,
    pub index: usize,
    /// repr[k]: expansion in the level (level + k) basis, k = 0..depth-level.
    pub repr: Vec<SparseVec>,
}

/// Active hierarchical basis with per-level coefficient representations.
#[derive(Debug, Clone)]
pub struct ThbSpace {
    seq: LevelSequence,
    truncated: bool,
    functions: Vec<ThbFunction>,
    cell_table: Vec<Vec<(usize, Vec<f64>)>>,
    support: Vec<Vec<usize>>,
}

/// Hierarchical point evaluation (function id, value, gradient).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThbValue {
    pub function: usize,
    pub value: f64,
    pub gradient: [f64; 2],
}

/// Truncated hierarchical basis.
pub fn build_thb(seq: LevelSequence) -> ThbSpace {
    build(seq, true)
}

/// Non-truncated hierarchical basis (same active functions, no partition of unity).
pub fn build_hb(seq: LevelSequence) -> ThbSpace {
    build(seq, false)
}

fn build(seq: LevelSequence, truncated: bool) -> ThbSpace {
    let r = seq.depth();
    let mut active: Vec<ThbFunction> = (0..seq.spaces[0].n_functions())
        .map(|f| ThbFunction { level: 0, index: f, repr: vec![vec![(f, 1.0)]] })
        .collect();
    for l in 0..r.saturating_sub(1) {
        let next = &seq.spaces[l + 1];
        let new_fns: Vec<usize> =
            (0..next.n_functions()).filter(|&f| seq.support_in_next(l + 1, f, l)).collect();
        let mut is_new = vec![false; next.n_functions()];
        for &f in &new_fns {
            is_new[f] = true;
        }
        active.retain(|a| !seq.support_in_next(a.level, a.index, l));
        let map = &seq.maps[l];
        for a in active.iter_mut() {
            let cur = a.repr.last().unwrap();
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for &(j, c) in cur {
                for &(k, ck) in &map.rows[j] {
                    *acc.entry(k).or_insert(0.0) += c * ck;
                }
            }
            let v: SparseVec =
                acc.into_iter().filter(|&(k, c)| c != 0.0 && !(truncated && is_new[k])).collect();
            a.repr.push(v);
        }
        active.extend(new_fns.into_iter().map(|f| ThbFunction { level: l + 1, index: f, repr: vec![vec![(f, 1.0)]] }));
    }

    let mesh = &seq.mesh;
    let mut cell_table: Vec<Vec<(usize, Vec<f64>)>> = vec![vec![]; mesh.n_cells()];
    for l in 0..r {
        let space = &seq.spaces[l];
        let mut inv: Vec<Vec<(usize, f64)>> = vec![vec![]; space.n_functions()];
        for (id, a) in active.iter().enumerate() {
            if a.level <= l {
                for &(j, c) in &a.repr[l - a.level] {
                    inv[j].push((id, c));
                }
            }
        }
        for (cid, cell) in mesh.cells().iter().enumerate() {
            if cell.level != l {
                continue;
            }
            let fns = space.cell_functions(cell.ij);
            let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for (slot, &j) in fns.iter().enumerate() {
                for &(id, c) in &inv[j] {
                    rows.entry(id).or_insert_with(|| vec![0.0; fns.len()])[slot] = c;
                }
            }
            cell_table[cid] = rows.into_iter().collect();
        }
    }
    let mut support = vec![vec![]; active.len()];
    for (cid, rows) in cell_table.iter().enumerate() {
        for (id, _) in rows {
            support[*id].push(cid);
        }
    }
    ThbSpace { seq, truncated, functions: active, cell_table, support }
}

impl ThbSpace {
    pub fn sequence(&self) -> &LevelSequence {
        &self.seq
    }

    pub fn mesh(&self) -> &HierMesh {
        &self.seq.mesh
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn n_functions(&self) -> usize {
        self.functions.len()
    }

    pub fn functions(&self) -> &[ThbFunction] {
        &self.functions
    }

    /// Active mesh cells on which function `id` does not vanish identically.
    pub fn support(&self, id: usize) -> &[usize] {
        &self.support[id]
    }

    /// (function id, local coefficients) rows of an active cell.
    pub fn cell_table(&self, cell: usize) -> &[(usize, Vec<f64>)] {
        &self.cell_table[cell]
    }

    pub fn degree(&self) -> [usize; 2] {
        self.seq.spaces[0].degree()
    }

    /// Evaluate all functions supported on active cell `cell` at x.
    pub fn eval_in_cell(&self, cell: usize, x: [f64; 2]) -> Vec<ThbValue> {
        let c = self.seq.mesh.cell(cell);
        let cb = self.seq.spaces[c.level].eval_in_cell(c.ij, x);
        self.cell_table[cell]
            .iter()
            .map(|(id, coef)| {
                let mut v = 0.0;
                let mut g = [0.0; 2];
                for (a, &k) in coef.iter().enumerate() {
                    v += k * cb.values[a];
                    g[0] += k * cb.gradients[a][0];
                    g[1] += k * cb.gradients[a][1];
                }
                ThbValue { function: *id, value: v, gradient: g }
            })
            .collect()
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<Vec<(usize, f64)>> {
        let c = self.seq.mesh.locate(x)?;
        Ok(self.eval_in_cell(c, x).into_iter().map(|v| (v.function, v.value)).collect())
    }

    pub fn eval_gradients(&self, x: [f64; 2]) -> Result<Vec<(usize, [f64; 2])>> {
        let c = self.seq.mesh.locate(x)?;
        Ok(self.eval_in_cell(c, x).into_iter().map(|v| (v.function, v.gradient)).collect())
    }
}
