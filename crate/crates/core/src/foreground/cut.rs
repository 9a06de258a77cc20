//! Cutting of a single decomposition cell by level-set isocontours.

use crate::error::{Error, Result};
use crate::geometry::{phase_from_indicators, LevelSetField};
use std::collections::HashMap;

pub const SIDE_BOTTOM: u8 = 1;
pub const SIDE_RIGHT: u8 = 2;
pub const SIDE_TOP: u8 = 4;
pub const SIDE_LEFT: u8 = 8;

/// Root of the linear interpolant between two nodal values, if they straddle
/// the iso-level strictly.
pub fn edge_intersection(phi_a: f64, phi_b: f64, iso: f64) -> Result<Option<f64>> {
    let (a, b) = (phi_a - iso, phi_b - iso);
    if a == 0.0 && b == 0.0 {
        return Err(Error::Degenerate("edge lies on the isocontour".into()));
    }
    if a * b < 0.0 {
        Ok(Some(a / (a - b)))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone)]
pub struct CutNode {
    pub x: [f64; 2],
    /// phi - iso per level set, snapped to exactly 0 within tolerance
    pub phi: Vec<f64>,
    /// cell sides the node lies on (SIDE_* bits)
    pub sides: u8,
}

#[derive(Debug, Clone)]
pub struct SubCell {
    /// local node ids, counter-clockwise; 3 (triangle) or 4 (the uncut quad)
    pub nodes: Vec<usize>,
    pub phase: usize,
}

#[derive(Debug, Clone)]
pub struct CellCut {
    pub nodes: Vec<CutNode>,
    pub cells: Vec<SubCell>,
    pub cut: bool,
}

fn snap(v: f64, tol: f64) -> f64 {
    if v.abs() <= tol {
        0.0
    } else {
        v
    }
}

struct Builder<'a> {
    fields: &'a [LevelSetField],
    tols: Vec<f64>,
    nodes: Vec<CutNode>,
}

impl Builder<'_> {
    fn push(&mut self, x: [f64; 2], sides: u8) -> usize {
        let phi = self
            .fields
            .iter()
            .zip(&self.tols)
            .map(|(f, &t)| snap(f.value_at(x) - f.iso, t))
            .collect();
        self.nodes.push(CutNode { x, phi, sides });
        self.nodes.len() - 1
    }

    /// Node where level set k crosses edge (a, b). Earlier level sets get
    /// values linear along the edge, later ones the field value.
    fn cut_edge(&mut self, a: usize, b: usize, k: usize, cache: &mut HashMap<(usize, usize), usize>) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&n) = cache.get(&key) {
            return n;
        }
        let (lo, hi) = key;
        let (xa, xb) = (self.nodes[lo].x, self.nodes[hi].x);
        let f = &self.fields[k];
        let g = |t: f64| f.value_at([xa[0] + t * (xb[0] - xa[0]), xa[1] + t * (xb[1] - xa[1])]) - f.iso;
        let t = find_root(g, self.nodes[lo].phi[k], self.nodes[hi].phi[k], f.range());
        let x = [xa[0] + t * (xb[0] - xa[0]), xa[1] + t * (xb[1] - xa[1])];
        let mut phi = Vec::with_capacity(self.fields.len());
        for (j, fj) in self.fields.iter().enumerate() {
            let v = if j == k {
                0.0
            } else if j < k {
                let (pa, pb) = (self.nodes[lo].phi[j], self.nodes[hi].phi[j]);
                pa + t * (pb - pa)
            } else {
                fj.value_at(x) - fj.iso
            };
            phi.push(snap(v, self.tols[j]));
        }
        let sides = self.nodes[lo].sides & self.nodes[hi].sides;
        self.nodes.push(CutNode { x, phi, sides });
        let n = self.nodes.len() - 1;
        cache.insert(key, n);
        n
    }
}

/// Bracketed root of g on [0,1] given g(0) ~ ga, g(1) ~ gb of strictly opposite
/// sign: linear first guess refined by Illinois false position.
fn find_root<G: Fn(f64) -> f64>(g: G, ga: f64, gb: f64, scale: f64) -> f64 {
    let mut t = edge_intersection(ga, gb, 0.0).ok().flatten().unwrap_or(0.5);
    let tol = 1e-15 * scale.max(f64::MIN_POSITIVE);
    let (mut a, mut b) = (0.0, 1.0);
    let (mut fa, mut fb) = (ga, gb);
    let mut side = 0i8;
    for _ in 0..100 {
        let ft = g(t);
        if ft.abs() <= tol || b - a < 1e-15 {
            break;
        }
        if (ft < 0.0) == (fa < 0.0) {
            a = t;
            fa = ft;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = t;
            fb = ft;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        t = (a * fb - b * fa) / (fb - fa);
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
    }
    t.clamp(1e-15, 1.0 - 1e-15)
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Phase of a sub-cell from its vertex signs; errors if a level set still
/// changes strict sign over the vertices.
fn classify(nodes: &[CutNode], verts: &[usize], n_lsf: usize, cell: usize) -> Result<usize> {
    let mut ind = Vec::with_capacity(n_lsf);
    for k in 0..n_lsf {
        let pos = verts.iter().any(|&v| nodes[v].phi[k] > 0.0);
        let neg = verts.iter().any(|&v| nodes[v].phi[k] < 0.0);
        if pos && neg {
            return Err(Error::Consistency {
                cell,
                msg: format!("sub-cell vertices straddle level set {k} after cutting"),
            });
        }
        ind.push(!neg);
    }
    Ok(phase_from_indicators(ind))
}

/// Split the axis-aligned cell [lo, hi] along all level-set isocontours crossing it.
/// Uncut cells come back as one quad; cut cells as triangles of the centroid fan
/// recursively split by each level set in turn.
pub fn triangulate_cell(lo: [f64; 2], hi: [f64; 2], fields: &[LevelSetField], cell: usize) -> Result<CellCut> {
    let n = fields.len();
    let mut bld = Builder { fields, tols: fields.iter().map(|f| f.snap_tolerance()).collect(), nodes: vec![] };
    bld.push(lo, SIDE_BOTTOM | SIDE_LEFT);
    bld.push([hi[0], lo[1]], SIDE_BOTTOM | SIDE_RIGHT);
    bld.push(hi, SIDE_RIGHT | SIDE_TOP);
    bld.push([lo[0], hi[1]], SIDE_TOP | SIDE_LEFT);
    let crossed = |nodes: &[CutNode], k: usize| {
        nodes[..4].iter().any(|c| c.phi[k] > 0.0) && nodes[..4].iter().any(|c| c.phi[k] < 0.0)
    };
    if !(0..n).any(|k| crossed(&bld.nodes, k)) {
        let verts = vec![0, 1, 2, 3];
        let phase = classify(&bld.nodes, &verts, n, cell)?;
        return Ok(CellCut { nodes: bld.nodes, cells: vec![SubCell { nodes: verts, phase }], cut: false });
    }
    let c = bld.push([0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])], 0);
    let mut tris: Vec<[usize; 3]> = vec![[0, 1, c], [1, 2, c], [2, 3, c], [3, 0, c]];
    for k in 0..n {
        let mut cache = HashMap::new();
        let mut out = Vec::with_capacity(tris.len() + 4);
        for t in tris {
            let s = t.map(|v| bld.nodes[v].phi[k]);
            let pos = s.iter().filter(|&&v| v > 0.0).count();
            let neg = s.iter().filter(|&&v| v < 0.0).count();
            if pos == 0 || neg == 0 {
                out.push(t);
                continue;
            }
            if pos + neg == 2 {
                // one vertex on the isocontour, the opposite edge is crossed
                let z = (0..3).find(|&i| s[i] == 0.0).unwrap();
                let (v0, a, b) = (t[z], t[(z + 1) % 3], t[(z + 2) % 3]);
                let p = bld.cut_edge(a, b, k, &mut cache);
                out.push([v0, a, p]);
                out.push([v0, p, b]);
                continue;
            }
            // isolated vertex: its sign differs from the other two
            let iso = (0..3)
                .find(|&i| (s[i] > 0.0) != (s[(i + 1) % 3] > 0.0) && (s[i] > 0.0) != (s[(i + 2) % 3] > 0.0))
                .unwrap();
            let (v0, a, b) = (t[iso], t[(iso + 1) % 3], t[(iso + 2) % 3]);
            let p = bld.cut_edge(v0, a, k, &mut cache);
            let q = bld.cut_edge(v0, b, k, &mut cache);
            out.push([v0, p, q]);
            let x = |i: usize| bld.nodes[i].x;
            let d_pb = dist2(x(p), x(b));
            let d_aq = dist2(x(a), x(q));
            let use_pb = if d_pb != d_aq { d_pb < d_aq } else { p.min(b) < a.min(q) };
            if use_pb {
                out.push([p, a, b]);
                out.push([p, b, q]);
            } else {
                out.push([p, a, q]);
                out.push([a, b, q]);
            }
        }
        tris = out;
    }
    let mut cells = Vec::with_capacity(tris.len());
    for t in tris {
        let phase = classify(&bld.nodes, &t, n, cell)?;
        cells.push(SubCell { nodes: t.to_vec(), phase });
    }
    Ok(CellCut { nodes: bld.nodes, cells, cut: true })
}
