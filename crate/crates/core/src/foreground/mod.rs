//! Cut-cell foreground mesh over a hierarchical decomposition mesh.

mod basis;
mod cut;
mod vtk;

pub use basis::{reference_nodes, reference_shape, segment_quadrature, CellKind, CellMap, ForegroundBasis, ShapeEval};
pub use cut::{edge_intersection, triangulate_cell, CellCut, CutNode, SubCell};
pub use vtk::{write_vtk, VtkArray};

use crate::error::{Error, Result};
use crate::geometry::{phase_at, LevelSetField, PhaseConfig};
use crate::hierarchy::HierMesh;
use cut::{SIDE_BOTTOM, SIDE_LEFT, SIDE_RIGHT, SIDE_TOP};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoxSide {
    XMin,
    XMax,
    YMin,
    YMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    /// isocontour of level set k against void
    Lsf(usize),
    /// side of the embedding box
    Box(BoxSide),
}

#[derive(Debug, Clone)]
pub struct FgCell {
    /// counter-clockwise vertex ids: 3 for triangles, 4 for uncut quads
    pub vertices: Vec<usize>,
    pub decomp_cell: usize,
    pub level: usize,
    pub material: usize,
    pub phase: usize,
    pub area: f64,
    /// characteristic size sqrt(area)
    pub h: f64,
    /// edge length of the decomposition cell the cell was cut from
    pub parent_size: f64,
}

impl FgCell {
    pub fn kind(&self) -> CellKind {
        if self.vertices.len() == 3 {
            CellKind::Tri
        } else {
            CellKind::Quad
        }
    }
}

/// Facet between two materials; cells[0] holds the lower material id and
/// `normal` points from cells[0] into cells[1].
#[derive(Debug, Clone)]
pub struct InterfaceFacet {
    pub cells: [usize; 2],
    pub materials: [usize; 2],
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub normal: [f64; 2],
}

/// Facet between a material cell and void or the box; `normal` points outward.
#[derive(Debug, Clone)]
pub struct BoundaryFacet {
    pub cell: usize,
    pub material: usize,
    pub tag: BoundaryTag,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub normal: [f64; 2],
}

impl InterfaceFacet {
    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }
}

impl BoundaryFacet {
    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[derive(Debug, Clone)]
pub struct ForegroundMesh {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<FgCell>,
    pub interfaces: Vec<InterfaceFacet>,
    pub boundaries: Vec<BoundaryFacet>,
    /// same-material cells sharing an edge segment of positive length
    pub neighbors: Vec<Vec<usize>>,
    pub decomposition: HierMesh,
    /// cells of decomposition cell d: cell_offsets[d]..cell_offsets[d+1]
    pub cell_offsets: Vec<usize>,
    pub n_cut: usize,
    pub n_materials: usize,
}

/// Cells of Ω^l in which the material (void included) is not constant, judged
/// from samples at least as dense as the level-set grids.
pub fn material_change_marker<'a>(
    fields: &'a [LevelSetField],
    phases: &'a PhaseConfig,
) -> impl Fn([f64; 2], [f64; 2]) -> bool + Sync + 'a {
    let spacing = fields
        .iter()
        .map(|f| f.grid.spacing[0].min(f.grid.spacing[1]))
        .fold(f64::INFINITY, f64::min);
    move |lo: [f64; 2], hi: [f64; 2]| {
        let n = |d: usize| -> usize {
            if spacing.is_finite() {
                (((hi[d] - lo[d]) / spacing).ceil() as usize * 2).max(2)
            } else {
                2
            }
        };
        let (nx, ny) = (n(0), n(1));
        let mut first: Option<Option<usize>> = None;
        for j in 0..=ny {
            for i in 0..=nx {
                let x = [
                    lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64,
                ];
                let m = phases.material_of(phase_at(fields, x));
                match first {
                    None => first = Some(m),
                    Some(f) if f != m => return true,
                    _ => {}
                }
            }
        }
        false
    }
}

/// Union of the field meshes plus `extra` foreground-only levels around
/// material changes (dilated by `ring` cells).
pub fn decomposition_mesh(
    field_meshes: &[&HierMesh],
    extra: usize,
    ring: usize,
    fields: &[LevelSetField],
    phases: &PhaseConfig,
) -> Result<HierMesh> {
    let u = HierMesh::union(field_meshes)?;
    if extra == 0 {
        return Ok(u);
    }
    u.refined(extra, ring, material_change_marker(fields, phases))
}

struct Seg {
    lo: f64,
    hi: f64,
    cell: usize,
}

fn polygon_area(p: &[[f64; 2]]) -> f64 {
    (0..p.len())
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % p.len()]);
            0.5 * (a[0] * b[1] - a[1] * b[0])
        })
        .sum()
}

fn centroid(p: &[[f64; 2]]) -> [f64; 2] {
    let n = p.len() as f64;
    [p.iter().map(|x| x[0]).sum::<f64>() / n, p.iter().map(|x| x[1]).sum::<f64>() / n]
}

fn facet_normal(a: [f64; 2], b: [f64; 2], away_from: [f64; 2]) -> [f64; 2] {
    let t = [b[0] - a[0], b[1] - a[1]];
    let l = (t[0] * t[0] + t[1] * t[1]).sqrt();
    let mut n = [t[1] / l, -t[0] / l];
    let m = [0.5 * (a[0] + b[0]) - away_from[0], 0.5 * (a[1] + b[1]) - away_from[1]];
    if n[0] * m[0] + n[1] * m[1] < 0.0 {
        n = [-n[0], -n[1]];
    }
    n
}

impl ForegroundMesh {
    pub fn build(decomp: &HierMesh, fields: &[LevelSetField], phases: &PhaseConfig) -> Result<Self> {
        if phases.n_lsf() != fields.len() {
            return Err(Error::Input(format!(
                "phase map is for {} level sets, {} given",
                phases.n_lsf(),
                fields.len()
            )));
        }
        let cuts: Vec<CellCut> = (0..decomp.n_cells())
            .into_par_iter()
            .map(|d| {
                let (lo, hi) = decomp.cell_bounds(d);
                triangulate_cell(lo, hi, fields, d)
            })
            .collect::<Result<_>>()?;

        // global numbering over all sub-cells, void included
        let mut vertices = Vec::new();
        let mut node_base = Vec::with_capacity(cuts.len());
        let mut sub_base = Vec::with_capacity(cuts.len() + 1);
        let mut n_sub = 0;
        for c in &cuts {
            node_base.push(vertices.len());
            sub_base.push(n_sub);
            vertices.extend(c.nodes.iter().map(|n| n.x));
            n_sub += c.cells.len();
        }
        sub_base.push(n_sub);
        let mut sub_mat: Vec<Option<usize>> = Vec::with_capacity(n_sub);
        let mut sub_phase = Vec::with_capacity(n_sub);
        let mut sub_poly: Vec<Vec<[f64; 2]>> = Vec::with_capacity(n_sub);
        for (d, c) in cuts.iter().enumerate() {
            for s in &c.cells {
                sub_mat.push(phases.material_of(s.phase));
                sub_phase.push(s.phase);
                let mut poly: Vec<[f64; 2]> = s.nodes.iter().map(|&v| c.nodes[v].x).collect();
                if polygon_area(&poly) < 0.0 {
                    poly.reverse();
                }
                let _ = d;
                sub_poly.push(poly);
            }
        }

        // pairs of sub-cells sharing an edge segment: (cell, cell, a, b)
        let mut pairs: Vec<(usize, usize, [f64; 2], [f64; 2])> = Vec::new();
        let fine = decomp.depth() - 1;
        let mut lines: BTreeMap<(u8, usize), (Vec<Seg>, Vec<Seg>)> = BTreeMap::new();
        for (d, c) in cuts.iter().enumerate() {
            let mut internal: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
            let cell = decomp.cell(d);
            let s = 1usize << (fine - cell.level);
            for (k, sc) in c.cells.iter().enumerate() {
                let g = sub_base[d] + k;
                let m = sc.nodes.len();
                for e in 0..m {
                    let (a, b) = (sc.nodes[e], sc.nodes[(e + 1) % m]);
                    let side = c.nodes[a].sides & c.nodes[b].sides;
                    if side == 0 {
                        internal.entry((a.min(b), a.max(b))).or_default().push(g);
                        continue;
                    }
                    let (xa, xb) = (c.nodes[a].x, c.nodes[b].x);
                    // axis 0: vertical lines x = const, axis 1: horizontal
                    let (axis, line, plus) = match side {
                        SIDE_LEFT => (0u8, cell.ij[0] * s, true),
                        SIDE_RIGHT => (0u8, (cell.ij[0] + 1) * s, false),
                        SIDE_BOTTOM => (1u8, cell.ij[1] * s, true),
                        SIDE_TOP => (1u8, (cell.ij[1] + 1) * s, false),
                        _ => unreachable!("edge on two sides"),
                    };
                    let t = if axis == 0 { 1 } else { 0 };
                    let (lo, hi) = if xa[t] < xb[t] { (xa[t], xb[t]) } else { (xb[t], xa[t]) };
                    let entry = lines.entry((axis, line)).or_default();
                    let seg = Seg { lo, hi, cell: g };
                    if plus {
                        entry.0.push(seg);
                    } else {
                        entry.1.push(seg);
                    }
                }
            }
            let mut keys: Vec<_> = internal.into_iter().collect();
            keys.sort_by_key(|(k, _)| *k);
            for ((a, b), cs) in keys {
                if cs.len() == 2 {
                    pairs.push((cs[0], cs[1], c.nodes[a].x, c.nodes[b].x));
                }
            }
        }

        let (blo, bhi) = decomp.bounds();
        let fd = decomp.level_dims(fine);
        let fh = decomp.level_size(fine);
        let tol = 1e-10 * fh[0].min(fh[1]);
        let mut box_segs: Vec<(usize, BoxSide, [f64; 2], [f64; 2])> = Vec::new();
        for (&(axis, line), (plus, minus)) in lines.iter_mut() {
            let coord = |v: f64| -> [f64; 2] {
                if axis == 0 {
                    [blo[0] + fh[0] * line as f64, v]
                } else {
                    [v, blo[1] + fh[1] * line as f64]
                }
            };
            if line == 0 || line == fd[axis as usize] {
                let side = match (axis, line == 0) {
                    (0, true) => BoxSide::XMin,
                    (0, false) => BoxSide::XMax,
                    (_, true) => BoxSide::YMin,
                    (_, false) => BoxSide::YMax,
                };
                for sgm in plus.iter().chain(minus.iter()) {
                    box_segs.push((sgm.cell, side, coord(sgm.lo), coord(sgm.hi)));
                }
                continue;
            }
            plus.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            minus.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            let (mut i, mut j) = (0, 0);
            while i < plus.len() && j < minus.len() {
                let lo = plus[i].lo.max(minus[j].lo);
                let hi = plus[i].hi.min(minus[j].hi);
                if hi - lo > tol {
                    pairs.push((minus[j].cell, plus[i].cell, coord(lo), coord(hi)));
                }
                if plus[i].hi < minus[j].hi {
                    i += 1;
                } else {
                    j += 1;
                }
            }
        }
        let _ = bhi;

        // keep material cells only
        let mut new_id = vec![usize::MAX; n_sub];
        let mut cells = Vec::new();
        let mut cell_offsets = Vec::with_capacity(cuts.len() + 1);
        let mut n_cut = 0;
        for (d, c) in cuts.iter().enumerate() {
            cell_offsets.push(cells.len());
            n_cut += c.cut as usize;
            let dc = decomp.cell(d);
            let size = decomp.level_size(dc.level);
            for (k, sc) in c.cells.iter().enumerate() {
                let g = sub_base[d] + k;
                let Some(material) = sub_mat[g] else { continue };
                let mut verts: Vec<usize> = sc.nodes.iter().map(|&v| node_base[d] + v).collect();
                let mut area = polygon_area(&sub_poly[g]);
                let raw: Vec<[f64; 2]> = verts.iter().map(|&v| vertices[v]).collect();
                if polygon_area(&raw) < 0.0 {
                    verts.reverse();
                }
                area = area.abs();
                new_id[g] = cells.len();
                cells.push(FgCell {
                    vertices: verts,
                    decomp_cell: d,
                    level: dc.level,
                    material,
                    phase: sub_phase[g],
                    area,
                    h: area.sqrt(),
                    parent_size: size[0].min(size[1]),
                });
            }
        }
        cell_offsets.push(cells.len());

        let mut neighbors = vec![Vec::new(); cells.len()];
        let mut interfaces = Vec::new();
        let mut boundaries = Vec::new();
        for (g1, g2, a, b) in pairs {
            match (sub_mat[g1], sub_mat[g2]) {
                (Some(m1), Some(m2)) if m1 == m2 => {
                    let (c1, c2) = (new_id[g1], new_id[g2]);
                    neighbors[c1].push(c2);
                    neighbors[c2].push(c1);
                }
                (Some(m1), Some(m2)) => {
                    let (lo, hi) = if m1 < m2 { (g1, g2) } else { (g2, g1) };
                    let normal = facet_normal(a, b, centroid(&sub_poly[lo]));
                    interfaces.push(InterfaceFacet {
                        cells: [new_id[lo], new_id[hi]],
                        materials: [m1.min(m2), m1.max(m2)],
                        a,
                        b,
                        normal,
                    });
                }
                (Some(m), None) | (None, Some(m)) => {
                    let (inside, outside) = if sub_mat[g1].is_some() { (g1, g2) } else { (g2, g1) };
                    let k = (sub_phase[inside] ^ sub_phase[outside]).trailing_zeros() as usize;
                    boundaries.push(BoundaryFacet {
                        cell: new_id[inside],
                        material: m,
                        tag: BoundaryTag::Lsf(k),
                        a,
                        b,
                        normal: facet_normal(a, b, centroid(&sub_poly[inside])),
                    });
                }
                (None, None) => {}
            }
        }
        for (g, side, a, b) in box_segs {
            let Some(m) = sub_mat[g] else { continue };
            let normal = match side {
                BoxSide::XMin => [-1.0, 0.0],
                BoxSide::XMax => [1.0, 0.0],
                BoxSide::YMin => [0.0, -1.0],
                BoxSide::YMax => [0.0, 1.0],
            };
            boundaries.push(BoundaryFacet { cell: new_id[g], material: m, tag: BoundaryTag::Box(side), a, b, normal });
        }
        for n in neighbors.iter_mut() {
            n.sort_unstable();
            n.dedup();
        }
        let n_materials = phases.materials.len();
        Ok(ForegroundMesh {
            vertices,
            cells,
            interfaces,
            boundaries,
            neighbors,
            decomposition: decomp.clone(),
            cell_offsets,
            n_cut,
            n_materials,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> Vec<[f64; 2]> {
        self.cells[c].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 2] {
        centroid(&self.cell_points(c))
    }

    pub fn cells_of_decomp(&self, d: usize) -> std::ops::Range<usize> {
        self.cell_offsets[d]..self.cell_offsets[d + 1]
    }

    /// Total area per material id.
    pub fn material_areas(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n_materials];
        for c in &self.cells {
            a[c.material] += c.area;
        }
        a
    }

    /// Material cell containing x, if any.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let d = self.decomposition.locate(x).ok()?;
        let mut best: Option<(usize, f64)> = None;
        for c in self.cells_of_decomp(d) {
            let p = self.cell_points(c);
            // smallest signed distance of x to the edges (>= 0 inside)
            let mut m = f64::INFINITY;
            for i in 0..p.len() {
                let (a, b) = (p[i], p[(i + 1) % p.len()]);
                let t = [b[0] - a[0], b[1] - a[1]];
                let l = (t[0] * t[0] + t[1] * t[1]).sqrt();
                let s = (t[0] * (x[1] - a[1]) - t[1] * (x[0] - a[0])) / l;
                m = m.min(s);
            }
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((c, m));
            }
        }
        let scale = self.decomposition.level_size(self.decomposition.depth() - 1)[0];
        best.filter(|&(_, m)| m > -1e-9 * scale).map(|(c, _)| c)
    }

    /// Boundary facets carrying any of the given tags.
    pub fn boundary_with(&self, tags: &[BoundaryTag]) -> impl Iterator<Item = &BoundaryFacet> {
        let tags = tags.to_vec();
        self.boundaries.iter().filter(move |f| tags.contains(&f.tag))
    }
}
