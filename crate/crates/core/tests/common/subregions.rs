//! Flood-fill oracle for the enriched subregions of each background function.

use imig_core::enrichment::EnrichedSpace;
use imig_core::foreground::ForegroundMesh;
use imig_core::hierarchy::ThbSpace;
use std::collections::{BTreeMap, BTreeSet};

/// Cells sharing a boundary segment of positive length, found geometrically.
pub fn share_edge(mesh: &ForegroundMesh, a: usize, b: usize) -> bool {
    let pa = mesh.cell_points(a);
    let pb = mesh.cell_points(b);
    let tol = 1e-12;
    for i in 0..pa.len() {
        let (p, q) = (pa[i], pa[(i + 1) % pa.len()]);
        let t = [q[0] - p[0], q[1] - p[1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        let u = [t[0] / len, t[1] / len];
        for j in 0..pb.len() {
            let (r, s) = (pb[j], pb[(j + 1) % pb.len()]);
            let off = |x: [f64; 2]| u[0] * (x[1] - p[1]) - u[1] * (x[0] - p[0]);
            if off(r).abs() > tol || off(s).abs() > tol {
                continue;
            }
            let proj = |x: [f64; 2]| u[0] * (x[0] - p[0]) + u[1] * (x[1] - p[1]);
            let (lo, hi) = (proj(r).min(proj(s)), proj(r).max(proj(s)));
            if hi.min(len) - lo.max(0.0) > tol {
                return true;
            }
        }
    }
    false
}

/// Components of each base function's material cells by flood fill over the
/// geometric adjacency; components sorted by smallest cell.
pub fn oracle(space: &ThbSpace, mesh: &ForegroundMesh) -> BTreeMap<usize, Vec<Vec<usize>>> {
    let bg: Vec<usize> = (0..mesh.n_cells())
        .map(|c| space.mesh().locate(mesh.cell_centroid(c)).unwrap())
        .collect();
    let mut out = BTreeMap::new();
    for k in 0..space.n_functions() {
        let sup: BTreeSet<usize> = space.support(k).iter().copied().collect();
        let cells: Vec<usize> = (0..mesh.n_cells()).filter(|c| sup.contains(&bg[*c])).collect();
        let mut seen = BTreeSet::new();
        let mut comps = vec![];
        for &s in &cells {
            if seen.contains(&s) {
                continue;
            }
            let mut comp = vec![s];
            seen.insert(s);
            let mut i = 0;
            while i < comp.len() {
                let c = comp[i];
                for &d in &cells {
                    if !seen.contains(&d)
                        && mesh.cells[d].material == mesh.cells[c].material
                        && share_edge(mesh, c, d)
                    {
                        seen.insert(d);
                        comp.push(d);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort();
        out.insert(k, comps);
    }
    out
}

pub fn grouped(enr: &EnrichedSpace) -> BTreeMap<usize, Vec<Vec<usize>>> {
    let mut g: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for f in &enr.functions {
        g.entry(f.base).or_default().push(f.cells.clone());
    }
    for v in g.values_mut() {
        v.sort();
    }
    g
}

pub fn check_partition(space: &ThbSpace, mesh: &ForegroundMesh, enr: &EnrichedSpace) {
    for c in 0..mesh.n_cells() {
        let b = space.mesh().locate(mesh.cell_centroid(c)).unwrap();
        assert_eq!(enr.background_cell[c], b);
        for (k, _) in space.cell_table(b) {
            let on: Vec<usize> = enr
                .functions
                .iter()
                .enumerate()
                .filter(|(id, f)| f.base == *k && enr.indicator(*id, c))
                .map(|(id, _)| id)
                .collect();
            // exactly one enriched copy of every background function per cell
            assert_eq!(on.len(), 1, "cell {c} base {k}");
            assert_eq!(enr.enriched_id(c, *k), Some(on[0]));
            assert_eq!(enr.functions[on[0]].material, mesh.cells[c].material);
        }
    }
    for (k, &n) in enr.counts.iter().enumerate() {
        assert_eq!(enr.functions.iter().filter(|f| f.base == k).count(), n);
        let ms: Vec<usize> = enr.functions.iter().filter(|f| f.base == k).map(|f| f.m).collect();
        assert_eq!(ms, (1..=n).collect::<Vec<_>>());
    }
}
