//! Function-wise Heaviside enrichment by material connectivity.

use crate::error::{Error, Result};
use crate::foreground::ForegroundMesh;
use crate::hierarchy::ThbSpace;
use rayon::prelude::*;
use std::collections::{HashMap, VecDeque};

#[derive(Debug, Clone)]
pub struct EnrichedFunction {
    /// background (THB) function id
    pub base: usize,
    /// enrichment level, 1-based
    pub m: usize,
    pub material: usize,
    /// sorted foreground cells of the indicator region
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EnrichedSpace {
    pub functions: Vec<EnrichedFunction>,
    /// L_k per background function (0 when dropped)
    pub counts: Vec<usize>,
    /// active background cell containing each foreground cell
    pub background_cell: Vec<usize>,
    /// per foreground cell: (base id, enriched id), sorted by base id
    cell_functions: Vec<Vec<(usize, usize)>>,
}

impl EnrichedSpace {
    pub fn n_functions(&self) -> usize {
        self.functions.len()
    }

    pub fn n_base(&self) -> usize {
        self.counts.len()
    }

    pub fn dropped(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c == 0).map(|(k, _)| k)
    }

    pub fn cell_functions(&self, cell: usize) -> &[(usize, usize)] {
        &self.cell_functions[cell]
    }

    /// Enriched function carrying base function `base` on foreground cell `cell`.
    pub fn enriched_id(&self, cell: usize, base: usize) -> Option<usize> {
        let row = &self.cell_functions[cell];
        row.binary_search_by_key(&base, |e| e.0).ok().map(|i| row[i].1)
    }

    /// Indicator ψ_k^m evaluated on a foreground cell.
    pub fn indicator(&self, id: usize, cell: usize) -> bool {
        self.functions[id].cells.binary_search(&cell).is_ok()
    }
}

/// Active background cell containing each foreground cell. The decomposition
/// mesh must share the base grid of the background mesh and refine it.
pub fn background_cells(space: &ThbSpace, mesh: &ForegroundMesh) -> Result<Vec<usize>> {
    let bg = space.mesh();
    let dm = &mesh.decomposition;
    if bg.base() != dm.base() || bg.origin() != dm.origin() || bg.base_size() != dm.base_size() {
        return Err(Error::Input("decomposition and background meshes have different base grids".into()));
    }
    mesh.cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let d = dm.cell(cell.decomp_cell);
            bg.active_ancestor(d.level, d.ij).ok_or_else(|| {
                Error::Input(format!(
                    "foreground cell {c} lies in a background cell finer than its decomposition cell"
                ))
            })
        })
        .collect()
}

/// Edge-connected same-material components of `cells`, each sorted, ordered by
/// smallest member.
pub fn enumerate_subregions(cells: &[usize], mesh: &ForegroundMesh) -> Vec<Vec<usize>> {
    let index: HashMap<usize, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut seen = vec![false; cells.len()];
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&i| cells[i]);
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for &start in &order {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(i) = queue.pop_front() {
            let c = cells[i];
            comp.push(c);
            for &n in &mesh.neighbors[c] {
                if let Some(&j) = index.get(&n) {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

pub fn build_enriched_space(space: &ThbSpace, mesh: &ForegroundMesh) -> Result<EnrichedSpace> {
    let background_cell = background_cells(space, mesh)?;
    let mut fg_of_bg: Vec<Vec<usize>> = vec![vec![]; space.mesh().n_cells()];
    for (c, &b) in background_cell.iter().enumerate() {
        fg_of_bg[b].push(c);
    }
    let comps: Vec<Vec<Vec<usize>>> = (0..space.n_functions())
        .into_par_iter()
        .map(|k| {
            let mut cells: Vec<usize> =
                space.support(k).iter().flat_map(|&b| fg_of_bg[b].iter().copied()).collect();
            cells.sort_unstable();
            enumerate_subregions(&cells, mesh)
        })
        .collect();

    let mut functions = Vec::new();
    let mut counts = Vec::with_capacity(comps.len());
    let mut cell_functions: Vec<Vec<(usize, usize)>> = vec![vec![]; mesh.n_cells()];
    for (k, cs) in comps.into_iter().enumerate() {
        counts.push(cs.len());
        for (m, cells) in cs.into_iter().enumerate() {
            let id = functions.len();
            for &c in &cells {
                cell_functions[c].push((k, id));
            }
            functions.push(EnrichedFunction { base: k, m: m + 1, material: mesh.cells[cells[0]].material, cells });
        }
    }
    Ok(EnrichedSpace { functions, counts, background_cell, cell_functions })
}
