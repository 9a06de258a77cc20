//! Nodal level-set fields, phase indices and material tables.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

/// Node lattice of a bilinear space: `nodes` points per direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalGrid {
    pub nodes: [usize; 2],
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
}

impl NodalGrid {
    pub fn new(nodes: [usize; 2], origin: [f64; 2], spacing: [f64; 2]) -> Result<Self> {
        if nodes[0] < 2 || nodes[1] < 2 {
            return Err(Error::Input(format!("grid needs at least 2x2 nodes, got {:?}", nodes)));
        }
        if !(spacing[0] > 0.0 && spacing[1] > 0.0) {
            return Err(Error::Input("grid spacing must be positive".into()));
        }
        Ok(NodalGrid { nodes, origin, spacing })
    }

    /// Grid whose cells coincide with an n0 x n1 cell lattice on [lo, hi].
    pub fn covering(cells: [usize; 2], lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        NodalGrid::new(
            [cells[0] + 1, cells[1] + 1],
            lo,
            [(hi[0] - lo[0]) / cells[0] as f64, (hi[1] - lo[1]) / cells[1] as f64],
        )
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + self.spacing[0] * i as f64, self.origin[1] + self.spacing[1] * j as f64]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes[0] * self.nodes[1]
    }
}

/// Bilinear interpolant of nodal level-set values, with iso-level `iso`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetField {
    pub grid: NodalGrid,
    pub values: Vec<f64>,
    pub iso: f64,
    range: f64,
}

impl LevelSetField {
    pub fn new(grid: NodalGrid, values: Vec<f64>, iso: f64) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::Input(format!(
                "{} level-set values for {} grid nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite level-set value at node {k}")));
        }
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        Ok(LevelSetField { grid, values, iso, range: hi - lo })
    }

    pub fn value_node(&self, i: usize, j: usize) -> f64 {
        self.values[i + self.grid.nodes[0] * j]
    }

    /// Bilinear interpolant; points outside the grid use the nearest boundary cell.
    pub fn value_at(&self, x: [f64; 2]) -> f64 {
        let g = &self.grid;
        let mut idx = [0usize; 2];
        let mut t = [0.0; 2];
        for d in 0..2 {
            let s = (x[d] - g.origin[d]) / g.spacing[d];
            let i = (s.floor().max(0.0) as usize).min(g.nodes[d] - 2);
            idx[d] = i;
            t[d] = s - i as f64;
        }
        let (i, j) = (idx[0], idx[1]);
        let a = self.value_node(i, j);
        let b = self.value_node(i + 1, j);
        let c = self.value_node(i, j + 1);
        let d = self.value_node(i + 1, j + 1);
        let lo = a + t[0] * (b - a);
        let hi = c + t[0] * (d - c);
        lo + t[1] * (hi - lo)
    }

    pub fn gradient_at(&self, x: [f64; 2]) -> [f64; 2] {
        let g = &self.grid;
        let mut idx = [0usize; 2];
        let mut t = [0.0; 2];
        for d in 0..2 {
            let s = (x[d] - g.origin[d]) / g.spacing[d];
            let i = (s.floor().max(0.0) as usize).min(g.nodes[d] - 2);
            idx[d] = i;
            t[d] = s - i as f64;
        }
        let (i, j) = (idx[0], idx[1]);
        let a = self.value_node(i, j);
        let b = self.value_node(i + 1, j);
        let c = self.value_node(i, j + 1);
        let d = self.value_node(i + 1, j + 1);
        [
            ((b - a) * (1.0 - t[1]) + (d - c) * t[1]) / g.spacing[0],
            ((c - a) * (1.0 - t[0]) + (d - b) * t[0]) / g.spacing[1],
        ]
    }

    /// max − min of the nodal values
    pub fn range(&self) -> f64 {
        self.range
    }

    /// Values within this distance of the iso-level count as on the interface.
    pub fn snap_tolerance(&self) -> f64 {
        1e-10 * self.range()
    }

    pub fn indicator(&self, x: [f64; 2]) -> bool {
        self.value_at(x) >= self.iso
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        let mut lines = std::io::BufReader::new(f).lines();
        let header = loop {
            match lines.next() {
                Some(l) => {
                    let l = l?;
                    let t = l.trim();
                    if !t.is_empty() && !t.starts_with('#') {
                        break l;
                    }
                }
                None => return Err(Error::Input("empty level-set file".into())),
            }
        };
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 7 {
            return Err(Error::Input("header must be: nx ny x0 y0 dx dy phi_t".into()));
        }
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Input(format!("bad number '{s}'"))) };
        let nx: usize = h[0].parse().map_err(|_| Error::Input(format!("bad nx '{}'", h[0])))?;
        let ny: usize = h[1].parse().map_err(|_| Error::Input(format!("bad ny '{}'", h[1])))?;
        let grid = NodalGrid::new([nx, ny], [num(h[2])?, num(h[3])?], [num(h[4])?, num(h[5])?])?;
        let iso = num(h[6])?;
        let mut values = Vec::with_capacity(nx * ny);
        for l in lines {
            for tok in l?.split_whitespace() {
                values.push(num(tok)?);
            }
        }
        LevelSetField::new(grid, values, iso)
    }

    /// Shortest round-trip float formatting, so `read` restores identical bits.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let g = &self.grid;
        writeln!(
            w,
            "{} {} {} {} {} {} {}",
            g.nodes[0], g.nodes[1], g.origin[0], g.origin[1], g.spacing[0], g.spacing[1], self.iso
        )?;
        for j in 0..g.nodes[1] {
            let row: Vec<String> = (0..g.nodes[0]).map(|i| format!("{}", self.value_node(i, j))).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Nodal interpolation of an analytic level set on `grid`.
pub fn discretize_lsf<F: Fn([f64; 2]) -> f64>(f: F, grid: NodalGrid, iso: f64) -> Result<LevelSetField> {
    let mut values = Vec::with_capacity(grid.n_nodes());
    for j in 0..grid.nodes[1] {
        for i in 0..grid.nodes[0] {
            values.push(f(grid.node(i, j)));
        }
    }
    LevelSetField::new(grid, values, iso)
}

/// Phase index sum_j 2^j f_j with f_j = 1 iff phi_j(x) >= phi_t (j from 0).
pub fn phase_at(fields: &[LevelSetField], x: [f64; 2]) -> usize {
    phase_from_indicators(fields.iter().map(|f| f.indicator(x)))
}

pub fn phase_from_indicators<I: IntoIterator<Item = bool>>(ind: I) -> usize {
    ind.into_iter().enumerate().map(|(j, f)| (f as usize) << j).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default)]
    pub alpha: f64,
    /// Isotropic in-plane inelastic strain prescribed in this material.
    #[serde(default)]
    pub eigenstrain: f64,
}

fn one() -> f64 {
    1.0
}

impl Material {
    pub fn thermal(name: &str, kappa: f64) -> Self {
        Material { name: name.into(), kappa, lambda: 1.0, mu: 1.0, alpha: 0.0, eigenstrain: 0.0 }
    }

    pub fn lame(name: &str, lambda: f64, mu: f64) -> Self {
        Material { name: name.into(), kappa: 1.0, lambda, mu, alpha: 0.0, eigenstrain: 0.0 }
    }

    /// Lamé constants from Young's modulus and Poisson's ratio (plane strain uses
    /// the three-dimensional constants unchanged).
    pub fn from_young(name: &str, e: f64, nu: f64) -> Self {
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e / (2.0 * (1.0 + nu));
        Material::lame(name, lambda, mu)
    }

    pub fn young(&self) -> f64 {
        self.mu * (3.0 * self.lambda + 2.0 * self.mu) / (self.lambda + self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::Input(format!("material {}: conductivity must be positive", self.name)));
        }
        if !(self.mu > 0.0 && self.lambda + self.mu > 0.0) {
            return Err(Error::Input(format!("material {}: need mu > 0 and lambda + mu > 0", self.name)));
        }
        Ok(())
    }
}

/// Phase index -> material id (None = void) for n level sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub phase_to_material: Vec<Option<usize>>,
    pub materials: Vec<Material>,
}

impl PhaseConfig {
    pub fn new(n_lsf: usize, phase_to_material: Vec<Option<usize>>, materials: Vec<Material>) -> Result<Self> {
        if phase_to_material.len() != 1 << n_lsf {
            return Err(Error::Input(format!(
                "phase map has {} entries, expected 2^{n_lsf}",
                phase_to_material.len()
            )));
        }
        if !phase_to_material.iter().any(|m| m.is_some()) {
            return Err(Error::Input("phase map has no material phase".into()));
        }
        for m in phase_to_material.iter().flatten() {
            if *m >= materials.len() {
                return Err(Error::Input(format!("phase map names unknown material {m}")));
            }
        }
        for m in &materials {
            m.validate()?;
        }
        Ok(PhaseConfig { phase_to_material, materials })
    }

    /// Single material everywhere.
    pub fn single(n_lsf: usize, material: Material) -> Self {
        PhaseConfig { phase_to_material: vec![Some(0); 1 << n_lsf], materials: vec![material] }
    }

    pub fn material_of(&self, phase: usize) -> Option<usize> {
        self.phase_to_material[phase]
    }

    pub fn n_lsf(&self) -> usize {
        self.phase_to_material.len().trailing_zeros() as usize
    }
}
