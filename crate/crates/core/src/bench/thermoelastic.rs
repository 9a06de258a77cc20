//! Heated compression-shear test of a two-phase composite given on a level-set grid.

use super::{thb_space, CaseConfig, Field};
use crate::error::{Error, Result};
use crate::foreground::{
    decomposition_mesh, material_change_marker, write_vtk, BoundaryTag, BoxSide, ForegroundBasis, ForegroundMesh,
    VtkArray,
};
use crate::geometry::{LevelSetField, Material, PhaseConfig};
use crate::hierarchy::HierMesh;
use crate::physics::{
    assemble_coupling, assemble_elastic, assemble_thermal, Components, CouplingProblem, ElasticProblem,
    ThermalProblem,
};
use crate::solver::{reduce_system, solve_staggered, CoupledSolution, CoupledSystem};
use std::path::Path;
use std::sync::Arc;

pub const T_TOP: f64 = 0.0;
pub const T_BOTTOM: f64 = 100.0;
pub const T_REF: f64 = 0.0;
/// top displacement in metres
pub const U_TOP: [f64; 2] = [-1e-5, -1e-5];
pub const DEFAULT_BASE: usize = 40;
pub const DEFAULT_DEPTH: usize = 2;

/// Epoxy matrix (phase 0) and alumina particles (phase 1), SI units.
pub fn composite_materials() -> Vec<Material> {
    let mut ep = Material::from_young("epoxy", 3.66e9, 0.358);
    ep.kappa = 0.14;
    ep.alpha = 65e-6;
    let mut al = Material::from_young("alumina", 320e9, 0.23);
    al.kappa = 25.0;
    al.alpha = 15e-6;
    vec![ep, al]
}

pub struct ThermoSetup {
    pub fields: Vec<LevelSetField>,
    pub phases: PhaseConfig,
    pub t_mesh: HierMesh,
    pub u_mesh: HierMesh,
    pub mesh: ForegroundMesh,
}

impl ThermoSetup {
    /// Background meshes refined `refine` levels around interfaces (dilated by
    /// the field degree) and `fg_extra` foreground-only levels on top.
    pub fn new(
        field: LevelSetField,
        materials: Vec<Material>,
        base: usize,
        refine: [usize; 2],
        degrees: [usize; 2],
        fg_extra: usize,
    ) -> Result<Self> {
        let g = &field.grid;
        let lo = g.origin;
        let hi = [
            lo[0] + g.spacing[0] * (g.nodes[0] - 1) as f64,
            lo[1] + g.spacing[1] * (g.nodes[1] - 1) as f64,
        ];
        let fields = vec![field];
        let phases = PhaseConfig::new(1, vec![Some(0), Some(1)], materials)?;
        let uniform = HierMesh::uniform([base, base], lo, [(hi[0] - lo[0]) / base as f64, (hi[1] - lo[1]) / base as f64])?;
        let (t_mesh, u_mesh) = {
            let marker = material_change_marker(&fields, &phases);
            (uniform.refined(refine[0], degrees[0], &marker)?, uniform.refined(refine[1], degrees[1], &marker)?)
        };
        let decomp = decomposition_mesh(&[&t_mesh, &u_mesh], fg_extra, 1, &fields, &phases)?;
        let mesh = ForegroundMesh::build(&decomp, &fields, &phases)?;
        Ok(ThermoSetup { fields, phases, t_mesh, u_mesh, mesh })
    }
}

pub struct ThermoSolution {
    pub basis: ForegroundBasis,
    pub temperature: Field,
    pub displacement: Field,
    pub elastic: ElasticProblem,
    pub system: CoupledSystem,
    pub solution: CoupledSolution,
    /// foreground nodal temperatures
    pub t: Vec<f64>,
    /// interleaved foreground nodal displacements
    pub u: Vec<f64>,
}

/// Boundary conditions of the compression-shear test.
pub fn thermo_problems(materials: &[Material], beta: f64) -> (ThermalProblem, ElasticProblem, CouplingProblem) {
    let mut th = ThermalProblem::new(materials.iter().map(|m| m.kappa).collect(), beta);
    th.dirichlet = vec![
        (BoundaryTag::Box(BoxSide::YMax), Arc::new(|_| T_TOP)),
        (BoundaryTag::Box(BoxSide::YMin), Arc::new(|_| T_BOTTOM)),
    ];
    let mut el = ElasticProblem::from_materials(materials, beta);
    el.dirichlet = vec![
        (BoundaryTag::Box(BoxSide::YMax), Components::All, Arc::new(|_| U_TOP)),
        (BoundaryTag::Box(BoxSide::YMin), Components::All, Arc::new(|_| [0.0, 0.0])),
    ];
    let cp = CouplingProblem { alpha: materials.iter().map(|m| m.alpha).collect(), reference_temperature: T_REF };
    (th, el, cp)
}

pub fn solve_thermoelastic(
    setup: &ThermoSetup,
    degrees: [usize; 2],
    q: usize,
    problems: &(ThermalProblem, ElasticProblem, CouplingProblem),
) -> Result<ThermoSolution> {
    let mesh = &setup.mesh;
    let basis = ForegroundBasis::new(mesh, q)?;
    let temperature = Field::build(thb_space(setup.t_mesh.clone(), degrees[0])?, mesh, &basis)?;
    let displacement = Field::build(thb_space(setup.u_mesh.clone(), degrees[1])?, mesh, &basis)?;
    let mu = displacement.extraction.vector();
    let (th, el, cp) = problems;
    let a_t = assemble_thermal(th, mesh, &basis)?;
    let a_u = assemble_elastic(el, mesh, &basis)?;
    let a_c = assemble_coupling(el, cp, mesh, &basis)?;
    let system = CoupledSystem::new(
        reduce_system(&a_t, &temperature.extraction)?,
        reduce_system(&a_u, &mu)?,
        &a_c,
        &temperature.extraction,
        &mu,
        cp.reference_temperature,
    )?;
    let solution = solve_staggered(&system)?;
    let t = temperature.extraction.interpolate(&solution.d_t)?;
    let u = mu.interpolate(&solution.d_u)?;
    Ok(ThermoSolution { basis, temperature, displacement, elastic: el.clone(), system, solution, t, u })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DofRow {
    pub depth: usize,
    pub dofs_t: usize,
    /// displacement unknowns (both components)
    pub dofs_u: usize,
    pub fg_cells: usize,
    /// nodes of a uniform conforming biquadratic mesh at the finest level, times
    /// the three solution components
    pub conforming: usize,
}

impl DofRow {
    pub fn total(&self) -> usize {
        self.dofs_t + self.dofs_u
    }
}

pub struct ThermoelasticReport {
    pub rows: Vec<DofRow>,
    pub residuals: Vec<f64>,
}

/// Per-vertex fields T, |∇T|, |u| and |ε_m| for export.
fn vertex_fields(s: &ThermoSetup, sol: &ThermoSolution, alpha: &[f64], t_ref: f64) -> Vec<VtkArray<'static>> {
    let mesh = &s.mesh;
    let mut t = vec![];
    let mut gt = vec![];
    let mut um = vec![];
    let mut em = vec![];
    for (c, cell) in mesh.cells.iter().enumerate() {
        for &v in &cell.vertices {
            let x = mesh.vertices[v];
            let sh = sol.basis.eval_at(c, x);
            let (mut tv, mut g, mut u, mut du) = (0.0, [0.0; 2], [0.0; 2], [[0.0; 2]; 2]);
            for (a, j) in sol.basis.cell_nodes(c).enumerate() {
                tv += sol.t[j] * sh.values[a];
                for d in 0..2 {
                    g[d] += sol.t[j] * sh.gradients[a][d];
                    u[d] += sol.u[2 * j + d] * sh.values[a];
                    for e in 0..2 {
                        du[d][e] += sol.u[2 * j + d] * sh.gradients[a][e];
                    }
                }
            }
            let th = alpha[cell.material] * (tv - t_ref);
            let exy = 0.5 * (du[0][1] + du[1][0]);
            t.push(tv);
            gt.push(g[0].hypot(g[1]));
            um.push(u[0].hypot(u[1]));
            em.push(((du[0][0] - th).powi(2) + (du[1][1] - th).powi(2) + 2.0 * exy * exy).sqrt());
        }
    }
    vec![
        VtkArray::Scalar("T", t),
        VtkArray::Scalar("grad_T_magnitude", gt),
        VtkArray::Scalar("u_magnitude", um),
        VtkArray::Scalar("mechanical_strain_magnitude", em),
    ]
}

/// Sweep of background refinement depths 0..=D with D - d foreground-only
/// levels, so the cut geometry is the same in every run.
pub fn run_thermoelastic(cfg: &CaseConfig, lsf_file: &Path) -> Result<ThermoelasticReport> {
    let field = LevelSetField::read(lsf_file)?;
    let base = cfg.base_cells.unwrap_or(DEFAULT_BASE);
    let depth = cfg.refine_t.max(cfg.refine_u).max(cfg.fg_depth);
    let depth = if depth == 0 { DEFAULT_DEPTH } else { depth };
    let materials = composite_materials();
    let problems = thermo_problems(&materials, cfg.beta());
    let degrees = [cfg.degree_t, cfg.degree_u];
    let mut rows = vec![];
    let mut residuals = vec![];
    for d in 0..=depth {
        let setup = ThermoSetup::new(field.clone(), materials.clone(), base, [d, d], degrees, depth - d)?;
        let sol = solve_thermoelastic(&setup, degrees, cfg.q, &problems)?;
        if !(sol.solution.residual < 1e-10) {
            return Err(Error::Singular(format!("residual {:e} at depth {d}", sol.solution.residual)));
        }
        let n = (base << depth) * cfg.q + 1;
        let row = DofRow {
            depth: d,
            dofs_t: sol.temperature.dofs(),
            dofs_u: 2 * sol.displacement.dofs(),
            fg_cells: setup.mesh.n_cells(),
            conforming: 3 * n * n,
        };
        log::info!("thermoelastic depth {d}: {row:?}, residual {:.2e}", sol.solution.residual);
        if let Some(dir) = &cfg.output {
            std::fs::create_dir_all(dir)?;
            let arrays = vertex_fields(&setup, &sol, &problems.2.alpha, T_REF);
            write_vtk(&setup.mesh, &dir.join(format!("thermoelastic_depth{d}.vtk")), &arrays)?;
        }
        residuals.push(sol.solution.residual);
        rows.push(row);
    }
    if let Some(dir) = &cfg.output {
        let mut w = csv::Writer::from_path(dir.join("thermoelastic_dofs.csv")).map_err(super::csv_err)?;
        w.write_record(["depth", "dofs_T", "dofs_u", "total", "fg_cells", "conforming_q2"]).map_err(super::csv_err)?;
        for r in &rows {
            w.write_record([
                r.depth.to_string(),
                r.dofs_t.to_string(),
                r.dofs_u.to_string(),
                r.total().to_string(),
                r.fg_cells.to_string(),
                r.conforming.to_string(),
            ])
            .map_err(super::csv_err)?;
        }
        w.flush()?;
    }
    Ok(ThermoelasticReport { rows, residuals })
}
