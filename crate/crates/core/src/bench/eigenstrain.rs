//! Circular inclusion with a uniform eigenstrain in a quarter plate.

use super::{cells_for, thb_space, CaseConfig, ConvergenceRow, ConvergenceTable, Field};
use crate::error::Result;
use crate::foreground::{decomposition_mesh, BoundaryTag, BoxSide, ForegroundBasis, ForegroundMesh};
use crate::geometry::{discretize_lsf, LevelSetField, Material, NodalGrid, PhaseConfig};
use crate::hierarchy::HierMesh;
use crate::physics::{assemble_elastic, Components, ElasticProblem};
use crate::solver::{error_norms, reduce_system, solve};
use std::sync::Arc;

pub struct EigenConstants {
    pub side: f64,
    pub radius: f64,
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
    pub eps0: f64,
}

pub const EIGEN: EigenConstants =
    EigenConstants { side: 5.0, radius: 0.5, lambda: [497.16, 656.79], mu: [390.63, 338.35], eps0: 0.1 };
pub const SIZES: [f64; 6] = [0.625, 0.3125, 0.15625, 0.078125, 0.0390625, 0.01953125];

impl EigenConstants {
    pub fn c1(&self) -> f64 {
        (self.lambda[0] + self.mu[0]) * self.eps0 / (self.lambda[0] + self.mu[0] + self.mu[1])
    }
}

pub struct EigenSetup {
    pub background: HierMesh,
    pub fields: Vec<LevelSetField>,
    pub phases: PhaseConfig,
    pub mesh: ForegroundMesh,
}

/// Radial displacement field: C₁x inside, C₁R²x/r² outside.
pub fn eigenstrain_exact(x: [f64; 2], material: usize) -> ([f64; 2], [[f64; 2]; 2]) {
    let c1 = EIGEN.c1();
    if material == 0 {
        return ([c1 * x[0], c1 * x[1]], [[c1, 0.0], [0.0, c1]]);
    }
    let r2 = x[0] * x[0] + x[1] * x[1];
    let k = c1 * EIGEN.radius * EIGEN.radius;
    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = k * ((i == j) as u8 as f64 / r2 - 2.0 * x[i] * x[j] / (r2 * r2));
        }
    }
    ([k * x[0] / r2, k * x[1] / r2], g)
}

/// Material 0 is the inclusion r < R, material 1 the plate.
pub fn eigenstrain_geometry(h: f64, fg_depth: usize) -> Result<EigenSetup> {
    let s = EIGEN.side;
    let n = cells_for([s, s], h);
    let background = HierMesh::uniform(n, [0.0, 0.0], [s / n[0] as f64, s / n[1] as f64])?;
    let grid = NodalGrid::covering([n[0] << fg_depth, n[1] << fg_depth], [0.0, 0.0], [s, s])?;
    let fields = vec![discretize_lsf(|x| (x[0] * x[0] + x[1] * x[1]).sqrt() - EIGEN.radius, grid, 0.0)?];
    let mut inc = Material::lame("inclusion", EIGEN.lambda[0], EIGEN.mu[0]);
    inc.eigenstrain = EIGEN.eps0;
    let plate = Material::lame("plate", EIGEN.lambda[1], EIGEN.mu[1]);
    let phases = PhaseConfig::new(1, vec![Some(0), Some(1)], vec![inc, plate])?;
    let decomp = decomposition_mesh(&[&background], fg_depth, 1, &fields, &phases)?;
    let mesh = ForegroundMesh::build(&decomp, &fields, &phases)?;
    Ok(EigenSetup { background, fields, phases, mesh })
}

pub fn eigenstrain_row(cfg: &CaseConfig, h: f64) -> Result<ConvergenceRow> {
    let setup = eigenstrain_geometry(h, cfg.fg_depth)?;
    let mesh = &setup.mesh;
    let basis = ForegroundBasis::new(mesh, cfg.q)?;
    let field = Field::build(thb_space(setup.background.clone(), cfg.degree_u)?, mesh, &basis)?;
    let vec_op = field.extraction.vector();
    let mut prob = ElasticProblem::from_materials(&setup.phases.materials, cfg.beta());
    let zero: crate::physics::VectorFn = Arc::new(|_| [0.0, 0.0]);
    // the outer edges lie in the plate
    let outer: crate::physics::VectorFn = Arc::new(|x| eigenstrain_exact(x, 1).0);
    prob.dirichlet = vec![
        (BoundaryTag::Box(BoxSide::XMin), Components::X, zero.clone()),
        (BoundaryTag::Box(BoxSide::YMin), Components::Y, zero),
        (BoundaryTag::Box(BoxSide::XMax), Components::All, outer.clone()),
        (BoundaryTag::Box(BoxSide::YMax), Components::All, outer),
    ];
    let sys = assemble_elastic(&prob, mesh, &basis)?;
    let red = reduce_system(&sys, &vec_op)?;
    let sol = solve(&red.k, &red.f)?;
    log::info!(
        "eigenstrain h={h} depth={}: {} unknowns, residual {:.2e}, {} fg cells",
        cfg.fg_depth,
        red.f.len(),
        sol.residual,
        mesh.n_cells()
    );
    let u = vec_op.interpolate(&sol.x)?;
    let (l2, h1) = error_norms(mesh, &basis, &u, 2, &|x, m| Some(eigenstrain_exact(x, m)))?;
    Ok(ConvergenceRow { h, dofs: vec_op.n_rows(), l2, h1 })
}

pub fn run_eigenstrain(cfg: &CaseConfig) -> Result<ConvergenceTable> {
    let sizes = if cfg.sizes.is_empty() { SIZES.to_vec() } else { cfg.sizes.clone() };
    let rows = sizes.iter().map(|&h| eigenstrain_row(cfg, h)).collect::<Result<Vec<_>>>()?;
    let table = ConvergenceTable { rows };
    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir)?;
        table.write_csv(&dir.join(format!("eigenstrain_p{}_q{}_fg{}.csv", cfg.degree_u, cfg.q, cfg.fg_depth)))?;
    }
    Ok(table)
}
