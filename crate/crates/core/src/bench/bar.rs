//! Rotated three-section bar under a manufactured heat source.

use super::{cells_for, thb_space, CaseConfig, ConvergenceRow, ConvergenceTable, Field};
use crate::error::Result;
use crate::foreground::{decomposition_mesh, BoundaryTag, ForegroundBasis, ForegroundMesh};
use crate::geometry::{discretize_lsf, LevelSetField, Material, NodalGrid, PhaseConfig};
use crate::hierarchy::HierMesh;
use crate::physics::{assemble_thermal, ThermalProblem};
use crate::solver::{error_norms, reduce_system, solve};
use std::f64::consts::PI;
use std::sync::Arc;

pub const LENGTH: f64 = 5.0;
pub const HEIGHT: f64 = 1.0;
pub const ANGLE_DEG: f64 = 20.0;
pub const BOX: ([f64; 2], [f64; 2]) = ([-1.0, -0.5], [5.0, 3.0]);
pub const KAPPA: [f64; 2] = [1.0, 0.1];
pub const SIZES: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];

pub struct BarSetup {
    pub background: HierMesh,
    pub fields: Vec<LevelSetField>,
    pub phases: PhaseConfig,
    pub mesh: ForegroundMesh,
}

/// Bar-aligned coordinates (x', y').
pub fn bar_coords(x: [f64; 2]) -> [f64; 2] {
    let (s, c) = ANGLE_DEG.to_radians().sin_cos();
    [x[0] * c + x[1] * s, -x[0] * s + x[1] * c]
}

/// Level sets: ends x'=0 and x'=L (0, 1), sides y'=0 and y'=H (2, 3),
/// section interfaces x'=L/4 and x'=3L/4 (4, 5). The end sections share
/// material 0, the middle one is material 1.
pub fn bar_geometry(h: f64, fg_depth: usize, kappa: [f64; 2]) -> Result<BarSetup> {
    let (lo, hi) = BOX;
    let n = cells_for([hi[0] - lo[0], hi[1] - lo[1]], h);
    let background = HierMesh::uniform(n, lo, [(hi[0] - lo[0]) / n[0] as f64, (hi[1] - lo[1]) / n[1] as f64])?;
    let fine = [n[0] << fg_depth, n[1] << fg_depth];
    let lsfs: [fn([f64; 2]) -> f64; 6] = [
        |x| bar_coords(x)[0],
        |x| LENGTH - bar_coords(x)[0],
        |x| bar_coords(x)[1],
        |x| HEIGHT - bar_coords(x)[1],
        |x| bar_coords(x)[0] - LENGTH / 4.0,
        |x| bar_coords(x)[0] - 3.0 * LENGTH / 4.0,
    ];
    let fields = lsfs
        .iter()
        .map(|f| discretize_lsf(f, NodalGrid::covering(fine, lo, hi)?, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let map = (0..64)
        .map(|ph: usize| {
            if ph & 0b1111 != 0b1111 {
                None
            } else if ph & 0b10000 != 0 && ph & 0b100000 == 0 {
                Some(1)
            } else {
                Some(0)
            }
        })
        .collect();
    let phases =
        PhaseConfig::new(6, map, vec![Material::thermal("outer", kappa[0]), Material::thermal("middle", kappa[1])])?;
    let decomp = decomposition_mesh(&[&background], fg_depth, 1, &fields, &phases)?;
    let mesh = ForegroundMesh::build(&decomp, &fields, &phases)?;
    Ok(BarSetup { background, fields, phases, mesh })
}

fn exact(x: [f64; 2], kappa: f64) -> (f64, [f64; 2]) {
    let k = 4.0 * PI / LENGTH;
    let xp = bar_coords(x)[0];
    let (s, c) = ANGLE_DEG.to_radians().sin_cos();
    let d = k * (k * xp).cos() / kappa;
    ((k * xp).sin() / kappa, [d * c, d * s])
}

/// One sweep entry: discretize, solve and measure the temperature error.
pub fn bar_row(cfg: &CaseConfig, h: f64) -> Result<ConvergenceRow> {
    let setup = bar_geometry(h, cfg.fg_depth, KAPPA)?;
    let mesh = &setup.mesh;
    let basis = ForegroundBasis::new(mesh, cfg.q)?;
    let field = Field::build(thb_space(setup.background.clone(), cfg.degree_t)?, mesh, &basis)?;
    let beta = cfg.beta();
    let mut prob = ThermalProblem::new(KAPPA.to_vec(), beta);
    let k = 4.0 * PI / LENGTH;
    prob.source = Some(Arc::new(move |x, _| k * k * (k * bar_coords(x)[0]).sin()));
    for (tag, kap) in [(0, KAPPA[0]), (1, KAPPA[0])] {
        prob.dirichlet.push((BoundaryTag::Lsf(tag), Arc::new(move |x| exact(x, kap).0)));
    }
    let sys = assemble_thermal(&prob, mesh, &basis)?;
    let red = reduce_system(&sys, &field.extraction)?;
    let sol = solve(&red.k, &red.f)?;
    log::info!(
        "bar h={h}: {} unknowns, residual {:.2e}, {} cut cells, {} capped",
        red.f.len(),
        sol.residual,
        mesh.n_cut,
        sys.h_capped
    );
    let t = field.extraction.interpolate(&sol.x)?;
    let (l2, h1) = error_norms(mesh, &basis, &t, 1, &|x, m| {
        let (v, g) = exact(x, KAPPA[m]);
        Some(([v, 0.0], [g, [0.0; 2]]))
    })?;
    Ok(ConvergenceRow { h, dofs: field.dofs(), l2, h1 })
}

pub fn run_bar2d(cfg: &CaseConfig) -> Result<ConvergenceTable> {
    let sizes = if cfg.sizes.is_empty() { SIZES.to_vec() } else { cfg.sizes.clone() };
    let rows = sizes.iter().map(|&h| bar_row(cfg, h)).collect::<Result<Vec<_>>>()?;
    let table = ConvergenceTable { rows };
    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir)?;
        table.write_csv(&dir.join(format!("bar2d_p{}_q{}_fg{}.csv", cfg.degree_t, cfg.q, cfg.fg_depth)))?;
    }
    Ok(table)
}
