//! Shared problem setups: linear patch fields and a heated two-material box.

use imig_core::bench::{thb_space, Field};
use imig_core::extraction::ExtractionOperator;
use imig_core::foreground::{decomposition_mesh, BoundaryTag, BoxSide, ForegroundBasis, ForegroundMesh};
use imig_core::geometry::{discretize_lsf, LevelSetField, Material, NodalGrid, PhaseConfig};
use imig_core::hierarchy::HierMesh;
use imig_core::physics::{
    assemble_coupling, assemble_elastic, assemble_thermal, stress_at, Components, CouplingProblem, ElasticProblem,
    ThermalProblem,
};
use imig_core::solver::{reduce_system, solve, solve_staggered, CoupledSystem};
use std::sync::Arc;

pub const SIDES: [BoxSide; 4] = [BoxSide::XMin, BoxSide::XMax, BoxSide::YMin, BoxSide::YMax];

pub fn t_lin(x: [f64; 2]) -> f64 {
    0.3 + 1.7 * x[0] - 0.9 * x[1]
}

pub fn u_lin(x: [f64; 2]) -> [f64; 2] {
    [0.01 + 0.2 * x[0] - 0.05 * x[1], -0.02 + 0.07 * x[0] + 0.11 * x[1]]
}

/// Nodal L∞ errors of the linear temperature and displacement patch fields
/// with both prescribed on `tags`.
pub fn patch_errors(mesh: &ForegroundMesh, t_space: Field, u_space: Field, basis: &ForegroundBasis, tags: &[BoundaryTag], mats: &[Material]) -> (f64, f64) {
    let mut th = ThermalProblem::new(mats.iter().map(|m| m.kappa).collect(), 20.0 * (basis.q * basis.q) as f64);
    th.dirichlet = tags.iter().map(|&t| (t, Arc::new(t_lin) as _)).collect();
    let sys = assemble_thermal(&th, mesh, basis).unwrap();
    let red = reduce_system(&sys, &t_space.extraction).unwrap();
    let t = t_space.extraction.interpolate(&solve(&red.k, &red.f).unwrap().x).unwrap();
    let mut el = ElasticProblem::from_materials(mats, 20.0 * (basis.q * basis.q) as f64);
    el.dirichlet = tags.iter().map(|&t| (t, Components::All, Arc::new(u_lin) as _)).collect();
    let sys = assemble_elastic(&el, mesh, basis).unwrap();
    let mu = u_space.extraction.vector();
    let red = reduce_system(&sys, &mu).unwrap();
    let u = mu.interpolate(&solve(&red.k, &red.f).unwrap().x).unwrap();
    let mut et: f64 = 0.0;
    let mut eu: f64 = 0.0;
    for (j, &x) in basis.nodes.iter().enumerate() {
        et = et.max((t[j] - t_lin(x)).abs());
        let ue = u_lin(x);
        eu = eu.max((u[2 * j] - ue[0]).abs()).max((u[2 * j + 1] - ue[1]).abs());
    }
    (et, eu)
}

pub fn same(n: usize) -> Vec<Material> {
    (0..n)
        .map(|i| {
            let mut m = Material::lame(&format!("m{i}"), 2.3, 1.1);
            m.kappa = 0.7;
            m
        })
        .collect()
}

pub fn composite_field() -> LevelSetField {
    LevelSetField::read(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/composite_lsf.txt")).unwrap()
}

/// Unit square with the corner x + y > 1.7 removed and a circular inclusion
/// of radius 0.4 at the origin (material 0) in material 1.
pub fn cut_corner_box(n: usize, mats: Vec<Material>) -> (HierMesh, ForegroundMesh) {
    let grid = NodalGrid::covering([2 * n, 2 * n], [0.0, 0.0], [1.0, 1.0]).unwrap();
    let fields = vec![
        discretize_lsf(|x| 1.7 - x[0] - x[1], grid.clone(), 0.0).unwrap(),
        discretize_lsf(|x| x[0].hypot(x[1]) - 0.4, grid, 0.0).unwrap(),
    ];
    let phases = PhaseConfig::new(2, vec![None, Some(0), None, Some(1)], mats).unwrap();
    let bg = HierMesh::uniform([n, n], [0.0, 0.0], [1.0 / n as f64; 2]).unwrap();
    let decomp = decomposition_mesh(&[&bg], 1, 1, &fields, &phases).unwrap();
    (bg, ForegroundMesh::build(&decomp, &fields, &phases).unwrap())
}

pub struct Coupled {
    pub mesh: ForegroundMesh,
    pub basis: ForegroundBasis,
    pub el: ElasticProblem,
    pub cp: CouplingProblem,
    pub system: CoupledSystem,
    pub mt: ExtractionOperator,
    pub mu: ExtractionOperator,
}

/// Uniform temperature t_ref + dt (prescribed on the box sides) with rollers
/// on x = 0 and y = 0.
pub fn heated_box(mats: Vec<Material>, dt: f64, t_ref: f64, p: usize) -> Coupled {
    let (bg, mesh) = cut_corner_box(5, mats.clone());
    let basis = ForegroundBasis::new(&mesh, p).unwrap();
    let ft = Field::build(thb_space(bg.clone(), p).unwrap(), &mesh, &basis).unwrap();
    let fu = Field::build(thb_space(bg, p).unwrap(), &mesh, &basis).unwrap();
    let mut th = ThermalProblem::new(mats.iter().map(|m| m.kappa).collect(), 20.0);
    th.dirichlet = SIDES.iter().map(|&b| (BoundaryTag::Box(b), Arc::new(move |_| t_ref + dt) as _)).collect();
    let mut el = ElasticProblem::from_materials(&mats, 20.0);
    el.dirichlet = vec![
        (BoundaryTag::Box(BoxSide::XMin), Components::X, Arc::new(|_| [0.0, 0.0])),
        (BoundaryTag::Box(BoxSide::YMin), Components::Y, Arc::new(|_| [0.0, 0.0])),
    ];
    let cp = CouplingProblem { alpha: mats.iter().map(|m| m.alpha).collect(), reference_temperature: t_ref };
    let mu = fu.extraction.vector();
    let system = CoupledSystem::new(
        reduce_system(&assemble_thermal(&th, &mesh, &basis).unwrap(), &ft.extraction).unwrap(),
        reduce_system(&assemble_elastic(&el, &mesh, &basis).unwrap(), &mu).unwrap(),
        &assemble_coupling(&el, &cp, &mesh, &basis).unwrap(),
        &ft.extraction,
        &mu,
        t_ref,
    )
    .unwrap();
    Coupled { mesh, basis, el, cp, system, mt: ft.extraction, mu }
}

pub fn two_moduli(alpha: [f64; 2]) -> Vec<Material> {
    let mut a = Material::from_young("soft", 1.0e3, 0.3);
    a.alpha = alpha[0];
    a.kappa = 2.0;
    let mut b = Material::from_young("stiff", 2.0e4, 0.25);
    b.alpha = alpha[1];
    vec![a, b]
}

pub struct Expansion {
    /// largest stress component at the quadrature points
    pub stress: f64,
    pub e_max: f64,
    /// largest nodal deviation from the free expansion α Δt x
    pub displacement: f64,
}

/// Uniformly heated cut-corner box with equal expansion in both materials.
pub fn free_expansion(p: usize) -> Expansion {
    let (t_ref, dt, alpha) = (20.0, 15.0, 1e-3);
    let mats = two_moduli([alpha, alpha]);
    let e_max = mats.iter().map(|m| m.young()).fold(0.0, f64::max);
    let c = heated_box(mats, dt, t_ref, p);
    let sol = solve_staggered(&c.system).unwrap();
    let t = c.mt.interpolate(&sol.d_t).unwrap();
    let u = c.mu.interpolate(&sol.d_u).unwrap();
    let mut stress: f64 = 0.0;
    for cell in 0..c.mesh.n_cells() {
        let m = c.mesh.cells[cell].material;
        for (_, x, _) in c.basis.cell_quadrature(cell, 3) {
            let sh = c.basis.eval_at(cell, x);
            let tx: f64 = c.basis.cell_nodes(cell).enumerate().map(|(a, j)| t[j] * sh.values[a]).sum();
            let s = stress_at(&c.el, &c.mesh, &c.basis, cell, x, &u, c.cp.alpha[m] * (tx - t_ref));
            stress = stress.max(s.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())));
        }
    }
    let mut displacement: f64 = 0.0;
    for (j, x) in c.basis.nodes.iter().enumerate() {
        displacement = displacement
            .max((u[2 * j] - alpha * dt * x[0]).abs())
            .max((u[2 * j + 1] - alpha * dt * x[1]).abs());
    }
    Expansion { stress, e_max, displacement }
}
