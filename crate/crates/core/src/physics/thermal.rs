use super::{
    check_len, collect, count_capped, dot, interface_params, normal_derivatives, penalty_h, Assembled, Block, Item,
    MaterialScalarFn, ScalarFn,
};
use crate::error::Result;
use crate::foreground::{segment_quadrature, BoundaryTag, ForegroundBasis, ForegroundMesh};
use rayon::prelude::*;

/// Steady heat conduction -∇·(κ∇T) = f.
#[derive(Clone)]
pub struct ThermalProblem {
    /// conductivity per material
    pub kappa: Vec<f64>,
    pub source: Option<MaterialScalarFn>,
    /// prescribed temperature
    pub dirichlet: Vec<(BoundaryTag, ScalarFn)>,
    /// prescribed normal flux κ∇T·n (outward normal)
    pub flux: Vec<(BoundaryTag, ScalarFn)>,
    pub beta_dirichlet: f64,
    pub beta_interface: f64,
}

impl ThermalProblem {
    pub fn new(kappa: Vec<f64>, beta: f64) -> Self {
        ThermalProblem {
            kappa,
            source: None,
            dirichlet: vec![],
            flux: vec![],
            beta_dirichlet: beta,
            beta_interface: beta,
        }
    }
}

pub fn assemble_thermal(p: &ThermalProblem, mesh: &ForegroundMesh, basis: &ForegroundBasis) -> Result<Assembled> {
    check_len("conductivity", p.kappa.len(), mesh.n_materials)?;
    for &k in &p.kappa {
        if !(k > 0.0) {
            return Err(crate::Error::Input(format!("conductivity {k} must be positive")));
        }
    }
    let nq = basis.q + 2;

    let volume = (0..mesh.n_cells()).into_par_iter().map(|c| -> Result<Item> {
        let mat = mesh.cells[c].material;
        let kappa = p.kappa[mat];
        let dofs: Vec<usize> = basis.cell_nodes(c).collect();
        let n = dofs.len();
        let mut blk = Block::square(dofs.clone());
        let mut r = vec![0.0; n];
        for (xi, x, w) in basis.cell_quadrature(c, nq) {
            let s = basis.eval_ref(c, xi);
            for a in 0..n {
                for b in 0..n {
                    blk.add(a, b, w * kappa * dot(s.gradients[a], s.gradients[b]));
                }
            }
            if let Some(f) = &p.source {
                let fx = f(x, mat);
                for a in 0..n {
                    r[a] += w * fx * s.values[a];
                }
            }
        }
        Ok((Some(blk), dofs.into_iter().zip(r).collect()))
    });

    let boundary = mesh.boundaries.par_iter().map(|f| -> Result<Item> {
        let c = f.cell;
        let dofs: Vec<usize> = basis.cell_nodes(c).collect();
        let n = dofs.len();
        let kappa = p.kappa[f.material];
        let mut r = vec![0.0; n];
        let mut blk = None;
        if let Some((_, g)) = p.dirichlet.iter().find(|(t, _)| *t == f.tag) {
            let pen = p.beta_dirichlet * kappa / penalty_h(mesh, c).0;
            let mut b = Block::square(dofs.clone());
            for (x, w) in segment_quadrature(f.a, f.b, nq) {
                let s = basis.eval_at(c, x);
                let dn = normal_derivatives(&s, f.normal);
                let gx = g(x);
                for i in 0..n {
                    for j in 0..n {
                        let v = -kappa * s.values[i] * dn[j] - kappa * s.values[j] * dn[i]
                            + pen * s.values[i] * s.values[j];
                        b.add(i, j, w * v);
                    }
                    r[i] += w * (-kappa * gx * dn[i] + pen * gx * s.values[i]);
                }
            }
            blk = Some(b);
        } else if let Some((_, q)) = p.flux.iter().find(|(t, _)| *t == f.tag) {
            for (x, w) in segment_quadrature(f.a, f.b, nq) {
                let s = basis.eval_at(c, x);
                let qx = q(x);
                for i in 0..n {
                    r[i] += w * qx * s.values[i];
                }
            }
        }
        Ok((blk, dofs.into_iter().zip(r).collect()))
    });

    let interface = mesh.interfaces.par_iter().map(|f| -> Result<Item> {
        let [ca, cb] = f.cells;
        let ka = p.kappa[f.materials[0]];
        let kb = p.kappa[f.materials[1]];
        let ip = interface_params(
            [penalty_h(mesh, ca).0, penalty_h(mesh, cb).0],
            [ka, kb],
            p.beta_interface,
            2,
        )?;
        let na = basis.cell_nodes(ca).len();
        let dofs: Vec<usize> = basis.cell_nodes(ca).chain(basis.cell_nodes(cb)).collect();
        let n = dofs.len();
        let mut blk = Block::square(dofs.clone());
        let mut jump = vec![0.0; n];
        let mut flux = vec![0.0; n];
        for (x, w) in segment_quadrature(f.a, f.b, nq) {
            let sa = basis.eval_at(ca, x);
            let sb = basis.eval_at(cb, x);
            for i in 0..na {
                jump[i] = sa.values[i];
                flux[i] = ip.w[0] * ka * dot(sa.gradients[i], f.normal);
            }
            for i in na..n {
                jump[i] = -sb.values[i - na];
                flux[i] = ip.w[1] * kb * dot(sb.gradients[i - na], f.normal);
            }
            for i in 0..n {
                for j in 0..n {
                    blk.add(i, j, w * (-jump[i] * flux[j] - flux[i] * jump[j] + ip.gamma * jump[i] * jump[j]));
                }
            }
        }
        Ok((Some(blk), vec![]))
    });

    let mut items: Vec<Item> = volume.collect::<Result<_>>()?;
    items.extend(boundary.collect::<Result<Vec<_>>>()?);
    items.extend(interface.collect::<Result<Vec<_>>>()?);
    Ok(collect(basis.n_nodes(), basis.n_nodes(), items, count_capped(mesh)))
}
