use super::{
    check_len, collect, count_capped, dot, interface_params, penalty_h, Assembled, Block, InterfaceParams, Item,
    MaterialVectorFn, VectorFn,
};
use crate::error::{Error, Result};
use crate::foreground::{segment_quadrature, BoundaryTag, ForegroundBasis, ForegroundMesh, ShapeEval};
use crate::geometry::Material;
use rayon::prelude::*;

/// Displacement components constrained by a Dirichlet condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Components {
    All,
    X,
    Y,
}

impl Components {
    fn project(self, v: [f64; 2]) -> [f64; 2] {
        match self {
            Components::All => v,
            Components::X => [v[0], 0.0],
            Components::Y => [0.0, v[1]],
        }
    }
}

/// Plane-strain linear elasticity with an isotropic inelastic strain s·I per
/// material: σ = λ tr(ε) I + 2με − 2(λ+μ) s I.
#[derive(Clone)]
pub struct ElasticProblem {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// prescribed isotropic eigenstrain per material
    pub eigenstrain: Vec<f64>,
    pub body: Option<MaterialVectorFn>,
    pub dirichlet: Vec<(BoundaryTag, Components, VectorFn)>,
    pub traction: Vec<(BoundaryTag, VectorFn)>,
    pub beta_dirichlet: f64,
    pub beta_interface: f64,
}

impl ElasticProblem {
    pub fn from_materials(materials: &[Material], beta: f64) -> Self {
        ElasticProblem {
            lambda: materials.iter().map(|m| m.lambda).collect(),
            mu: materials.iter().map(|m| m.mu).collect(),
            eigenstrain: materials.iter().map(|m| m.eigenstrain).collect(),
            body: None,
            dirichlet: vec![],
            traction: vec![],
            beta_dirichlet: beta,
            beta_interface: beta,
        }
    }

    fn young(&self, m: usize) -> f64 {
        let (l, u) = (self.lambda[m], self.mu[m]);
        u * (3.0 * l + 2.0 * u) / (l + u)
    }

    /// Stress magnitude 2(λ+μ) produced by a unit isotropic strain.
    fn bulk2(&self, m: usize) -> f64 {
        2.0 * (self.lambda[m] + self.mu[m])
    }

    fn validate(&self, n_materials: usize) -> Result<()> {
        check_len("lambda", self.lambda.len(), n_materials)?;
        check_len("mu", self.mu.len(), n_materials)?;
        check_len("eigenstrain", self.eigenstrain.len(), n_materials)?;
        for m in 0..n_materials {
            if !(self.mu[m] > 0.0 && self.lambda[m] + self.mu[m] > 0.0) {
                return Err(Error::Input(format!("material {m}: need mu > 0 and lambda + mu > 0")));
            }
        }
        Ok(())
    }

    fn interface(&self, mesh: &ForegroundMesh, cells: [usize; 2], mats: [usize; 2]) -> Result<InterfaceParams> {
        interface_params(
            [penalty_h(mesh, cells[0]).0, penalty_h(mesh, cells[1]).0],
            [self.young(mats[0]), self.young(mats[1])],
            self.beta_interface,
            2,
        )
    }
}

/// Thermal expansion data for the coupling operator.
#[derive(Debug, Clone)]
pub struct CouplingProblem {
    /// expansion coefficient per material
    pub alpha: Vec<f64>,
    pub reference_temperature: f64,
}

/// Vector shape function N_a e_k with its strain divergence and traction.
struct Mode {
    v: [f64; 2],
    eps: [[f64; 2]; 2],
    div: f64,
    t: [f64; 2],
}

fn modes(s: &ShapeEval, lambda: f64, mu: f64, n: [f64; 2]) -> Vec<Mode> {
    let mut out = Vec::with_capacity(2 * s.values.len());
    for (a, &g) in s.gradients.iter().enumerate() {
        for k in 0..2 {
            let mut v = [0.0; 2];
            v[k] = s.values[a];
            let mut eps = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    eps[i][j] = 0.5 * ((i == k) as u8 as f64 * g[j] + (j == k) as u8 as f64 * g[i]);
                }
            }
            let div = g[k];
            let mut t = [0.0; 2];
            for i in 0..2 {
                t[i] = lambda * div * n[i] + 2.0 * mu * (eps[i][0] * n[0] + eps[i][1] * n[1]);
            }
            out.push(Mode { v, eps, div, t });
        }
    }
    out
}

fn vector_dofs(basis: &ForegroundBasis, c: usize) -> Vec<usize> {
    basis.cell_nodes(c).flat_map(|j| [2 * j, 2 * j + 1]).collect()
}

pub fn assemble_elastic(p: &ElasticProblem, mesh: &ForegroundMesh, basis: &ForegroundBasis) -> Result<Assembled> {
    p.validate(mesh.n_materials)?;
    let nq = basis.q + 2;

    let volume = (0..mesh.n_cells()).into_par_iter().map(|c| -> Result<Item> {
        let m = mesh.cells[c].material;
        let (lam, mu) = (p.lambda[m], p.mu[m]);
        let sig = p.bulk2(m) * p.eigenstrain[m];
        let dofs = vector_dofs(basis, c);
        let n = dofs.len();
        let mut blk = Block::square(dofs.clone());
        let mut r = vec![0.0; n];
        for (xi, x, w) in basis.cell_quadrature(c, nq) {
            let md = modes(&basis.eval_ref(c, xi), lam, mu, [0.0, 0.0]);
            for a in 0..n {
                for b in 0..n {
                    let e = &md[a].eps;
                    let f = &md[b].eps;
                    let ee = e[0][0] * f[0][0] + e[0][1] * f[0][1] + e[1][0] * f[1][0] + e[1][1] * f[1][1];
                    blk.add(a, b, w * (lam * md[a].div * md[b].div + 2.0 * mu * ee));
                }
                r[a] += w * sig * md[a].div;
            }
            if let Some(bf) = &p.body {
                let bx = bf(x, m);
                for a in 0..n {
                    r[a] += w * dot(bx, md[a].v);
                }
            }
        }
        Ok((Some(blk), dofs.into_iter().zip(r).collect()))
    });

    let boundary = mesh.boundaries.par_iter().map(|f| -> Result<Item> {
        let c = f.cell;
        let m = f.material;
        let (lam, mu) = (p.lambda[m], p.mu[m]);
        let dofs = vector_dofs(basis, c);
        let n = dofs.len();
        let mut r = vec![0.0; n];
        let mut blk = None;
        if let Some((_, comp, g)) = p.dirichlet.iter().find(|(t, _, _)| *t == f.tag) {
            let pen = p.beta_dirichlet * p.young(m) / penalty_h(mesh, c).0;
            let sig = p.bulk2(m) * p.eigenstrain[m];
            let mut b = Block::square(dofs.clone());
            for (x, w) in segment_quadrature(f.a, f.b, nq) {
                let md = modes(&basis.eval_at(c, x), lam, mu, f.normal);
                let pv: Vec<[f64; 2]> = md.iter().map(|o| comp.project(o.v)).collect();
                let pg = comp.project(g(x));
                for i in 0..n {
                    for j in 0..n {
                        let v = -dot(pv[i], md[j].t) - dot(pv[j], md[i].t) + pen * dot(pv[i], pv[j]);
                        b.add(i, j, w * v);
                    }
                    r[i] += w * (-dot(pg, md[i].t) + pen * dot(pg, pv[i]) - sig * dot(pv[i], f.normal));
                }
            }
            blk = Some(b);
        } else if let Some((_, h)) = p.traction.iter().find(|(t, _)| *t == f.tag) {
            for (x, w) in segment_quadrature(f.a, f.b, nq) {
                let s = basis.eval_at(c, x);
                let hx = h(x);
                for (a, &v) in s.values.iter().enumerate() {
                    r[2 * a] += w * hx[0] * v;
                    r[2 * a + 1] += w * hx[1] * v;
                }
            }
        }
        Ok((blk, dofs.into_iter().zip(r).collect()))
    });

    let interface = mesh.interfaces.par_iter().map(|f| -> Result<Item> {
        let [ca, cb] = f.cells;
        let [ma, mb] = f.materials;
        let ip = p.interface(mesh, f.cells, f.materials)?;
        let sig = ip.w[0] * p.bulk2(ma) * p.eigenstrain[ma] + ip.w[1] * p.bulk2(mb) * p.eigenstrain[mb];
        let da = vector_dofs(basis, ca);
        let na = da.len();
        let dofs: Vec<usize> = da.into_iter().chain(vector_dofs(basis, cb)).collect();
        let n = dofs.len();
        let mut blk = Block::square(dofs.clone());
        let mut r = vec![0.0; n];
        let mut jump = vec![[0.0; 2]; n];
        let mut avg = vec![[0.0; 2]; n];
        for (x, w) in segment_quadrature(f.a, f.b, nq) {
            let ma_ = modes(&basis.eval_at(ca, x), p.lambda[ma], p.mu[ma], f.normal);
            let mb_ = modes(&basis.eval_at(cb, x), p.lambda[mb], p.mu[mb], f.normal);
            for (i, o) in ma_.iter().enumerate() {
                jump[i] = o.v;
                avg[i] = [ip.w[0] * o.t[0], ip.w[0] * o.t[1]];
            }
            for (i, o) in mb_.iter().enumerate() {
                jump[na + i] = [-o.v[0], -o.v[1]];
                avg[na + i] = [ip.w[1] * o.t[0], ip.w[1] * o.t[1]];
            }
            for i in 0..n {
                for j in 0..n {
                    let v = -dot(jump[i], avg[j]) - dot(avg[i], jump[j]) + ip.gamma * dot(jump[i], jump[j]);
                    blk.add(i, j, w * v);
                }
                r[i] -= w * sig * dot(jump[i], f.normal);
            }
        }
        Ok((Some(blk), dofs.into_iter().zip(r).collect()))
    });

    let mut items: Vec<Item> = volume.collect::<Result<_>>()?;
    items.extend(boundary.collect::<Result<Vec<_>>>()?);
    items.extend(interface.collect::<Result<Vec<_>>>()?);
    Ok(collect(2 * basis.n_nodes(), 2 * basis.n_nodes(), items, count_capped(mesh)))
}

/// Operator A^{vθ} mapping foreground temperatures to the elastic load
/// produced by the thermal strain α(T − T₀)I; rows are vector dofs, columns
/// scalar nodes. The load of a temperature field t is A^{vθ}(t − T₀).
pub fn assemble_coupling(
    p: &ElasticProblem,
    c: &CouplingProblem,
    mesh: &ForegroundMesh,
    basis: &ForegroundBasis,
) -> Result<Assembled> {
    p.validate(mesh.n_materials)?;
    check_len("alpha", c.alpha.len(), mesh.n_materials)?;
    let nq = basis.q + 2;
    let coef = |m: usize| p.bulk2(m) * c.alpha[m];

    let volume = (0..mesh.n_cells()).into_par_iter().map(|cell| -> Result<Item> {
        let m = mesh.cells[cell].material;
        let rows = vector_dofs(basis, cell);
        let cols: Vec<usize> = basis.cell_nodes(cell).collect();
        let mut blk = Block::rect(rows, cols);
        for (xi, _, w) in basis.cell_quadrature(cell, nq) {
            let s = basis.eval_ref(cell, xi);
            let md = modes(&s, p.lambda[m], p.mu[m], [0.0, 0.0]);
            for (a, o) in md.iter().enumerate() {
                for (j, &nj) in s.values.iter().enumerate() {
                    blk.add(a, j, w * coef(m) * o.div * nj);
                }
            }
        }
        Ok((Some(blk), vec![]))
    });

    let boundary = mesh.boundaries.par_iter().map(|f| -> Result<Item> {
        let Some((_, comp, _)) = p.dirichlet.iter().find(|(t, _, _)| *t == f.tag) else {
            return Ok((None, vec![]));
        };
        let cell = f.cell;
        let rows = vector_dofs(basis, cell);
        let cols: Vec<usize> = basis.cell_nodes(cell).collect();
        let mut blk = Block::rect(rows, cols);
        for (x, w) in segment_quadrature(f.a, f.b, nq) {
            let s = basis.eval_at(cell, x);
            for (a, &na) in s.values.iter().enumerate() {
                for k in 0..2 {
                    let mut v = [0.0; 2];
                    v[k] = na;
                    let pn = dot(comp.project(v), f.normal);
                    for (j, &nj) in s.values.iter().enumerate() {
                        blk.add(2 * a + k, j, -w * coef(f.material) * pn * nj);
                    }
                }
            }
        }
        Ok((Some(blk), vec![]))
    });

    let interface = mesh.interfaces.par_iter().map(|f| -> Result<Item> {
        let [ca, cb] = f.cells;
        let [ma, mb] = f.materials;
        let ip = p.interface(mesh, f.cells, f.materials)?;
        let rows: Vec<usize> = vector_dofs(basis, ca).into_iter().chain(vector_dofs(basis, cb)).collect();
        let cols: Vec<usize> = basis.cell_nodes(ca).chain(basis.cell_nodes(cb)).collect();
        let mut blk = Block::rect(rows, cols);
        for (x, w) in segment_quadrature(f.a, f.b, nq) {
            let sa = basis.eval_at(ca, x);
            let sb = basis.eval_at(cb, x);
            // jump of the vector mode dotted with the normal
            let jn: Vec<f64> = sa
                .values
                .iter()
                .flat_map(|&v| [v * f.normal[0], v * f.normal[1]])
                .chain(sb.values.iter().flat_map(|&v| [-v * f.normal[0], -v * f.normal[1]]))
                .collect();
            let g: Vec<f64> = sa
                .values
                .iter()
                .map(|&v| ip.w[0] * coef(ma) * v)
                .chain(sb.values.iter().map(|&v| ip.w[1] * coef(mb) * v))
                .collect();
            for (i, &ji) in jn.iter().enumerate() {
                for (j, &gj) in g.iter().enumerate() {
                    blk.add(i, j, -w * ji * gj);
                }
            }
        }
        Ok((Some(blk), vec![]))
    });

    let mut items: Vec<Item> = volume.collect::<Result<_>>()?;
    items.extend(boundary.collect::<Result<Vec<_>>>()?);
    items.extend(interface.collect::<Result<Vec<_>>>()?);
    Ok(collect(2 * basis.n_nodes(), basis.n_nodes(), items, count_capped(mesh)))
}

/// Cauchy stress at x in cell c from interleaved foreground displacements u
/// and an isotropic inelastic strain s.
pub fn stress_at(
    p: &ElasticProblem,
    mesh: &ForegroundMesh,
    basis: &ForegroundBasis,
    c: usize,
    x: [f64; 2],
    u: &[f64],
    s: f64,
) -> [[f64; 2]; 2] {
    let m = mesh.cells[c].material;
    let sh = basis.eval_at(c, x);
    let mut g = [[0.0; 2]; 2];
    for (a, j) in basis.cell_nodes(c).enumerate() {
        for k in 0..2 {
            for d in 0..2 {
                g[k][d] += u[2 * j + k] * sh.gradients[a][d];
            }
        }
    }
    let eps = [[g[0][0], 0.5 * (g[0][1] + g[1][0])], [0.5 * (g[0][1] + g[1][0]), g[1][1]]];
    let tr = eps[0][0] + eps[1][1];
    let (lam, mu) = (p.lambda[m], p.mu[m]);
    let iso = lam * tr - p.bulk2(m) * s;
    [[iso + 2.0 * mu * eps[0][0], 2.0 * mu * eps[0][1]], [2.0 * mu * eps[1][0], iso + 2.0 * mu * eps[1][1]]]
}
