//! Univariate and tensor-product B-spline spaces.

use crate::error::{Error, Result};
use std::ops::Range;

const MAX_DEGREE: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
    spans: Vec<usize>,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::Input(format!("spline degree {degree} unsupported, expected 1 or 2")));
        }
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::Input(format!("{} knots too few for degree {p}", knots.len())));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::Input("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Input("knots must be non-decreasing".into()));
        }
        let n = knots.len();
        let (a, b) = (knots[0], knots[n - 1]);
        if !(b > a) {
            return Err(Error::Input("knot vector has an empty domain".into()));
        }
        let first = knots.iter().take_while(|&&k| k == a).count();
        let last = knots.iter().rev().take_while(|&&k| k == b).count();
        if first != p + 1 || last != p + 1 {
            return Err(Error::Input(format!(
                "knot vector must be open: end multiplicities {first}/{last}, expected {}",
                p + 1
            )));
        }
        let mut i = first;
        while i < n - last {
            let m = knots[i..].iter().take_while(|&&k| k == knots[i]).count();
            if m > p {
                return Err(Error::Input(format!("interior knot {} repeated {m} times", knots[i])));
            }
            i += m;
        }
        Ok(KnotVector::assemble(knots, degree))
    }

    fn assemble(knots: Vec<f64>, degree: usize) -> Self {
        let n = knots.len() - degree - 1;
        let spans = (degree..n).filter(|&s| knots[s] < knots[s + 1]).collect();
        KnotVector { knots, degree, spans }
    }

    /// Open knot vector 0,..,0,1,2,..,n,..,n with integer breakpoints.
    pub fn open_uniform(n_spans: usize, degree: usize) -> Result<Self> {
        if n_spans == 0 {
            return Err(Error::Input("at least one knot span required".into()));
        }
        let mut k = vec![0.0; degree + 1];
        k.extend((1..n_spans).map(|i| i as f64));
        k.extend(std::iter::repeat(n_spans as f64).take(degree + 1));
        KnotVector::new(k, degree)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_functions(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Knot-span indices s with knots[s] < knots[s+1], in increasing order.
    pub fn element_spans(&self) -> &[usize] {
        &self.spans
    }

    pub fn n_elements(&self) -> usize {
        self.spans.len()
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        let s = self.element_spans()[e];
        (self.knots[s], self.knots[s + 1])
    }

    /// Span containing u; the right end of the domain belongs to the last span.
    pub fn find_span(&self, u: f64) -> Result<usize> {
        let (a, b) = self.domain();
        let tol = 1e-12 * (b - a);
        if !(u >= a - tol && u <= b + tol) {
            return Err(Error::Domain(u, f64::NAN));
        }
        let u = u.clamp(a, b);
        let n = self.n_functions();
        if u >= self.knots[n] {
            return Ok(n - 1);
        }
        // largest s in [p, n-1] with knots[s] <= u
        let mut lo = self.degree;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.knots[mid] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Element index containing u (same closing convention as `find_span`).
    pub fn find_element(&self, u: f64) -> Result<usize> {
        let s = self.find_span(u)?;
        Ok(self.element_spans().binary_search(&s).expect("span is an element"))
    }

    fn basis_deg(&self, span: usize, u: f64, deg: usize) -> [f64; MAX_DEGREE + 1] {
        let k = &self.knots;
        let mut n = [0.0; MAX_DEGREE + 1];
        let mut left = [0.0; MAX_DEGREE + 1];
        let mut right = [0.0; MAX_DEGREE + 1];
        n[0] = 1.0;
        for j in 1..=deg {
            left[j] = u - k[span + 1 - j];
            right[j] = k[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Values of the p+1 functions span-p..=span at u.
    pub fn basis(&self, span: usize, u: f64) -> Vec<f64> {
        self.basis_deg(span, u, self.degree)[..=self.degree].to_vec()
    }

    /// First derivatives of the p+1 functions span-p..=span at u.
    pub fn derivatives(&self, span: usize, u: f64) -> Vec<f64> {
        let p = self.degree;
        let k = &self.knots;
        let low = self.basis_deg(span, u, p - 1);
        // low[a] = N_{span-p+1+a, p-1}
        let lower = |idx: isize| -> f64 {
            let a = idx - (span as isize - p as isize + 1);
            if a < 0 || a as usize >= p {
                0.0
            } else {
                low[a as usize]
            }
        };
        (0..=p)
            .map(|a| {
                let i = span - p + a;
                let ii = i as isize;
                let mut d = 0.0;
                let d1 = k[i + p] - k[i];
                if d1 > 0.0 {
                    d += p as f64 * lower(ii) / d1;
                }
                let d2 = k[i + p + 1] - k[i + 1];
                if d2 > 0.0 {
                    d -= p as f64 * lower(ii + 1) / d2;
                }
                d
            })
            .collect()
    }

    /// All nonzero-span functions at u as (index, value).
    pub fn eval(&self, u: f64) -> Result<Vec<(usize, f64)>> {
        let s = self.find_span(u)?;
        let (a, b) = self.domain();
        let u = u.clamp(a, b);
        Ok(self.basis(s, u).into_iter().enumerate().map(|(j, v)| (s - self.degree + j, v)).collect())
    }

    /// Element indices covered by the support of function i.
    pub fn support_elements(&self, i: usize) -> Range<usize> {
        let lo = self.knots[i];
        let hi = self.knots[i + self.degree + 1];
        let spans = self.element_spans();
        let start = spans.iter().position(|&s| self.knots[s] >= lo).unwrap_or(spans.len());
        let end = spans.iter().rposition(|&s| self.knots[s + 1] <= hi).map_or(start, |e| e + 1);
        start..end.max(start)
    }

    /// Insert the midpoint of every nonzero span. Returns the refined knot vector
    /// and, per coarse function, its (fine index, coefficient) expansion.
    pub fn refine_midpoints(&self) -> (KnotVector, Vec<Vec<(usize, f64)>>) {
        let p = self.degree;
        let mids: Vec<f64> = self
            .element_spans()
            .iter()
            .map(|&s| 0.5 * (self.knots[s] + self.knots[s + 1]))
            .collect();
        let nc = self.n_functions();
        let mut t = self.knots.clone();
        // coeff[i] = coarse function i in terms of the current basis
        let mut coeff: Vec<Vec<f64>> = (0..nc)
            .map(|i| {
                let mut r = vec![0.0; nc];
                r[i] = 1.0;
                r
            })
            .collect();
        for &u in &mids {
            let n = t.len() - p - 1;
            let k = (p..n).rfind(|&s| t[s] <= u).expect("midpoint inside domain");
            let alpha = |j: usize| -> f64 {
                if j + p <= k {
                    1.0
                } else if j > k {
                    0.0
                } else {
                    (u - t[j]) / (t[j + p] - t[j])
                }
            };
            for row in coeff.iter_mut() {
                let mut new = vec![0.0; n + 1];
                for j in 0..n {
                    if row[j] != 0.0 {
                        new[j] += row[j] * alpha(j);
                        new[j + 1] += row[j] * (1.0 - alpha(j + 1));
                    }
                }
                *row = new;
            }
            t.insert(k + 1, u);
        }
        let fine = KnotVector::assemble(t, p);
        let rows = coeff
            .into_iter()
            .map(|r| r.into_iter().enumerate().filter(|(_, c)| *c != 0.0).collect())
            .collect();
        (fine, rows)
    }
}

/// Coarse function index -> expansion in the next-finer basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementMap {
    pub rows: Vec<Vec<(usize, f64)>>,
}

/// Tensor-product space on the box origin + scale * [parametric domain].
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBSplineSpace {
    dirs: [KnotVector; 2],
    origin: [f64; 2],
    scale: [f64; 2],
}

/// Cell-local basis: the (p0+1)(p1+1) functions of one cell, ordered a + (p0+1) b.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub functions: Vec<usize>,
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

impl TensorBSplineSpace {
    pub fn new(dirs: [KnotVector; 2], origin: [f64; 2], scale: [f64; 2]) -> Result<Self> {
        if !(scale[0] > 0.0 && scale[1] > 0.0) {
            return Err(Error::Input("space scale must be positive".into()));
        }
        Ok(TensorBSplineSpace { dirs, origin, scale })
    }

    /// Open uniform space with `cells` spans per direction of physical size `h`.
    pub fn uniform(cells: [usize; 2], degree: [usize; 2], origin: [f64; 2], h: [f64; 2]) -> Result<Self> {
        let dirs = [
            KnotVector::open_uniform(cells[0], degree[0])?,
            KnotVector::open_uniform(cells[1], degree[1])?,
        ];
        TensorBSplineSpace::new(dirs, origin, h)
    }

    pub fn dir(&self, d: usize) -> &KnotVector {
        &self.dirs[d]
    }

    pub fn degree(&self) -> [usize; 2] {
        [self.dirs[0].degree(), self.dirs[1].degree()]
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn scale(&self) -> [f64; 2] {
        self.scale
    }

    pub fn function_dims(&self) -> [usize; 2] {
        [self.dirs[0].n_functions(), self.dirs[1].n_functions()]
    }

    pub fn n_functions(&self) -> usize {
        self.dirs[0].n_functions() * self.dirs[1].n_functions()
    }

    pub fn cell_dims(&self) -> [usize; 2] {
        [self.dirs[0].n_elements(), self.dirs[1].n_elements()]
    }

    pub fn n_cells(&self) -> usize {
        let c = self.cell_dims();
        c[0] * c[1]
    }

    pub fn function_index(&self, i: [usize; 2]) -> usize {
        i[0] + self.dirs[0].n_functions() * i[1]
    }

    pub fn function_multi(&self, f: usize) -> [usize; 2] {
        let n0 = self.dirs[0].n_functions();
        [f % n0, f / n0]
    }

    pub fn to_physical(&self, u: [f64; 2]) -> [f64; 2] {
        [self.origin[0] + self.scale[0] * u[0], self.origin[1] + self.scale[1] * u[1]]
    }

    pub fn to_param(&self, x: [f64; 2]) -> [f64; 2] {
        [(x[0] - self.origin[0]) / self.scale[0], (x[1] - self.origin[1]) / self.scale[1]]
    }

    /// Physical bounding box (lower, upper).
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let (a0, b0) = self.dirs[0].domain();
        let (a1, b1) = self.dirs[1].domain();
        (self.to_physical([a0, a1]), self.to_physical([b0, b1]))
    }

    pub fn cell_bounds(&self, cell: [usize; 2]) -> ([f64; 2], [f64; 2]) {
        let (a0, b0) = self.dirs[0].element_bounds(cell[0]);
        let (a1, b1) = self.dirs[1].element_bounds(cell[1]);
        (self.to_physical([a0, a1]), self.to_physical([b0, b1]))
    }

    pub fn locate(&self, x: [f64; 2]) -> Result<[usize; 2]> {
        let u = self.to_param(x);
        let e0 = self.dirs[0].find_element(u[0]).map_err(|_| Error::Domain(x[0], x[1]))?;
        let e1 = self.dirs[1].find_element(u[1]).map_err(|_| Error::Domain(x[0], x[1]))?;
        Ok([e0, e1])
    }

    /// Functions with a nonzero value at x (exact zeros on repeated knots are dropped).
    pub fn eval_basis(&self, x: [f64; 2]) -> Result<Vec<(usize, f64)>> {
        let cell = self.locate(x)?;
        let cb = self.eval_in_cell(cell, x);
        Ok(cb.functions.into_iter().zip(cb.values).filter(|(_, v)| *v != 0.0).collect())
    }

    /// Physical gradients of all functions of the span containing x.
    pub fn eval_gradients(&self, x: [f64; 2]) -> Result<Vec<(usize, [f64; 2])>> {
        let cell = self.locate(x)?;
        let cb = self.eval_in_cell(cell, x);
        Ok(cb.functions.into_iter().zip(cb.gradients).collect())
    }

    /// Evaluate the polynomial pieces of `cell` at x (x is not range checked,
    /// so points on the cell closure evaluate consistently from either side).
    pub fn eval_in_cell(&self, cell: [usize; 2], x: [f64; 2]) -> CellBasis {
        let u = self.to_param(x);
        let mut fns = [[0usize; MAX_DEGREE + 1]; 2];
        let mut val = [vec![], vec![]];
        let mut der = [vec![], vec![]];
        for d in 0..2 {
            let kv = &self.dirs[d];
            let s = kv.element_spans()[cell[d]];
            let p = kv.degree();
            for a in 0..=p {
                fns[d][a] = s - p + a;
            }
            val[d] = kv.basis(s, u[d]);
            der[d] = kv.derivatives(s, u[d]).into_iter().map(|v| v / self.scale[d]).collect();
        }
        let [p0, p1] = self.degree();
        let mut out = CellBasis {
            functions: Vec::with_capacity((p0 + 1) * (p1 + 1)),
            values: Vec::with_capacity((p0 + 1) * (p1 + 1)),
            gradients: Vec::with_capacity((p0 + 1) * (p1 + 1)),
        };
        for b in 0..=p1 {
            for a in 0..=p0 {
                out.functions.push(self.function_index([fns[0][a], fns[1][b]]));
                out.values.push(val[0][a] * val[1][b]);
                out.gradients.push([der[0][a] * val[1][b], val[0][a] * der[1][b]]);
            }
        }
        out
    }

    pub fn cell_functions(&self, cell: [usize; 2]) -> Vec<usize> {
        let [p0, p1] = self.degree();
        let s0 = self.dirs[0].element_spans()[cell[0]];
        let s1 = self.dirs[1].element_spans()[cell[1]];
        let mut v = Vec::with_capacity((p0 + 1) * (p1 + 1));
        for b in 0..=p1 {
            for a in 0..=p0 {
                v.push(self.function_index([s0 - p0 + a, s1 - p1 + b]));
            }
        }
        v
    }

    /// Support of function f as element ranges per direction.
    pub fn support_cells(&self, f: usize) -> [Range<usize>; 2] {
        let m = self.function_multi(f);
        [self.dirs[0].support_elements(m[0]), self.dirs[1].support_elements(m[1])]
    }

    /// Dyadic refinement: the finer space and each coarse function expanded in it.
    pub fn refinement_coefficients(&self) -> (TensorBSplineSpace, RefinementMap) {
        let (f0, r0) = self.dirs[0].refine_midpoints();
        let (f1, r1) = self.dirs[1].refine_midpoints();
        let fine = TensorBSplineSpace { dirs: [f0, f1], origin: self.origin, scale: self.scale };
        let rows = (0..self.n_functions())
            .map(|f| {
                let m = self.function_multi(f);
                let mut row = Vec::with_capacity(r0[m[0]].len() * r1[m[1]].len());
                for &(j, cj) in &r1[m[1]] {
                    for &(i, ci) in &r0[m[0]] {
                        row.push((fine.function_index([i, j]), ci * cj));
                    }
                }
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();
        (fine, RefinementMap { rows })
    }
}
