//! Shared oracles for the integration tests.
#![allow(dead_code)]

pub mod cases;
pub mod conforming;
pub mod hier;
pub mod subregions;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(seed: u64, n: usize, lo: [f64; 2], hi: [f64; 2]) -> Vec<[f64; 2]> {
    let mut r = rng(seed);
    (0..n).map(|_| [r.random_range(lo[0]..hi[0]), r.random_range(lo[1]..hi[1])]).collect()
}

/// Open knot vector over [0, n] with spacing `step` and end multiplicity p + 1.
pub fn open_knots(n: usize, p: usize, step: f64) -> Vec<f64> {
    let m = (n as f64 / step).round() as usize;
    let mut k = vec![0.0; p + 1];
    k.extend((1..m).map(|i| i as f64 * step));
    k.extend(std::iter::repeat(n as f64).take(p + 1));
    k
}

/// Cox-de Boor recursion straight from the definition, right end closed.
pub fn bspline(t: &[f64], i: usize, p: usize, u: f64) -> f64 {
    if p == 0 {
        let last = *t.last().unwrap();
        let inside = t[i] <= u && u < t[i + 1];
        let at_end = u == last && t[i] < t[i + 1] && t[i + 1] == last;
        return if inside || at_end { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let d1 = t[i + p] - t[i];
    if d1 > 0.0 {
        v += (u - t[i]) / d1 * bspline(t, i, p - 1, u);
    }
    let d2 = t[i + p + 1] - t[i + 1];
    if d2 > 0.0 {
        v += (t[i + p + 1] - u) / d2 * bspline(t, i + 1, p - 1, u);
    }
    v
}

pub fn bspline_derivative(t: &[f64], i: usize, p: usize, u: f64) -> f64 {
    if p == 0 {
        return 0.0;
    }
    let mut v = 0.0;
    let d1 = t[i + p] - t[i];
    if d1 > 0.0 {
        v += p as f64 / d1 * bspline(t, i, p - 1, u);
    }
    let d2 = t[i + p + 1] - t[i + 1];
    if d2 > 0.0 {
        v -= p as f64 / d2 * bspline(t, i + 1, p - 1, u);
    }
    v
}

/// Tensor-product value and gradient of function (i, j) of a uniform space on
/// origin + h * [0, n].
pub fn tensor(n: [usize; 2], p: usize, origin: [f64; 2], h: [f64; 2], ij: [usize; 2], x: [f64; 2]) -> (f64, [f64; 2]) {
    let t0 = open_knots(n[0], p, 1.0);
    let t1 = open_knots(n[1], p, 1.0);
    let u = [(x[0] - origin[0]) / h[0], (x[1] - origin[1]) / h[1]];
    let (a, b) = (bspline(&t0, ij[0], p, u[0]), bspline(&t1, ij[1], p, u[1]));
    let (da, db) = (bspline_derivative(&t0, ij[0], p, u[0]) / h[0], bspline_derivative(&t1, ij[1], p, u[1]) / h[1]);
    (a * b, [da * b, a * db])
}

/// 1D Gauss-Legendre points and weights on [0, 1] (n = 3, exact to degree 5).
pub fn gauss3() -> [(f64, f64); 3] {
    let s = (0.6f64).sqrt();
    [(0.5 * (1.0 - s), 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 * (1.0 + s), 5.0 / 18.0)]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (m[k][n] - s) / m[k][k];
    }
    x
}
