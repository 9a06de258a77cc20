//! Gauss rules on the unit interval, unit square and reference triangle.

/// Gauss-Legendre points and weights mapped to [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss rule needs at least one point");
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        pts[i] = 0.5 * (1.0 - x);
        pts[n - 1 - i] = 0.5 * (1.0 + x);
        wts[i] = 0.5 * w;
        wts[n - 1 - i] = 0.5 * w;
    }
    (pts, wts)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Reference-coordinate quadrature: points in reference coordinates and weights
/// summing to the reference measure.
#[derive(Debug, Clone)]
pub struct Rule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Tensor Gauss rule on [0,1]^2, exact for bi-degree 2n-1.
pub fn square(n: usize) -> Rule {
    let (p, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            points.push([p[i], p[j]]);
            weights.push(w[i] * w[j]);
        }
    }
    Rule { points, weights }
}

/// Collapsed (Duffy) Gauss rule on the triangle (0,0),(1,0),(0,1); exact for
/// total degree 2n-2. Weights sum to 1/2.
pub fn triangle(n: usize) -> Rule {
    let (p, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = p[i];
            let v = p[j];
            points.push([u, v * (1.0 - u)]);
            weights.push(w[i] * w[j] * (1.0 - u));
        }
    }
    Rule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_exactness() {
        for n in 1..8 {
            let (p, w) = gauss_legendre(n);
            for k in 0..2 * n {
                let s: f64 = p.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn triangle_exactness() {
        // int over ref triangle of x^a y^b = a! b! / (a+b+2)!
        let fact = |k: u32| (1..=k).product::<u32>().max(1) as f64;
        for n in 1..6 {
            let r = triangle(n);
            for a in 0..(2 * n - 1) as u32 {
                for b in 0..(2 * n - 1) as u32 - a {
                    let s: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(x, w)| w * x[0].powi(a as i32) * x[1].powi(b as i32))
                        .sum();
                    let exact = fact(a) * fact(b) / fact(a + b + 2);
                    assert!((s - exact).abs() < 1e-14, "n={n} a={a} b={b}");
                }
            }
        }
    }
}
