//! Quadrature rules: Gauss-Legendre on intervals and low-order simplex
//! rules used for coefficient means and lumped loads.

use crate::geom::Point;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre polynomial. Exact for polynomials of
/// degree 2n − 1.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    let m = (n + 1) / 2;
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((-x, w));
        if i != n - 1 - i {
            rule.push((x, w));
        }
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rule
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Quadrature points and weights on a simplex, exact for polynomials of
/// degree at least 2 (degree 3 in 1D, degree 2 in 2D). Weights sum to
/// the simplex measure.
pub fn simplex_rule(dim: usize, verts: &[Point], measure: f64) -> Vec<(Point, f64)> {
    match dim {
        1 => gauss_legendre_on(2, verts[0][0], verts[1][0])
            .into_iter()
            .map(|(x, w)| ([x, 0.0], w))
            .collect(),
        2 => {
            // Edge-midpoint rule: exact for quadratics.
            let w = measure / 3.0;
            (0..3)
                .map(|i| {
                    let a = verts[i];
                    let b = verts[(i + 1) % 3];
                    ([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], w)
                })
                .collect()
        }
        _ => unreachable!(),
    }
}
