//! Planar convex hull (monotone chain) with shoelace area and closed
//! perimeter; degenerate hulls (segments, points) get zero area and the
//! closed-walk perimeter, which is what the dual-set identities expect.

use crate::geom::{cross, dist, sub, Point};

/// Counter-clockwise hull of a point set with strict turns; collinear
/// interior points are dropped. Returns fewer than three points for
/// degenerate inputs.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| dist(*a, *b) <= 1e-14 * (1.0 + a[0].abs() + a[1].abs()));
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let turn_tol = 0.0;
    let mut lower: Vec<Point> = Vec::with_capacity(n);
    for &p in &pts {
        while lower.len() >= 2
            && cross(
                sub(lower[lower.len() - 1], lower[lower.len() - 2]),
                sub(p, lower[lower.len() - 2]),
            ) <= turn_tol
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(n);
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(
                sub(upper[upper.len() - 1], upper[upper.len() - 2]),
                sub(p, upper[upper.len() - 2]),
            ) <= turn_tol
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    if lower.len() + upper.len() < 3 {
        // All points collinear: return the two extremes.
        return vec![pts[0], pts[n - 1]];
    }
    lower.extend(upper);
    lower
}

/// Shoelace area of a CCW ring; zero for degenerate rings.
pub fn polygon_area(ring: &[Point]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..ring.len() {
        let p = ring[i];
        let q = ring[(i + 1) % ring.len()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

/// Closed-walk perimeter: a segment contributes twice its length, a
/// point zero.
pub fn polygon_perimeter(ring: &[Point]) -> f64 {
    match ring.len() {
        0 | 1 => 0.0,
        2 => 2.0 * dist(ring[0], ring[1]),
        n => (0..n).map(|i| dist(ring[i], ring[(i + 1) % n])).sum(),
    }
}
