//! Small fixed-size geometry kernel for d ∈ {1, 2}.
//!
//! Points and vectors are stored as `[f64; 2]` regardless of the mesh
//! dimension; one-dimensional data keeps the second component at zero.
//! This keeps a single code path through the mesh and operator machinery
//! while the genuinely dimension-dependent formulas (barycentric
//! coordinates, eigenpairs, face measures) branch on `dim` in one place.

use crate::{Error, Result};

/// Coordinate or direction vector. In 1D the second entry is zero.
pub type Point = [f64; 2];

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn scale(t: f64, a: Point) -> Point {
    [t * a[0], t * a[1]]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// z-component of the 2D cross product (a × b).
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Dense 2×2 matrix, row major. 1D fields embed as `[[a, 0], [0, 1]]`
/// so that the unused axis is inert under products and square roots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2 { m: [[m00, m01], [m10, m11]] }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, b)
    }

    /// Embeds a 1×1 coefficient as a 2×2 matrix with an inert second axis.
    pub fn scalar_1d(a: f64) -> Self {
        Mat2::diag(a, 1.0)
    }

    pub fn mul_vec(&self, v: Point) -> Point {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn symmetrize(&self) -> Mat2 {
        let off = 0.5 * (self.m[0][1] + self.m[1][0]);
        Mat2::new(self.m[0][0], off, off, self.m[1][1])
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + other.m[0][0],
            self.m[0][1] + other.m[0][1],
            self.m[1][0] + other.m[1][0],
            self.m[1][1] + other.m[1][1],
        )
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] - other.m[0][0],
            self.m[0][1] - other.m[0][1],
            self.m[1][0] - other.m[1][0],
            self.m[1][1] - other.m[1][1],
        )
    }

    pub fn scale(&self, t: f64) -> Mat2 {
        Mat2::new(t * self.m[0][0], t * self.m[0][1], t * self.m[1][0], t * self.m[1][1])
    }

    pub fn matmul(&self, other: &Mat2) -> Mat2 {
        let a = &self.m;
        let b = &other.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    /// Double contraction A : B = Σ_ij A_ij B_ij.
    pub fn ddot(&self, other: &Mat2) -> f64 {
        self.m[0][0] * other.m[0][0]
            + self.m[0][1] * other.m[0][1]
            + self.m[1][0] * other.m[1][0]
            + self.m[1][1] * other.m[1][1]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    /// Eigenvalues of the symmetric part, ascending. Closed form.
    pub fn sym_eigenvalues(&self) -> [f64; 2] {
        let s = self.symmetrize();
        let (a, b, c) = (s.m[0][0], s.m[0][1], s.m[1][1]);
        let mean = 0.5 * (a + c);
        let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        [mean - r, mean + r]
    }

    /// Eigendecomposition of the symmetric part: returns (eigenvalues
    /// ascending, orthonormal eigenvectors as columns of Q).
    pub fn sym_eigen(&self) -> ([f64; 2], Mat2) {
        let s = self.symmetrize();
        let (a, b, c) = (s.m[0][0], s.m[0][1], s.m[1][1]);
        let [lo, hi] = s.sym_eigenvalues();
        if b.abs() <= 1e-300 * (1.0 + a.abs() + c.abs()) {
            // Already diagonal; keep axis order consistent with ascending values.
            if a <= c {
                return ([a, c], Mat2::identity());
            }
            return ([c, a], Mat2::new(0.0, 1.0, 1.0, 0.0));
        }
        // Eigenvector for `hi` from the better-conditioned of the two rows.
        let v = if (a - hi).abs() >= (c - hi).abs() {
            [-b, a - hi]
        } else {
            [c - hi, -b]
        };
        let n = norm(v);
        let v_hi = [v[0] / n, v[1] / n];
        let v_lo = [-v_hi[1], v_hi[0]];
        ([lo, hi], Mat2::new(v_lo[0], v_hi[0], v_lo[1], v_hi[1]))
    }

    /// Spectral norm of the symmetric part (largest |eigenvalue|).
    pub fn spectral_norm(&self) -> f64 {
        let [lo, hi] = self.sym_eigenvalues();
        lo.abs().max(hi.abs())
    }

    /// Symmetric positive definite square root via closed-form
    /// eigendecomposition. Rejects non-PD input with the offending
    /// eigenvalue. Eigenvalues inside `(-clamp_below, 0]` are lifted to
    /// `clamp_to` to absorb quadrature round-off on boundary stars.
    pub fn spd_sqrt_clamped(&self, clamp_below: f64, clamp_to: f64) -> Result<Mat2> {
        let ([lo, hi], q) = self.sym_eigen();
        let fix = |ev: f64| -> Result<f64> {
            if ev > 0.0 {
                Ok(ev)
            } else if ev > -clamp_below {
                Ok(clamp_to)
            } else {
                Err(Error::NotPositiveDefinite(ev))
            }
        };
        let (lo, hi) = (fix(lo)?, fix(hi)?);
        let d = Mat2::diag(lo.sqrt(), hi.sqrt());
        Ok(q.matmul(&d).matmul(&q.transpose()).symmetrize())
    }

    pub fn spd_sqrt(&self) -> Result<Mat2> {
        self.spd_sqrt_clamped(0.0, 0.0)
    }
}

/// Measure of a simplex given its vertices (length in 1D, area in 2D).
/// Signed in 2D: positive for counter-clockwise vertex order.
pub fn simplex_signed_measure(dim: usize, verts: &[Point]) -> f64 {
    match dim {
        1 => verts[1][0] - verts[0][0],
        2 => 0.5 * cross(sub(verts[1], verts[0]), sub(verts[2], verts[0])),
        _ => unreachable!("dim checked at mesh construction"),
    }
}

/// Barycentric coordinates of `x` with respect to a simplex. The first
/// coordinate is recovered as 1 − Σ others so the sum is exactly one.
pub fn barycentric(dim: usize, verts: &[Point], x: Point) -> [f64; 3] {
    match dim {
        1 => {
            let t = (x[0] - verts[0][0]) / (verts[1][0] - verts[0][0]);
            [1.0 - t, t, 0.0]
        }
        2 => {
            let e1 = sub(verts[1], verts[0]);
            let e2 = sub(verts[2], verts[0]);
            let r = sub(x, verts[0]);
            let det = cross(e1, e2);
            let b1 = cross(r, e2) / det;
            let b2 = cross(e1, r) / det;
            [1.0 - b1 - b2, b1, b2]
        }
        _ => unreachable!(),
    }
}

/// Gradients of the barycentric (hat) basis functions on a simplex,
/// one per vertex, constant over the element.
pub fn hat_gradients(dim: usize, verts: &[Point]) -> [Point; 3] {
    match dim {
        1 => {
            let len = verts[1][0] - verts[0][0];
            [[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0, 0.0]]
        }
        2 => {
            let e1 = sub(verts[1], verts[0]);
            let e2 = sub(verts[2], verts[0]);
            let det = cross(e1, e2);
            // ∇λ1 = rot(e2)/det, ∇λ2 = -rot(e1)/det with rot(v) = (-v_y, v_x)ᵀ … solved
            // from E ∇λ = I for E = [e1 e2] columns.
            let g1 = [e2[1] / det, -e2[0] / det];
            let g2 = [-e1[1] / det, e1[0] / det];
            let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
            [g0, g1, g2]
        }
        _ => unreachable!(),
    }
}

/// Distance from a point to a segment (2D boundary face helper).
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, add(a, scale(t, ab)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn eigen_diag_identity() {
        let ([lo, hi], _) = Mat2::identity().sym_eigen();
        assert_eq!(lo, 1.0);
        assert_eq!(hi, 1.0);
        let s = Mat2::identity().spd_sqrt().unwrap();
        assert_eq!(s, Mat2::identity());
    }

    #[test]
    fn sqrt_diag_case() {
        let s = Mat2::diag(4.0, 9.0).spd_sqrt().unwrap();
        assert_relative_eq!(s.m[0][0], 2.0, max_relative = 1e-14);
        assert_relative_eq!(s.m[1][1], 3.0, max_relative = 1e-14);
        assert_eq!(s.m[0][1], 0.0);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let err = Mat2::diag(1.0, -2.0).spd_sqrt().unwrap_err();
        match err {
            Error::NotPositiveDefinite(ev) => assert_relative_eq!(ev, -2.0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn barycentric_centroid() {
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let b = barycentric(2, &verts, [1.0 / 3.0, 1.0 / 3.0]);
        for bi in b {
            assert_relative_eq!(bi, 1.0 / 3.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn hat_gradient_partition() {
        let verts = [[0.2, 0.1], [1.3, 0.4], [0.5, 2.0]];
        let g = hat_gradients(2, &verts);
        assert_relative_eq!(g[0][0] + g[1][0] + g[2][0], 0.0, epsilon = 1e-13);
        assert_relative_eq!(g[0][1] + g[1][1] + g[2][1], 0.0, epsilon = 1e-13);
        // λ_a is affine with λ_a(v_b) = δ_ab, so ∇λ_a · (v_b − v_0) = δ_ab − δ_a0.
        for a in 0..3 {
            for b in 1..3 {
                let expect = (a == b) as u8 as f64 - (a == 0) as u8 as f64;
                assert_relative_eq!(dot(g[a], sub(verts[b], verts[0])), expect, epsilon = 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn sqrt_reconstructs_random_spd(a in 0.1f64..4.0, b in -1.0f64..1.0, c in 0.1f64..4.0) {
            // Build an SPD matrix as GᵀG + small shift.
            let g = Mat2::new(a, b, 0.0, c);
            let s = g.transpose().matmul(&g).add(&Mat2::identity().scale(1e-3)).symmetrize();
            let m = s.spd_sqrt().unwrap();
            let back = m.matmul(&m);
            let err = back.sub(&s).frobenius_norm();
            prop_assert!(err <= 1e-12 * s.frobenius_norm().max(1.0));
            // Symmetry of the root itself.
            prop_assert!((m.m[0][1] - m.m[1][0]).abs() <= 1e-13 * m.frobenius_norm().max(1.0));
        }

        #[test]
        fn barycentric_sums_to_one(x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let verts = [[0.0, 0.0], [1.5, 0.2], [0.3, 1.1]];
            let b = barycentric(2, &verts, [x, y]);
            prop_assert!((b[0] + b[1] + b[2] - 1.0).abs() <= 1e-12);
            // Reconstruction.
            let px = b[0]*verts[0][0] + b[1]*verts[1][0] + b[2]*verts[2][0];
            let py = b[0]*verts[0][1] + b[1]*verts[1][1] + b[2]*verts[2][1];
            prop_assert!((px - x).abs() + (py - y).abs() <= 1e-10);
        }
    }
}
