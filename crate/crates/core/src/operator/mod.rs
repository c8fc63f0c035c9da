//! The coarse-scale integral transform: kernels on the unit ball, star
//! means of the coefficient matrix, boundary-aware second differences and
//! the per-node quadrature stencils that express the transform as a
//! linear functional of nodal values.

mod kernel;
mod transform;

pub use kernel::{Kernel, KernelProfile};
pub use transform::{
    apply_transform, approximation_rate_probe, build_transform_row, second_difference,
    second_difference_nodal, RateProbe, TransformRow,
};

use crate::geom::{Mat2, Point};
use crate::mesh::Mesh;
use crate::quad::simplex_rule;
use crate::{Error, Result};
use std::sync::Arc;

pub type MatrixField = Arc<dyn Fn(Point) -> Mat2 + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Problem data: the coefficient field A with its ellipticity bounds
/// λ ≤ Λ and the source term f. In 1D the matrix field embeds A as
/// `Mat2::scalar_1d`, keeping the second axis inert.
#[derive(Clone)]
pub struct Coefficients {
    pub a: MatrixField,
    pub lambda: f64,
    pub big_lambda: f64,
    pub f: ScalarField,
}

impl Coefficients {
    pub fn new(a: MatrixField, lambda: f64, big_lambda: f64, f: ScalarField) -> Result<Self> {
        if !(lambda > 0.0) || lambda > big_lambda {
            return Err(Error::InvalidConfig(format!(
                "ellipticity bounds must satisfy 0 < lambda <= Lambda, got ({lambda}, {big_lambda})"
            )));
        }
        Ok(Coefficients { a, lambda, big_lambda, f })
    }

    pub fn constant(a: Mat2, lambda: f64, big_lambda: f64, f: ScalarField) -> Result<Self> {
        Self::new(Arc::new(move |_| a), lambda, big_lambda, f)
    }

    pub fn a_at(&self, x: Point) -> Mat2 {
        (self.a)(x)
    }

    pub fn f_at(&self, x: Point) -> f64 {
        (self.f)(x)
    }

    /// Spot-checks that the symmetric part of A stays inside the stated
    /// ellipticity interval at the element quadrature points of the mesh.
    pub fn check_ellipticity(&self, mesh: &Mesh, tol: f64) -> Result<()> {
        for e in 0..mesh.n_elements() {
            let pts = mesh.element_points(e);
            for (q, _) in simplex_rule(mesh.dim(), &pts, mesh.element_volume(e)) {
                let a = self.a_at(q).symmetrize();
                let [lo, hi] = match mesh.dim() {
                    1 => [a.m[0][0], a.m[0][0]],
                    _ => a.sym_eigenvalues(),
                };
                if lo < self.lambda - tol || hi > self.big_lambda + tol {
                    return Err(Error::InvalidConfig(format!(
                        "A at {q:?} has eigenvalues [{lo}, {hi}] outside [{}, {}]",
                        self.lambda, self.big_lambda
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Identity on the active axes: `diag(1, 1)` in 2D, `diag(1, 0)` in 1D so
/// the inert axis is untouched by the λ/2 shift.
pub fn identity_d(dim: usize) -> Mat2 {
    match dim {
        1 => Mat2::diag(1.0, 0.0),
        _ => Mat2::identity(),
    }
}

/// Spectral norm restricted to the active axes.
pub fn m_norm(m: &Mat2, dim: usize) -> f64 {
    match dim {
        1 => m.m[0][0].abs(),
        _ => m.spectral_norm(),
    }
}

/// Mean of A over the star ω_i, computed with a per-element rule exact
/// for quadratics and symmetrized. Fails when Ā − (λ/2)I is not positive
/// definite within tolerance, which signals an inconsistent λ.
pub fn star_mean_a(mesh: &Mesh, coeffs: &Coefficients, vertex: usize) -> Result<Mat2> {
    if mesh.is_boundary_vertex(vertex) {
        return Err(Error::NotInteriorVertex(vertex));
    }
    let mut sum = Mat2::new(0.0, 0.0, 0.0, 0.0);
    for &e in mesh.star(vertex) {
        let pts = mesh.element_points(e);
        for (q, w) in simplex_rule(mesh.dim(), &pts, mesh.element_volume(e)) {
            sum = sum.add(&coeffs.a_at(q).scale(w));
        }
    }
    let mut mean = sum.scale(1.0 / mesh.star_volume(vertex)).symmetrize();
    if mesh.dim() == 1 {
        mean = Mat2::scalar_1d(mean.m[0][0]);
    }
    let shifted = mean.sub(&identity_d(mesh.dim()).scale(0.5 * coeffs.lambda));
    let min_eig = match mesh.dim() {
        1 => shifted.m[0][0],
        _ => shifted.sym_eigenvalues()[0],
    };
    let tol = 1e-12 * (1.0 + mean.frobenius_norm());
    if min_eig <= -tol {
        return Err(Error::NotPositiveDefinite(min_eig));
    }
    Ok(mean)
}

/// Symmetric PD square root (closed-form eigenpairs for d ≤ 2).
pub fn spd_sqrt(s: &Mat2) -> Result<Mat2> {
    s.spd_sqrt()
}

/// M_i = (Ā(x_i) − (λ/2)I)^{1/2} with marginal eigenvalues in
/// (−1e−12·scale, 0] clamped to 1e−14 to absorb quadrature round-off on
/// boundary stars.
pub fn node_sqrt_matrix(mesh: &Mesh, coeffs: &Coefficients, vertex: usize) -> Result<Mat2> {
    let mean = star_mean_a(mesh, coeffs, vertex)?;
    let shifted = mean.sub(&identity_d(mesh.dim()).scale(0.5 * coeffs.lambda));
    let clamp_band = 1e-12 * (1.0 + mean.frobenius_norm());
    let m = match mesh.dim() {
        1 => {
            let v = shifted.m[0][0];
            let v = if v > 0.0 { v } else { 1e-14 };
            // Inert axis mapped to 1 so M·z stays on the line for z = (t, 0).
            Mat2::diag(v.sqrt(), 1.0)
        }
        _ => shifted.spd_sqrt_clamped(clamp_band, 1e-14)?,
    };
    Ok(m)
}
