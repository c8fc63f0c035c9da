//! Kernels for the integral transform: a radially symmetric profile φ
//! supported in the closed unit ball, normalized so that the second
//! moment ∫ |z|² φ(z) dz equals the dimension, together with a centrally
//! symmetric quadrature rule on the ball.

use crate::geom::{Mat2, Point};
use crate::quad::gauss_legendre_on;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelProfile {
    /// φ = c_d · 1_{B₁} with the analytic constant c_d = (d+2)/|B₁|.
    ConstantBall,
    /// φ = c_n (1 − |z|²)₊ⁿ with c_n computed on the rule itself, which
    /// makes the discrete second moment exactly d.
    PolynomialBump { n: u32 },
}

/// Quadrature realization of a kernel. Node set closed under z ↦ −z with
/// equal weights, so odd integrands cancel exactly.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub dim: usize,
    pub profile: KernelProfile,
    /// Normalization constant multiplying the raw profile.
    pub normalization: f64,
    /// (z_q, w_q) plain quadrature nodes and weights on the unit ball.
    nodes: Vec<(Point, f64)>,
    /// Cached combined weights w_q · φ(z_q).
    weighted: Vec<(Point, f64)>,
    /// Polynomial exactness of the underlying rule.
    pub degree: usize,
}

impl Kernel {
    /// Default rules: 16-point Gauss in 1D, 8 radial × 16 angular in 2D.
    pub fn default_for(dim: usize) -> Result<Kernel> {
        match dim {
            1 => Kernel::new(1, KernelProfile::ConstantBall, 16, 0),
            2 => Kernel::new(2, KernelProfile::ConstantBall, 8, 16),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn new(
        dim: usize,
        profile: KernelProfile,
        n_radial: usize,
        n_angular: usize,
    ) -> Result<Kernel> {
        let nodes: Vec<(Point, f64)> = match dim {
            1 => gauss_legendre_on(n_radial, -1.0, 1.0)
                .into_iter()
                .map(|(x, w)| ([x, 0.0], w))
                .collect(),
            2 => {
                if n_angular < 4 || n_angular % 2 != 0 {
                    return Err(Error::InvalidConfig(
                        "angular count must be even and at least 4 for central symmetry".into(),
                    ));
                }
                let radial = gauss_legendre_on(n_radial, 0.0, 1.0);
                let dtheta = 2.0 * std::f64::consts::PI / n_angular as f64;
                let mut nodes = Vec::with_capacity(n_radial * n_angular);
                for &(r, wr) in &radial {
                    for k in 0..n_angular {
                        let theta = dtheta * k as f64;
                        nodes.push(([r * theta.cos(), r * theta.sin()], wr * r * dtheta));
                    }
                }
                nodes
            }
            d => return Err(Error::UnsupportedDimension(d)),
        };

        let raw = |z: Point| raw_profile(profile, z);
        let normalization = match profile {
            KernelProfile::ConstantBall => {
                let ball = match dim {
                    1 => 2.0,
                    _ => std::f64::consts::PI,
                };
                (dim as f64 + 2.0) / ball
            }
            KernelProfile::PolynomialBump { .. } => {
                let moment: f64 = nodes
                    .iter()
                    .map(|&(z, w)| w * raw(z) * (z[0] * z[0] + z[1] * z[1]))
                    .sum();
                dim as f64 / moment
            }
        };
        let weighted: Vec<(Point, f64)> =
            nodes.iter().map(|&(z, w)| (z, w * normalization * raw(z))).collect();
        let degree = match dim {
            1 => 2 * n_radial - 1,
            _ => (2 * n_radial - 1).min(n_angular - 1),
        };
        Ok(Kernel { dim, profile, normalization, nodes, weighted, degree })
    }

    pub fn phi(&self, z: Point) -> f64 {
        self.normalization * raw_profile(self.profile, z)
    }

    /// Plain quadrature nodes and weights.
    pub fn nodes(&self) -> &[(Point, f64)] {
        &self.nodes
    }

    /// Nodes with combined weights w_q φ(z_q), the form used in stencils.
    pub fn weighted_nodes(&self) -> &[(Point, f64)] {
        &self.weighted
    }

    /// Discrete moment residuals: |Σ w φ |z|² − d| and ‖Σ w φ z⊗z − I‖.
    pub fn moment_errors(&self) -> (f64, f64) {
        let d = self.dim as f64;
        let mut second = 0.0;
        let mut tensor = Mat2::new(0.0, 0.0, 0.0, 0.0);
        for &(z, c) in &self.weighted {
            second += c * (z[0] * z[0] + z[1] * z[1]);
            tensor = tensor.add(&Mat2::new(z[0] * z[0], z[0] * z[1], z[1] * z[0], z[1] * z[1]).scale(c));
        }
        let target = crate::operator::identity_d(self.dim);
        ((second - d).abs(), tensor.sub(&target).frobenius_norm())
    }

    /// Largest violation of the z ↦ −z pairing (0 for valid rules).
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for &(z, w) in &self.nodes {
            let neg = [-z[0], -z[1]];
            let found = self
                .nodes
                .iter()
                .filter(|(p, _)| (p[0] - neg[0]).abs() + (p[1] - neg[1]).abs() < 1e-12)
                .map(|&(_, wn)| (wn - w).abs())
                .next();
            worst = worst.max(found.unwrap_or(f64::INFINITY));
        }
        worst
    }
}

fn raw_profile(profile: KernelProfile, z: Point) -> f64 {
    let r2 = z[0] * z[0] + z[1] * z[1];
    match profile {
        KernelProfile::ConstantBall => {
            if r2 <= 1.0 {
                1.0
            } else {
                0.0
            }
        }
        KernelProfile::PolynomialBump { n } => (1.0 - r2).max(0.0).powi(n as i32),
    }
}
