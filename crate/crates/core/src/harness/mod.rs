//! Problem presets, two-scale coupling rules, convergence sweeps and
//! machine-readable reporting.

mod config;
mod rules;
mod study;

pub use config::parse_run_config;
pub use rules::{epsilon_rule, EpsilonRule};
pub use study::{convergence_study, rate_fit, solve_preset, ConvergenceTable, RateFit, StudyRow};

use crate::geom::Mat2;
use crate::mesh::BoxDomain;
use crate::operator::{Coefficients, Kernel, KernelProfile, MatrixField, ScalarField};
use crate::system::SolverChoice;
use crate::{Error, Result};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    C2Alpha,
    C3Alpha,
}

/// A manufactured problem: coefficients, source, and (when available)
/// the exact solution with its Hessian for error measurement and
/// consistency checks.
#[derive(Clone)]
pub struct ProblemPreset {
    pub id: &'static str,
    pub dim: usize,
    pub domain: BoxDomain,
    pub coefficients: Coefficients,
    pub exact: Option<ScalarField>,
    pub exact_hessian: Option<MatrixField>,
    /// Hölder exponent of the driving regularity class.
    pub alpha: f64,
    pub smoothness: Smoothness,
    /// Analytically known decay exponent of the star-mean approximation
    /// of A, when meaningful (None for constant A, where the defect is 0).
    pub beta: Option<f64>,
}

impl ProblemPreset {
    /// Verifies f ≡ A : D²u at the element quadrature points of a mesh;
    /// the defining property of a manufactured problem.
    pub fn verify_manufactured(&self, mesh: &crate::mesh::Mesh, tol: f64) -> Result<()> {
        let (Some(_), Some(hess)) = (&self.exact, &self.exact_hessian) else {
            return Ok(());
        };
        for e in 0..mesh.n_elements() {
            let pts = mesh.element_points(e);
            for (q, _) in crate::quad::simplex_rule(mesh.dim(), &pts, mesh.element_volume(e)) {
                let a = self.coefficients.a_at(q);
                let target = a.ddot(&hess(q).symmetrize());
                let f = self.coefficients.f_at(q);
                if (f - target).abs() > tol * (1.0 + target.abs()) {
                    return Err(Error::InvalidConfig(format!(
                        "preset {} is not manufactured-consistent at {q:?}: f = {f}, A:D²u = {target}",
                        self.id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn default_kernel(&self) -> Result<Kernel> {
        Kernel::default_for(self.dim)
    }
}

/// Built-in presets by id. `P1` is the one-dimensional sharpness example
/// with u = x⁴ + x² − 2 and A ≡ 2; `P2`–`P5` live on the unit square.
pub fn manufactured_problem(id: &str) -> Result<ProblemPreset> {
    match id {
        "P1" => {
            let a: MatrixField = Arc::new(|_| Mat2::scalar_1d(2.0));
            let f: ScalarField = Arc::new(|p| 24.0 * p[0] * p[0] + 4.0);
            Ok(ProblemPreset {
                id: "P1",
                dim: 1,
                domain: BoxDomain::interval(-1.0, 1.0),
                coefficients: Coefficients::new(a, 2.0, 2.0, f)?,
                exact: Some(Arc::new(|p| {
                    let x = p[0];
                    x.powi(4) + x * x - 2.0
                })),
                exact_hessian: Some(Arc::new(|p| Mat2::diag(12.0 * p[0] * p[0] + 2.0, 0.0))),
                alpha: 1.0,
                smoothness: Smoothness::C3Alpha,
                beta: None,
            })
        }
        "P2" => {
            let pi = std::f64::consts::PI;
            let a: MatrixField = Arc::new(|_| Mat2::identity());
            let f: ScalarField =
                Arc::new(move |p| -2.0 * pi * pi * (pi * p[0]).sin() * (pi * p[1]).sin());
            Ok(ProblemPreset {
                id: "P2",
                dim: 2,
                domain: BoxDomain::unit_square(),
                coefficients: Coefficients::new(a, 1.0, 1.0, f)?,
                exact: Some(Arc::new(move |p| (pi * p[0]).sin() * (pi * p[1]).sin())),
                exact_hessian: Some(Arc::new(move |p| {
                    let (sx, cx) = (pi * p[0]).sin_cos();
                    let (sy, cy) = (pi * p[1]).sin_cos();
                    Mat2::new(
                        -pi * pi * sx * sy,
                        pi * pi * cx * cy,
                        pi * pi * cx * cy,
                        -pi * pi * sx * sy,
                    )
                })),
                alpha: 1.0,
                smoothness: Smoothness::C3Alpha,
                beta: None,
            })
        }
        "P3" => {
            // Anisotropic constant A with λ at its smallest eigenvalue, and
            // a negative quartic bump so the ABP machinery sees a genuine
            // negative part.
            let a_mat = Mat2::new(2.0, 0.5, 0.5, 1.0);
            let lambda = (3.0 - 2.0f64.sqrt()) / 2.0;
            let big = (3.0 + 2.0f64.sqrt()) / 2.0;
            let a: MatrixField = Arc::new(move |_| a_mat);
            let f: ScalarField = Arc::new(|p| {
                let (x, y) = (p[0], p[1]);
                64.0 * y * (1.0 - y) + 32.0 * x * (1.0 - x) - 16.0 * (1.0 - 2.0 * x) * (1.0 - 2.0 * y)
            });
            Ok(ProblemPreset {
                id: "P3",
                dim: 2,
                domain: BoxDomain::unit_square(),
                coefficients: Coefficients::new(a, lambda, big, f)?,
                exact: Some(Arc::new(|p| {
                    -16.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])
                })),
                exact_hessian: Some(Arc::new(|p| {
                    let (x, y) = (p[0], p[1]);
                    Mat2::new(
                        32.0 * y * (1.0 - y),
                        -16.0 * (1.0 - 2.0 * x) * (1.0 - 2.0 * y),
                        -16.0 * (1.0 - 2.0 * x) * (1.0 - 2.0 * y),
                        32.0 * x * (1.0 - x),
                    )
                })),
                alpha: 1.0,
                smoothness: Smoothness::C3Alpha,
                beta: None,
            })
        }
        "P4" => {
            let pi = std::f64::consts::PI;
            let a: MatrixField =
                Arc::new(|p| Mat2::diag(1.0 + 0.5 * p[0], 1.0 + 0.5 * p[1]));
            let f: ScalarField = Arc::new(move |p| {
                let u = (pi * p[0]).sin() * (pi * p[1]).sin();
                -pi * pi * (2.0 + 0.5 * (p[0] + p[1])) * u
            });
            Ok(ProblemPreset {
                id: "P4",
                dim: 2,
                domain: BoxDomain::unit_square(),
                coefficients: Coefficients::new(a, 1.0, 1.5, f)?,
                exact: Some(Arc::new(move |p| (pi * p[0]).sin() * (pi * p[1]).sin())),
                exact_hessian: Some(Arc::new(move |p| {
                    let (sx, cx) = (pi * p[0]).sin_cos();
                    let (sy, cy) = (pi * p[1]).sin_cos();
                    Mat2::new(
                        -pi * pi * sx * sy,
                        pi * pi * cx * cy,
                        pi * pi * cx * cy,
                        -pi * pi * sx * sy,
                    )
                })),
                alpha: 1.0,
                smoothness: Smoothness::C3Alpha,
                beta: Some(1.0),
            })
        }
        "P5" => manufactured_holder(0.5),
        "affine" => {
            // Degenerate sanity preset: the only affine function with zero
            // trace is zero, so the error sits at solver tolerance.
            let a: MatrixField = Arc::new(|_| Mat2::identity());
            let f: ScalarField = Arc::new(|_| 0.0);
            Ok(ProblemPreset {
                id: "affine",
                dim: 2,
                domain: BoxDomain::unit_square(),
                coefficients: Coefficients::new(a, 1.0, 1.0, f)?,
                exact: Some(Arc::new(|_| 0.0)),
                exact_hessian: Some(Arc::new(|_| Mat2::new(0.0, 0.0, 0.0, 0.0))),
                alpha: 1.0,
                smoothness: Smoothness::C3Alpha,
                beta: None,
            })
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Hölder-regularity stress preset: u = ρ(x)·|x − x₀|^{2+α} with a
/// polynomial bubble ρ vanishing on ∂Ω, so u ∈ C^{2,α} but not C³ near
/// the center node.
pub fn manufactured_holder(alpha: f64) -> Result<ProblemPreset> {
    assert!(alpha > 0.0 && alpha <= 1.0);
    let x0 = [0.5, 0.5];
    let beta = 2.0 + alpha;
    let rho = move |p: crate::geom::Point| 16.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
    let grad_rho = move |p: crate::geom::Point| {
        [
            16.0 * (1.0 - 2.0 * p[0]) * p[1] * (1.0 - p[1]),
            16.0 * p[0] * (1.0 - p[0]) * (1.0 - 2.0 * p[1]),
        ]
    };
    let lap_rho =
        move |p: crate::geom::Point| -32.0 * (p[1] * (1.0 - p[1]) + p[0] * (1.0 - p[0]));
    let a: MatrixField = Arc::new(|_| Mat2::identity());
    // f = Δu = ρ Δ(r^β) + 2 ∇ρ·∇(r^β) + r^β Δρ with Δ(r^β) = β² r^{β−2}.
    let f: ScalarField = Arc::new(move |p| {
        let d = [p[0] - x0[0], p[1] - x0[1]];
        let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let g = grad_rho(p);
        rho(p) * beta * beta * r.powf(beta - 2.0)
            + 2.0 * beta * r.powf(beta - 2.0) * (g[0] * d[0] + g[1] * d[1])
            + r.powf(beta) * lap_rho(p)
    });
    Ok(ProblemPreset {
        id: "P5",
        dim: 2,
        domain: BoxDomain::unit_square(),
        coefficients: Coefficients::new(a, 1.0, 1.0, f)?,
        exact: Some(Arc::new(move |p| {
            let d = [p[0] - x0[0], p[1] - x0[1]];
            let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
            rho(p) * r.powf(beta)
        })),
        exact_hessian: None,
        alpha,
        smoothness: Smoothness::C2Alpha,
        beta: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelChoice {
    ConstantBall,
    Bump(u32),
}

/// Kernel/discretization knobs of a study run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub preset: String,
    pub h_list: Vec<f64>,
    pub rule: EpsilonRule,
    pub kernel: KernelChoice,
    pub kernel_radial: usize,
    pub kernel_angular: usize,
    pub solver: SolverChoice,
    pub out: Option<std::path::PathBuf>,
    /// Optional acceptance thresholds for CI use: the fitted slope
    /// against h must land inside [min_rate, max_rate].
    pub min_rate: Option<f64>,
    pub max_rate: Option<f64>,
}

impl RunConfig {
    pub fn new(preset: &str, h_list: Vec<f64>, rule: EpsilonRule) -> RunConfig {
        RunConfig {
            preset: preset.to_string(),
            h_list,
            rule,
            kernel: KernelChoice::ConstantBall,
            kernel_radial: 0,
            kernel_angular: 0,
            solver: SolverChoice::Auto,
            out: None,
            min_rate: None,
            max_rate: None,
        }
    }

    pub fn build_kernel(&self, dim: usize) -> Result<Kernel> {
        let (nr, na) = match (self.kernel_radial, dim) {
            (0, 1) => (16, 0),
            (0, _) => (8, 16),
            (nr, 1) => (nr, 0),
            (nr, _) => (nr, if self.kernel_angular == 0 { 16 } else { self.kernel_angular }),
        };
        let profile = match self.kernel {
            KernelChoice::ConstantBall => KernelProfile::ConstantBall,
            KernelChoice::Bump(n) => KernelProfile::PolynomialBump { n },
        };
        Kernel::new(dim, profile, nr, na)
    }
}
