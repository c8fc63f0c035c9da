//! Two-scale monotone finite element method for linear elliptic equations
//! in non-divergence form A(x) : D²u = f with homogeneous Dirichlet data.
//!
//! The discretization combines a fine-scale piecewise linear FEM Laplacian
//! on a weakly acute mesh with a coarse-scale integral approximation of
//! the remaining second-order term, so that the assembled operator is
//! monotone and satisfies a discrete maximum principle. The crate also
//! ships the discrete Alexandroff-Bakelman-Pucci diagnostics (convex
//! envelopes, nodal contact sets, sub-differential polytopes) and a
//! convergence-study harness with CSV reporting.
//!
//! Modules:
//! - [`mesh`]: simplicial meshes (d = 1, 2), weak acuteness, point
//!   location, boundary clipping, face jumps, discrete Laplacian;
//! - [`operator`]: kernels on the unit ball, star means of the
//!   coefficient, boundary-aware second differences, quadrature stencils;
//! - [`system`]: assembly, sparse solve, monotonicity/DMP checks;
//! - [`envelope`]: convex envelopes, contact sets, sub-differential
//!   measures and the discrete ABP report;
//! - [`harness`]: problem presets, two-scale coupling rules, convergence
//!   sweeps and rate fits.

pub mod envelope;
pub mod geom;
pub mod harness;
pub mod mesh;
pub mod operator;
pub mod quad;
pub(crate) mod stats;
pub mod system;

pub use envelope::{AbpReport, EnvelopeMode, EnvelopeResult, LocalEnvelope, SubdifferentialPolytope};
pub use geom::{Mat2, Point};
pub use harness::{ConvergenceTable, EpsilonRule, ProblemPreset, RunConfig};
pub use mesh::{AcutenessReport, BoxDomain, Face, Location, Mesh};
pub use operator::{Coefficients, Kernel, KernelProfile, TransformRow};
pub use system::{DiscreteSystem, MonotonicityReport, Solution};

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("unsupported dimension {0}: only d = 1 and d = 2")]
    UnsupportedDimension(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("matrix is not positive definite (eigenvalue {0})")]
    NotPositiveDefinite(f64),
    #[error("vertex {0} is not interior")]
    NotInteriorVertex(usize),
    #[error("face {0} is a boundary face")]
    BoundaryFace(usize),
    #[error("singular factorization at pivot {0}")]
    SingularSystem(usize),
    #[error("iterative solver stalled: residual {residual} after {iterations} iterations")]
    IterationLimit { residual: f64, iterations: usize },
    #[error("no supporting plane exists at vertex {0}")]
    NotSupportable(usize),
    #[error("linear program failed: {0}")]
    LinearProgram(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("epsilon rule requires 0 < h < 1, got {0}")]
    EpsilonRuleRange(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
