//! Convergence sweeps: build, assemble, solve and measure per mesh size,
//! with least-squares rate fits and byte-reproducible CSV output.

use super::{epsilon_rule, manufactured_problem, ProblemPreset, RunConfig};
use crate::envelope::abp_report;
use crate::mesh::Mesh;
use crate::operator::Kernel;
use crate::system::{assemble, dmp_check, monotonicity_check, solve_with, DiscreteSystem, Solution, SolverChoice};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct StudyRow {
    pub h: f64,
    pub epsilon: f64,
    pub n_unknowns: usize,
    pub linf_error: f64,
    /// ln(e_k/e_{k−1}) / ln(h_k/h_{k−1}); None on the first row.
    pub rate_running: Option<f64>,
    pub dmp_violations: usize,
    pub abp_ratio: f64,
    pub wall_ms: f64,
    pub monotone: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct RateFit {
    pub slope: f64,
    /// Standard error of the fitted slope.
    pub stderr: f64,
    /// Rows dropped for nonpositive error.
    pub excluded: usize,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub rows: Vec<StudyRow>,
    /// Slope of ln(error) against ln(h).
    pub rate_vs_h: Option<RateFit>,
    /// Slope of ln(error) against ln(h²·ln(1/h)).
    pub rate_vs_h2ln: Option<RateFit>,
}

impl ConvergenceTable {
    /// Fixed-format CSV; identical configs produce identical bytes.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,epsilon,N,linf_error,rate_running,dmp_violations,abp_ratio,wall_ms\n");
        for r in &self.rows {
            let rate = r.rate_running.map(|v| format!("{v:.6e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{:.6e},{:.6e},{},{:.6e},{},{},{:.6e},{:.3e}",
                r.h, r.epsilon, r.n_unknowns, r.linf_error, rate, r.dmp_violations, r.abp_ratio, r.wall_ms
            );
        }
        s
    }
}

/// Ordinary least squares of ln(error) against ln(h); rows with
/// nonpositive errors are excluded with a notice. Requires at least
/// three usable rows.
pub fn rate_fit(h: &[f64], errors: &[f64]) -> Result<RateFit> {
    assert_eq!(h.len(), errors.len());
    let usable: Vec<(f64, f64)> = h
        .iter()
        .zip(errors)
        .filter(|&(&hi, &e)| hi > 0.0 && e > 0.0)
        .map(|(&hi, &e)| (hi.ln(), e.ln()))
        .collect();
    let excluded = h.len() - usable.len();
    if excluded > 0 {
        log::info!("rate fit: excluded {excluded} rows with nonpositive error");
    }
    if usable.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "rate fit needs at least 3 rows with positive errors, got {}",
            usable.len()
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
    let (slope, _, stderr) = crate::stats::ols_line(&xs, &ys).expect("enough rows");
    Ok(RateFit { slope, stderr, excluded })
}

/// Builds the mesh for a preset at target size h, assembles and solves.
pub fn solve_preset(
    preset: &ProblemPreset,
    h: f64,
    epsilon: f64,
    kernel: &Kernel,
    solver: SolverChoice,
) -> Result<(Mesh, DiscreteSystem, Solution)> {
    let mesh = Mesh::structured(&preset.domain, h)?;
    let system = assemble(&mesh, &preset.coefficients, epsilon, kernel)?;
    let solution = solve_with(&system, solver, &system.rhs)?;
    Ok((mesh, system, solution))
}

/// Runs the sweep of a config: one row per mesh size (descending), nodal
/// max errors against the exact solution, a DMP count on the
/// sign-definite unit load, the ABP ratio, and the fitted rates.
/// A solver failure aborts the row, not the study.
pub fn convergence_study(config: &RunConfig) -> Result<ConvergenceTable> {
    let preset = manufactured_problem(&config.preset)?;
    let exact = preset
        .exact
        .clone()
        .ok_or_else(|| Error::InvalidConfig(format!("preset {} has no exact solution", preset.id)))?;
    let kernel = config.build_kernel(preset.dim)?;
    let mut h_list = config.h_list.clone();
    h_list.sort_by(|a, b| b.total_cmp(a));
    h_list.dedup();
    if h_list.is_empty() {
        return Err(Error::InvalidConfig("empty h list".into()));
    }

    let mut rows: Vec<StudyRow> = Vec::with_capacity(h_list.len());
    let mut prev_ratio = 0.0f64;
    for &h in &h_list {
        let epsilon = epsilon_rule(h, &config.rule)?;
        if config.rule.is_two_scale() {
            if epsilon <= h {
                return Err(Error::InvalidConfig(format!(
                    "two-scale ordering violated: eps = {epsilon} <= h = {h}"
                )));
            }
            // ε/h must grow as h decreases along paper-rule sweeps.
            let ratio = epsilon / h;
            if ratio + 1e-12 < prev_ratio {
                return Err(Error::InvalidConfig(format!(
                    "two-scale separation violated: eps/h fell from {prev_ratio} to {ratio}"
                )));
            }
            prev_ratio = ratio;
        }
        let start = Instant::now();
        let (mesh, system, solution) =
            match solve_preset(&preset, h, epsilon, &kernel, config.solver) {
                Ok(t) => t,
                Err(err) => {
                    log::warn!("row h = {h} aborted: {err}");
                    continue;
                }
            };
        let mono = monotonicity_check(&system);
        log::info!(
            "h = {h}: monotonicity check {}",
            if mono.passes { "passed" } else { "FAILED" }
        );
        let linf_error = (0..mesh.n_vertices())
            .map(|v| (exact(mesh.vertex(v)) - solution.values[v]).abs())
            .fold(0.0, f64::max);
        // DMP probe on the sign-definite unit load.
        let ones = vec![1.0; system.n_unknowns()];
        let dmp_violations = match solve_with(&system, config.solver, &ones) {
            Ok(probe) => {
                let norm = probe.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let passes = dmp_check(&mesh, &probe, &ones);
                let count = probe
                    .values
                    .iter()
                    .filter(|&&v| v > 1e-10 * norm.max(f64::MIN_POSITIVE))
                    .count();
                debug_assert_eq!(passes, count == 0);
                count
            }
            Err(err) => {
                log::warn!("DMP probe failed at h = {h}: {err}");
                usize::MAX
            }
        };
        let abp = abp_report(&mesh, &solution.values, &system.rhs, None)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let rate_running = rows.last().and_then(|prev: &StudyRow| {
            if prev.linf_error > 0.0 && linf_error > 0.0 {
                Some((linf_error / prev.linf_error).ln() / (h / prev.h).ln())
            } else {
                None
            }
        });
        rows.push(StudyRow {
            h,
            epsilon,
            n_unknowns: system.n_unknowns(),
            linf_error,
            rate_running,
            dmp_violations,
            abp_ratio: abp.ratio,
            wall_ms,
            monotone: mono.passes,
        });
    }

    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.linf_error).collect();
    let rate_vs_h = rate_fit(&hs, &errs).ok();
    let h2ln: Vec<f64> = hs.iter().map(|&h| h * h * (1.0 / h).ln()).collect();
    let rate_vs_h2ln = rate_fit(&h2ln, &errs).ok();
    Ok(ConvergenceTable { rows, rate_vs_h, rate_vs_h2ln })
}
