//! Textbook two-phase revised simplex for tiny linear programs of the
//! shape met by the envelope computations: maximize c·x over
//! { x ∈ Rⁿ : a_i·x ≤ b_i } with n ≤ 3 free variables and up to a few
//! thousand constraints.
//!
//! The solver works on the dual min{ b·y : Σ y_i a_i = c, y ≥ 0 }, whose
//! basis is only n×n; the optimal simplex multipliers are exactly the
//! primal solution.

use crate::{Error, Result};

#[derive(Clone)]
pub struct DenseLp {
    n: usize,
    /// Constraint normals, row-major, stride n.
    cols: Vec<f64>,
    rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

impl DenseLp {
    pub fn new(n: usize) -> DenseLp {
        assert!((1..=3).contains(&n));
        DenseLp { n, cols: Vec::new(), rhs: Vec::new() }
    }

    pub fn n_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn push(&mut self, a: &[f64], b: f64) {
        debug_assert_eq!(a.len(), self.n);
        self.cols.extend_from_slice(a);
        self.rhs.push(b);
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    /// Maximizes c·x over the stored constraints. The feasible set must
    /// be nonempty (it always is for envelope problems) and the optimum
    /// bounded; unboundedness is reported as an error.
    pub fn maximize(&self, c: &[f64]) -> Result<LpSolution> {
        let n = self.n;
        let m = self.rhs.len();
        if m < n {
            return Err(Error::LinearProgram("fewer constraints than variables".into()));
        }
        let scale = self
            .rhs
            .iter()
            .chain(c)
            .fold(1.0f64, |s, v| s.max(v.abs()));
        let tol = 1e-10 * scale;

        // Dual columns: m real columns a_j with cost b_j, plus n artificial
        // columns ±e_k with phase-1 cost 1.
        let art_sign: Vec<f64> = (0..n).map(|k| if c[k] >= 0.0 { 1.0 } else { -1.0 }).collect();
        let col = |j: usize, k: usize| -> f64 {
            if j < m {
                self.column(j)[k]
            } else if j - m == k {
                art_sign[k]
            } else {
                0.0
            }
        };
        let mut basis: Vec<usize> = (m..m + n).collect();
        let mut y_basic: Vec<f64> = (0..n).map(|k| c[k].abs()).collect();
        let mut iterations = 0usize;
        let iter_cap = 200 + 20 * m;

        for phase in 0..2 {
            let cost = |j: usize| -> f64 {
                if phase == 0 {
                    if j < m {
                        0.0
                    } else {
                        1.0
                    }
                } else if j < m {
                    self.rhs[j]
                } else {
                    0.0
                }
            };
            loop {
                iterations += 1;
                if iterations > iter_cap {
                    return Err(Error::LinearProgram(format!(
                        "iteration limit after {iterations} pivots"
                    )));
                }
                // Basis matrix B with the basis columns as columns:
                // B[i][j] = (a_{basis[j]})_i, row-major.
                let b_mat: Vec<f64> = (0..n * n)
                    .map(|idx| col(basis[idx % n], idx / n))
                    .collect();
                // π solves Bᵀ π = cost_B.
                let cost_b: Vec<f64> = basis.iter().map(|&j| cost(j)).collect();
                let pi = solve_small(n, &transpose_small(n, &b_mat), &cost_b)
                    .ok_or_else(|| Error::LinearProgram("singular basis".into()))?;
                // Pricing: most negative reduced cost; Bland's rule after a
                // burn-in to break cycling.
                let bland = iterations > 20 + 4 * m;
                let mut enter: Option<usize> = None;
                let mut best = -tol;
                let allowed = if phase == 0 { m + n } else { m };
                for j in 0..allowed {
                    if basis.contains(&j) {
                        continue;
                    }
                    let mut r = cost(j);
                    for k in 0..n {
                        r -= pi[k] * col(j, k);
                    }
                    if r < best {
                        enter = Some(j);
                        if bland {
                            break;
                        }
                        best = r;
                    }
                }
                let Some(enter) = enter else { break };
                // Direction solves B d = a_enter.
                let a_enter: Vec<f64> = (0..n).map(|k| col(enter, k)).collect();
                let d = solve_small(n, &b_mat, &a_enter)
                    .ok_or_else(|| Error::LinearProgram("singular basis in ratio test".into()))?;
                // Ratio test.
                let mut leave: Option<usize> = None;
                let mut best_ratio = f64::INFINITY;
                for k in 0..n {
                    if d[k] > 1e-11 {
                        let ratio = y_basic[k] / d[k];
                        if ratio < best_ratio - 1e-14
                            || (ratio < best_ratio + 1e-14
                                && leave.map_or(true, |l| basis[k] < basis[l]))
                        {
                            best_ratio = ratio;
                            leave = Some(k);
                        }
                    }
                }
                let Some(leave) = leave else {
                    return Err(Error::LinearProgram(
                        "dual unbounded: primal constraints are infeasible".into(),
                    ));
                };
                for k in 0..n {
                    y_basic[k] -= best_ratio * d[k];
                }
                y_basic[leave] = best_ratio;
                basis[leave] = enter;
            }
            if phase == 0 {
                let infeasibility: f64 = basis
                    .iter()
                    .zip(&y_basic)
                    .filter(|(&j, _)| j >= m)
                    .map(|(_, &y)| y)
                    .sum();
                if infeasibility > 1e-8 * scale.max(1.0) {
                    return Err(Error::LinearProgram(
                        "primal unbounded: dual phase 1 infeasible".into(),
                    ));
                }
                // Drive basic artificials (at zero level) out of the basis
                // where possible; swapping a zero-level column keeps the
                // basic solution valid as long as the basis stays regular.
                for k in 0..n {
                    if basis[k] < m {
                        continue;
                    }
                    let b_mat: Vec<f64> = (0..n * n)
                        .map(|idx| col(basis[idx % n], idx / n))
                        .collect();
                    for j in 0..m {
                        if basis.contains(&j) {
                            continue;
                        }
                        let a_j: Vec<f64> = (0..n).map(|r| col(j, r)).collect();
                        if let Some(d) = solve_small(n, &b_mat, &a_j) {
                            if d[k].abs() > 1e-9 {
                                basis[k] = j;
                                break;
                            }
                        }
                    }
                }
            }
        }

        // Optimal simplex multipliers are the primal solution: Bᵀ x = cost_B.
        let b_mat: Vec<f64> = (0..n * n).map(|idx| col(basis[idx % n], idx / n)).collect();
        let cost_b: Vec<f64> =
            basis.iter().map(|&j| if j < m { self.rhs[j] } else { 0.0 }).collect();
        let x = solve_small(n, &transpose_small(n, &b_mat), &cost_b)
            .ok_or_else(|| Error::LinearProgram("singular final basis".into()))?;
        let value: f64 = (0..n).map(|k| c[k] * x[k]).sum();
        // Safety net: x must be primal feasible and close the duality gap.
        let feas_tol = 1e-7 * scale.max(1.0);
        for j in 0..m {
            let ax: f64 = (0..n).map(|k| self.column(j)[k] * x[k]).sum();
            if ax > self.rhs[j] + feas_tol {
                return Err(Error::LinearProgram(format!(
                    "returned point violates constraint {j} by {:.3e}",
                    ax - self.rhs[j]
                )));
            }
        }
        let dual_value: f64 = basis
            .iter()
            .zip(&y_basic)
            .filter(|(&j, _)| j < m)
            .map(|(&j, &y)| self.rhs[j] * y)
            .sum();
        if (value - dual_value).abs() > 1e-6 * scale.max(1.0) {
            return Err(Error::LinearProgram(format!(
                "duality gap {:.3e} not closed",
                value - dual_value
            )));
        }
        Ok(LpSolution { x, value, iterations })
    }
}

/// Solves an n×n system (n ≤ 3) by Gaussian elimination with partial
/// pivoting; `a` is row-major and consumed by value.
fn solve_small(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for jcol in 0..n {
        let p = (jcol..n).max_by(|&r, &s| m[r * n + jcol].abs().total_cmp(&m[s * n + jcol].abs()))?;
        if m[p * n + jcol].abs() < 1e-300 {
            return None;
        }
        if p != jcol {
            for k in 0..n {
                m.swap(jcol * n + k, p * n + k);
            }
            x.swap(jcol, p);
        }
        for i in (jcol + 1)..n {
            let l = m[i * n + jcol] / m[jcol * n + jcol];
            if l != 0.0 {
                for k in jcol..n {
                    m[i * n + k] -= l * m[jcol * n + k];
                }
                x[i] -= l * x[jcol];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= m[i * n + k] * x[k];
        }
        x[i] = s / m[i * n + i];
    }
    Some(x)
}

fn transpose_small(n: usize, a: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}
