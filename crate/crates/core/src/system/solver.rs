//! Linear solvers: banded LU with partial pivoting as the direct default
//! (the assembled stencils are band-limited under the structured node
//! ordering), and restarted GMRES with diagonal preconditioning as the
//! large-system fallback.

use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// LAPACK-style band storage: entry (i, j) lives at row kl + ku + i − j,
/// with kl extra rows of fill for pivoting.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// (2kl + ku + 1) × n, column-major by logical column.
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(matrix: &CsrMatrix) -> Result<BandedLu> {
        let n = matrix.n_rows();
        assert_eq!(n, matrix.n_cols());
        let (kl, ku) = matrix.bandwidth();
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        let at = |i: usize, j: usize| -> usize { (kl + ku + i - j) * n + j };
        for i in 0..n {
            let (cols, vals) = matrix.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                ab[at(i, j)] = v;
            }
        }
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let i_max = (j + kl).min(n - 1);
            // Partial pivot within the lower band.
            let mut p = j;
            let mut best = ab[at(j, j)].abs();
            for i in (j + 1)..=i_max {
                let v = ab[at(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularSystem(j));
            }
            ipiv[j] = p;
            let k_max = (j + kl + ku).min(n - 1);
            if p != j {
                for k in j..=k_max {
                    ab.swap(at(j, k), at(p, k));
                }
            }
            let pivot = ab[at(j, j)];
            for i in (j + 1)..=i_max {
                let l = ab[at(i, j)] / pivot;
                ab[at(i, j)] = l;
                if l != 0.0 {
                    for k in (j + 1)..=k_max {
                        ab[at(i, k)] -= l * ab[at(j, k)];
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku, ab, ipiv })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let at = |i: usize, j: usize| -> usize { (self.kl + self.ku + i - j) * n + j };
        let mut x = rhs.to_vec();
        for j in 0..n {
            x.swap(j, self.ipiv[j]);
            let i_max = (j + self.kl).min(n - 1);
            let xj = x[j];
            if xj != 0.0 {
                for i in (j + 1)..=i_max {
                    x[i] -= self.ab[at(i, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let k_max = (j + self.kl + self.ku).min(n - 1);
            let mut s = x[j];
            for k in (j + 1)..=k_max {
                s -= self.ab[at(j, k)] * x[k];
            }
            x[j] = s / self.ab[at(j, j)];
        }
        x
    }

    pub fn bandwidth(&self) -> usize {
        self.kl.max(self.ku)
    }
}

/// Restarted GMRES(m) with Jacobi (diagonal) preconditioning. Iterates
/// until the preconditioned residual drops below `tol` relative to the
/// right-hand side.
pub fn gmres(
    matrix: &CsrMatrix,
    rhs: &[f64],
    tol: f64,
    restart: usize,
    max_outer: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = matrix.n_rows();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = matrix.get(i, i);
            if d == 0.0 {
                1.0
            } else {
                d
            }
        })
        .collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&diag).map(|(&a, &d)| a / d).collect() };
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();

    let mut x = vec![0.0; n];
    let b_norm = norm(&precond(rhs)).max(f64::MIN_POSITIVE);
    let mut total_iters = 0usize;
    let mut scratch = vec![0.0; n];
    for _ in 0..max_outer {
        matrix.matvec(&x, &mut scratch);
        let r0: Vec<f64> = rhs.iter().zip(&scratch).map(|(&b, &ax)| b - ax).collect();
        let r0 = precond(&r0);
        let beta = norm(&r0);
        if beta / b_norm <= tol {
            return Ok((x, total_iters));
        }
        let m = restart;
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r0.iter().map(|a| a / beta).collect());
        let mut h = vec![vec![0.0f64; m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![0.0f64; m];
        let mut g = vec![0.0f64; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            matrix.matvec(&v[k], &mut scratch);
            let mut w = precond(&scratch);
            for i in 0..=k {
                let hik: f64 = w.iter().zip(&v[i]).map(|(&a, &b)| a * b).sum();
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            let hkk = norm(&w);
            h[k + 1][k] = hkk;
            // Apply accumulated Givens rotations to the new column.
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + hkk * hkk).sqrt();
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = hkk / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total_iters += 1;
            k_used = k + 1;
            if hkk == 0.0 || g[k + 1].abs() / b_norm <= tol {
                break;
            }
            v.push(w.iter().map(|a| a / hkk).collect());
        }
        // Back-substitute the small triangular system and update x.
        let mut y = vec![0.0f64; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for i in 0..k_used {
            for (xj, vj) in x.iter_mut().zip(&v[i]) {
                *xj += y[i] * vj;
            }
        }
    }
    matrix.matvec(&x, &mut scratch);
    let r: Vec<f64> = rhs.iter().zip(&scratch).map(|(&b, &ax)| b - ax).collect();
    let rel = norm(&precond(&r)) / b_norm;
    if rel <= tol {
        Ok((x, total_iters))
    } else {
        Err(Error::IterationLimit { residual: rel, iterations: total_iters })
    }
}
