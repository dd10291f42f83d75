//! Dense solvers for small conic problems: a two-phase simplex method with
//! Bland's rule, and the Lawson-Hanson active-set method for nonnegative
//! least squares.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("solver stopped after {0} iterations")]
    IterationLimit(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
}

struct Tableau {
    /// `rows x (cols + 1)`; last column is the right-hand side.
    t: DMatrix<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        for j in 0..self.t.ncols() {
            self.t[(row, j)] /= p;
        }
        for i in 0..self.t.nrows() {
            if i != row {
                let f = self.t[(i, col)];
                if f != 0.0 {
                    for j in 0..self.t.ncols() {
                        let v = self.t[(row, j)];
                        self.t[(i, j)] -= f * v;
                    }
                }
            }
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost . x` over the columns `< allowed` starting from the
    /// current basis.
    fn optimize(&mut self, cost: &[f64], allowed: usize, max_iter: usize, iter: &mut usize) -> Result<(), LpError> {
        let rhs = self.t.ncols() - 1;
        loop {
            // Reduced costs: c_j - c_B B^-1 a_j.
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let zj: f64 = (0..self.t.nrows()).map(|i| cost[self.basis[i]] * self.t[(i, j)]).sum();
                cost[j] - zj > PIVOT_TOL
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.t.nrows() {
                let a = self.t[(i, col)];
                if a > PIVOT_TOL {
                    let ratio = self.t[(i, rhs)] / a;
                    let better = match best {
                        None => true,
                        Some((r, bi)) => ratio < r - PIVOT_TOL || (ratio <= r + PIVOT_TOL && self.basis[i] < self.basis[bi]),
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            let Some((_, row)) = best else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, col);
            *iter += 1;
            if *iter > max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }
        }
    }
}

/// Maximizes `c . x` subject to `A x = b`, `x >= 0`.
pub fn simplex(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, max_iter: usize) -> Result<LpSolution, LpError> {
    let (m, n) = a.shape();
    // Columns: n originals, m artificials, rhs.
    let mut t = DMatrix::zeros(m, n + m + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, n + m)] = sign * b[i];
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
    };
    let mut iter = 0;

    let mut phase1 = vec![0.0; n + m];
    for v in phase1.iter_mut().skip(n) {
        *v = -1.0;
    }
    tab.optimize(&phase1, n + m, max_iter, &mut iter)?;
    let infeasibility: f64 = (0..m)
        .filter(|&i| tab.basis[i] >= n)
        .map(|i| tab.t[(i, n + m)])
        .sum();
    let scale = 1.0 + b.amax();
    if infeasibility > 1e-9 * scale {
        return Err(LpError::Infeasible);
    }
    // Drive remaining (zero-level) artificials out of the basis where possible.
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[(i, j)].abs() > 1e-9 && !tab.basis.contains(&j)) {
                tab.pivot(i, j);
            }
        }
    }

    let mut phase2 = vec![0.0; n + m];
    phase2[..n].copy_from_slice(c.as_slice());
    // Artificials still basic sit at zero; keep them out of the entering set.
    tab.optimize(&phase2, n, max_iter, &mut iter)?;

    let mut x = DVector::zeros(n);
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.t[(i, n + m)].max(0.0);
        }
    }
    let objective = c.dot(&x);
    Ok(LpSolution { x, objective })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `|A x - b|`.
    pub residual: f64,
    pub iterations: usize,
}

fn passive_least_squares(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[usize]) -> DVector<f64> {
    let sub = DMatrix::from_fn(a.nrows(), passive.len(), |i, j| a[(i, passive[j])]);
    let z = sub.svd(true, true).solve(b, 1e-13).expect("svd with u and v");
    let mut full = DVector::zeros(a.ncols());
    for (k, &j) in passive.iter().enumerate() {
        full[j] = z[k];
    }
    full
}

/// Lawson-Hanson: minimizes `|A x - b|` over `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> Result<NnlsSolution, LpError> {
    let n = a.ncols();
    let tol = 1e-12 * (1.0 + a.amax() * b.amax()) * n.max(1) as f64;
    let mut x = DVector::zeros(n);
    let mut passive: Vec<usize> = Vec::new();
    // Indices whose admission made no progress; retried after the next
    // successful step.
    let mut stalled: Vec<usize> = Vec::new();
    let mut iterations = 0;
    loop {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|j| !passive.contains(j) && !stalled.contains(j))
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(j) = candidate.filter(|&j| w[j] > tol) else {
            break;
        };
        passive.push(j);
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }
            let z = passive_least_squares(a, b, &passive);
            if passive.iter().all(|&k| z[k] > 0.0) {
                x = z;
                stalled.clear();
                break;
            }
            let mut alpha = f64::INFINITY;
            for &k in &passive {
                if z[k] <= 0.0 {
                    let denom = x[k] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[k] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            x += (z - &x) * alpha;
            passive.retain(|&k| x[k] > tol);
            if !passive.contains(&j) {
                stalled.push(j);
            }
            for k in 0..n {
                if !passive.contains(&k) {
                    x[k] = 0.0;
                }
            }
            if passive.is_empty() {
                break;
            }
        }
    }
    let residual = (a * &x - b).norm();
    Ok(NnlsSolution { x, residual, iterations })
}
