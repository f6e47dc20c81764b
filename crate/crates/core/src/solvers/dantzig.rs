//! Dantzig-type direction program `min ‖w‖₁ s.t. ‖b − Aw‖_∞ ≤ λ′`, solved
//! exactly as a linear program with a dense dual simplex.
//!
//! With `w = u − v`, `u, v ≥ 0`, the program is
//! `min 1ᵀ(u + v)` subject to `A(u − v) ≤ b + λ′` and `−A(u − v) ≤ λ′ − b`.
//! All costs are nonnegative, so the slack basis is dual feasible and the
//! dual simplex can start there without a phase one.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Slack allowed on `‖b − Aw‖_∞ ≤ λ′` when certifying a solution.
pub const DANTZIG_FEAS_TOL: f64 = 1e-7;

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct DantzigFit {
    pub w: DVector<f64>,
    pub lambda_prime: f64,
    /// `‖b − Aw‖_∞` at the returned `w`.
    pub feasibility_gap: f64,
    pub converged: bool,
    pub pivots: usize,
}

pub fn fit_dantzig(a: &DMatrix<f64>, b: &DVector<f64>, lambda_prime: f64) -> Result<DantzigFit> {
    let m = b.len();
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::DimensionMismatch(format!("A is {}x{} but b has length {m}", a.nrows(), a.ncols())));
    }
    if !(lambda_prime >= 0.0 && lambda_prime.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda' must be finite and >= 0, got {lambda_prime}")));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("Dantzig inputs contain non-finite values".into()));
    }
    if m == 0 {
        return Ok(DantzigFit { w: DVector::zeros(0), lambda_prime, feasibility_gap: 0.0, converged: true, pivots: 0 });
    }
    let mut g = DMatrix::zeros(2 * m, 2 * m);
    g.view_mut((0, 0), (m, m)).copy_from(a);
    g.view_mut((0, m), (m, m)).copy_from(&(-a));
    g.view_mut((m, 0), (m, m)).copy_from(&(-a));
    g.view_mut((m, m), (m, m)).copy_from(a);
    let h: Vec<f64> = b.iter().map(|bi| bi + lambda_prime).chain(b.iter().map(|bi| lambda_prime - bi)).collect();
    let c = vec![1.0; 2 * m];
    match dual_simplex(&g, &h, &c) {
        Ok(sol) => {
            let w = DVector::from_fn(m, |j, _| sol.x[j] - sol.x[m + j]);
            let gap = (b - a * &w).amax();
            Ok(DantzigFit {
                converged: gap <= lambda_prime + DANTZIG_FEAS_TOL && sol.optimal,
                w,
                lambda_prime,
                feasibility_gap: gap,
                pivots: sol.pivots,
            })
        }
        Err(LpFailure::Infeasible) => {
            Err(Error::Infeasible { achievable: chebyshev_residual(a, b)?, bound: lambda_prime })
        }
    }
}

/// `min_w ‖b − Aw‖_∞`, the smallest `λ′` for which the Dantzig program is feasible.
pub fn chebyshev_residual(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<f64> {
    let m = b.len();
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::DimensionMismatch(format!("A is {}x{} but b has length {m}", a.nrows(), a.ncols())));
    }
    if m == 0 {
        return Ok(0.0);
    }
    // Variables (u, v, t); rows: −A(u−v) − t ≤ −b and A(u−v) − t ≤ b.
    let mut g = DMatrix::zeros(2 * m, 2 * m + 1);
    g.view_mut((0, 0), (m, m)).copy_from(&(-a));
    g.view_mut((0, m), (m, m)).copy_from(a);
    g.view_mut((m, 0), (m, m)).copy_from(a);
    g.view_mut((m, m), (m, m)).copy_from(&(-a));
    for i in 0..2 * m {
        g[(i, 2 * m)] = -1.0;
    }
    let h: Vec<f64> = b.iter().map(|bi| -bi).chain(b.iter().copied()).collect();
    let mut c = vec![0.0; 2 * m + 1];
    c[2 * m] = 1.0;
    match dual_simplex(&g, &h, &c) {
        Ok(sol) => {
            let w = DVector::from_fn(m, |j, _| sol.x[j] - sol.x[m + j]);
            Ok((b - a * w).amax())
        }
        Err(LpFailure::Infeasible) => Err(Error::Degenerate("Chebyshev program reported infeasible".into())),
    }
}

#[derive(Debug)]
enum LpFailure {
    Infeasible,
}

struct LpSolution {
    x: Vec<f64>,
    optimal: bool,
    pivots: usize,
}

/// `min cᵀx s.t. Gx ≤ h, x ≥ 0` for `c ≥ 0`, by dual simplex from the slack basis.
fn dual_simplex(g: &DMatrix<f64>, h: &[f64], c: &[f64]) -> std::result::Result<LpSolution, LpFailure> {
    let rows = g.nrows();
    let nv = g.ncols();
    let width = nv + rows + 1;
    let rhs = width - 1;
    // Row-major tableau [G | I | h].
    let mut t = vec![0.0; rows * width];
    for i in 0..rows {
        for j in 0..nv {
            t[i * width + j] = g[(i, j)];
        }
        t[i * width + nv + i] = 1.0;
        t[i * width + rhs] = h[i];
    }
    let mut cost: Vec<f64> = c.iter().copied().chain(std::iter::repeat_n(0.0, rows)).collect();
    let mut basis: Vec<usize> = (nv..nv + rows).collect();
    let max_pivots = 50 * (rows + nv) + 1000;
    let bland_after = 10 * (rows + nv);
    let mut pivots = 0;
    let mut optimal = false;
    let mut pivot_row = vec![0.0; width];

    while pivots < max_pivots {
        // Leaving row: most negative right-hand side, or the smallest basic
        // index once we suspect cycling.
        let mut leave = None;
        let mut best = -1e-10;
        for i in 0..rows {
            let v = t[i * width + rhs];
            if pivots < bland_after {
                if v < best {
                    best = v;
                    leave = Some(i);
                }
            } else if v < -1e-10 && leave.is_none_or(|l: usize| basis[i] < basis[l]) {
                leave = Some(i);
            }
        }
        let Some(r) = leave else {
            optimal = true;
            break;
        };
        let mut enter = None;
        let mut best_ratio = f64::INFINITY;
        for j in 0..nv + rows {
            let arj = t[r * width + j];
            if arj < -PIVOT_EPS {
                let ratio = cost[j].max(0.0) / -arj;
                if ratio < best_ratio - 1e-14 {
                    best_ratio = ratio;
                    enter = Some(j);
                }
            }
        }
        let Some(e) = enter else {
            return Err(LpFailure::Infeasible);
        };
        let p = t[r * width + e];
        for j in 0..width {
            t[r * width + j] /= p;
        }
        pivot_row.copy_from_slice(&t[r * width..(r + 1) * width]);
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = t[i * width + e];
            if f != 0.0 {
                let row = &mut t[i * width..(i + 1) * width];
                for (x, pr) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
                row[e] = 0.0;
            }
        }
        let f = cost[e];
        if f != 0.0 {
            for (cj, pr) in cost.iter_mut().zip(&pivot_row) {
                *cj -= f * pr;
            }
            cost[e] = 0.0;
        }
        basis[r] = e;
        pivots += 1;
    }

    // Recompute the basic solution from the original data to shed the
    // rounding accumulated in the tableau.
    let mut x = vec![0.0; nv];
    let bmat = DMatrix::from_fn(rows, rows, |i, k| {
        let j = basis[k];
        if j < nv {
            g[(i, j)]
        } else if j - nv == i {
            1.0
        } else {
            0.0
        }
    });
    let solved = bmat.lu().solve(&DVector::from_column_slice(h));
    for (k, &j) in basis.iter().enumerate() {
        if j < nv {
            x[j] = match &solved {
                Some(s) => s[k].max(0.0),
                None => t[k * width + rhs].max(0.0),
            };
        }
    }
    Ok(LpSolution { x, optimal, pivots })
}
