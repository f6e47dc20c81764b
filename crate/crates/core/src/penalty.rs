//! Separable penalties `p_λ(|t|)` and their univariate proximal maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SCAD_A: f64 = 3.7;
pub const DEFAULT_MCP_B: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PenaltyKind {
    L1,
    Scad { a: f64 },
    Mcp { b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub kind: PenaltyKind,
    pub lambda: f64,
}

impl PenaltyConfig {
    pub fn l1(lambda: f64) -> Self {
        Self { kind: PenaltyKind::L1, lambda }
    }

    pub fn scad(lambda: f64) -> Self {
        Self { kind: PenaltyKind::Scad { a: DEFAULT_SCAD_A }, lambda }
    }

    pub fn mcp(lambda: f64) -> Self {
        Self { kind: PenaltyKind::Mcp { b: DEFAULT_MCP_B }, lambda }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn is_convex(&self) -> bool {
        matches!(self.kind, PenaltyKind::L1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        match self.kind {
            PenaltyKind::Scad { a } if !(a > 2.0 && a.is_finite()) => {
                Err(Error::InvalidInput(format!("SCAD parameter a must exceed 2, got {a}")))
            }
            PenaltyKind::Mcp { b } if !(b > 0.0 && b.is_finite()) => {
                Err(Error::InvalidInput(format!("MCP parameter b must be positive, got {b}")))
            }
            _ => Ok(()),
        }
    }
}

/// `p_λ(|t|)` in closed form.
pub fn penalty_value(cfg: &PenaltyConfig, t: f64) -> f64 {
    let lam = cfg.lambda;
    let x = t.abs();
    match cfg.kind {
        PenaltyKind::L1 => lam * x,
        PenaltyKind::Scad { a } => {
            if x <= lam {
                lam * x
            } else if x <= a * lam {
                (2.0 * a * lam * x - x * x - lam * lam) / (2.0 * (a - 1.0))
            } else {
                lam * lam * (a + 1.0) / 2.0
            }
        }
        PenaltyKind::Mcp { b } => {
            if x <= b * lam {
                lam * x - x * x / (2.0 * b)
            } else {
                b * lam * lam / 2.0
            }
        }
    }
}

/// `argmin_t ½·curvature·(t − z/curvature)² + p_λ(t)`.
///
/// Nonconvex penalties are handled by comparing every piecewise-quadratic
/// candidate (piece endpoints and interior vertices); ties go to the smaller
/// magnitude.
pub fn univariate_prox(cfg: &PenaltyConfig, z: f64, curvature: f64) -> f64 {
    debug_assert!(curvature > 0.0);
    let lam = cfg.lambda;
    let u = z.abs();
    let c = curvature;
    if let PenaltyKind::L1 = cfg.kind {
        return z.signum() * (u - lam).max(0.0) / c;
    }
    // Objective over t ≥ 0 up to a constant.
    let f = |t: f64| 0.5 * c * t * t - u * t + penalty_value(cfg, t);
    let mut cands = vec![0.0, u / c];
    // (lo, hi, quadratic coefficient α, linear coefficient β) of f = α t² + β t on the piece.
    let pieces: Vec<(f64, f64, f64, f64)> = match cfg.kind {
        PenaltyKind::Scad { a } => vec![
            (0.0, lam, 0.5 * c, lam - u),
            (lam, a * lam, 0.5 * (c - 1.0 / (a - 1.0)), a * lam / (a - 1.0) - u),
            (a * lam, f64::INFINITY, 0.5 * c, -u),
        ],
        PenaltyKind::Mcp { b } => vec![(0.0, b * lam, 0.5 * (c - 1.0 / b), lam - u), (b * lam, f64::INFINITY, 0.5 * c, -u)],
        PenaltyKind::L1 => unreachable!(),
    };
    for (lo, hi, alpha, beta) in pieces {
        cands.push(lo);
        if hi.is_finite() {
            cands.push(hi);
        }
        if alpha > 0.0 {
            let v = -beta / (2.0 * alpha);
            if v > lo && v < hi {
                cands.push(v);
            }
        }
    }
    cands.retain(|t| t.is_finite() && *t >= 0.0 && *t <= u / c);
    cands.sort_by(|a, b| a.total_cmp(b));
    let mut best = 0.0;
    let mut best_val = f(0.0);
    for &t in &cands {
        let v = f(t);
        if v < best_val - 1e-14 * (1.0 + best_val.abs()) {
            best = t;
            best_val = v;
        }
    }
    z.signum() * best
}
