//! Closed-form lasso solution for two standardized predictors.
//!
//! With a unit-diagonal 2×2 covariance the solution depends only on the
//! least-squares center `β̂` and the bound `t`. Writing `u = β̂₁ + β̂₂` and
//! `v = β̂₁ − β̂₂`, the level ellipses are axis-aligned after a rotation by π/4,
//! so the tangency point is a vertex of the square while `t <= min(|u|, |v|)`,
//! slides along an edge while `t` lies between `|u|` and `|v|`, and equals `β̂`
//! beyond both.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// Breakpoints closer than this to `t` are treated as equal to it.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    /// `(0, t)`
    A,
    /// `(−t, 0)`
    B,
    /// `(0, −t)`
    C,
    /// `(t, 0)`
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Vertex(Vertex),
    /// Edge in the first or third quadrant, `u > 0`.
    Edge2a,
    /// Edge with `u < 0`.
    Edge2b,
    /// Edge in the second or fourth quadrant, `v < 0`.
    Edge3a,
    /// Edge with `v > 0`.
    Edge3b,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2Solution {
    pub beta: [f64; 2],
    pub regime: Regime,
}

/// Lasso solution with `‖β‖₁ <= t` for a unit-diagonal 2×2 covariance whose
/// least-squares center is `beta_hat`.
///
/// When `t` equals a breakpoint `|u|` or `|v|` (within 1e-12) the regime of
/// smaller `t` is reported; both formulas agree there.
pub fn solve_p2(beta_hat: [f64; 2], t: f64) -> Result<P2Solution> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonpositiveT(t));
    }
    if !beta_hat.iter().all(|x| x.is_finite()) || !t.is_finite() {
        return Err(Error::NonFinite("beta_hat or t"));
    }
    let u = beta_hat[0] + beta_hat[1];
    let v = beta_hat[0] - beta_hat[1];
    let within = |bound: f64| t <= bound.abs() + BOUNDARY_TOL;

    let (beta, regime) = if within(u) && within(v) {
        match (u > 0.0, v > 0.0) {
            (true, false) => ([0.0, t], Regime::Vertex(Vertex::A)),
            (false, false) => ([-t, 0.0], Regime::Vertex(Vertex::B)),
            (false, true) => ([0.0, -t], Regime::Vertex(Vertex::C)),
            (true, true) => ([t, 0.0], Regime::Vertex(Vertex::D)),
        }
    } else if within(u) {
        if u > 0.0 {
            ([(t + v) / 2.0, (t - v) / 2.0], Regime::Edge2a)
        } else {
            ([(-t + v) / 2.0, (-t - v) / 2.0], Regime::Edge2b)
        }
    } else if within(v) {
        if v < 0.0 {
            ([(-t + u) / 2.0, (t + u) / 2.0], Regime::Edge3a)
        } else {
            ([(t + u) / 2.0, (-t + u) / 2.0], Regime::Edge3b)
        }
    } else {
        (beta_hat, Regime::Interior)
    };
    Ok(P2Solution { beta, regime })
}

/// Rotation by π/4: `β̃ = ((β₁ + β₂)/√2, (−β₁ + β₂)/√2)`, or its inverse.
pub fn rotate_pi4(beta: [f64; 2], inverse: bool) -> [f64; 2] {
    let [a, b] = beta;
    if inverse {
        [(a - b) * FRAC_1_SQRT_2, (a + b) * FRAC_1_SQRT_2]
    } else {
        [(a + b) * FRAC_1_SQRT_2, (-a + b) * FRAC_1_SQRT_2]
    }
}
