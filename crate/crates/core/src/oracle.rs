//! Reference solvers for the penalized problem
//! `min ½ βᵀK1β − bᵀβ + λ‖β‖₁`, independent of the path tracer.

use nalgebra::{DMatrix, DVector};

use crate::covmodel::ProblemSpec;
use crate::error::{Error, Result};
use crate::linalg;

/// Largest `p` accepted by [`solve_kkt_enum`].
pub const MAX_ENUM_P: usize = 12;

const POWER_ITERATIONS: usize = 50;
const POWER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Ista,
    KktEnum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub beta: DVector<f64>,
    pub lambda: f64,
    pub kkt_residual: f64,
    pub method: OracleMethod,
}

/// Largest violation of the optimality conditions at `beta`:
/// `g_j = −λ sign(β_j)` on the support and `|g_j| <= λ` off it, with
/// `g = K1 β − b`.
pub fn kkt_residual(spec: &ProblemSpec, beta: &DVector<f64>, lambda: f64) -> f64 {
    let g = spec.k1() * beta - spec.b();
    beta.iter()
        .zip(g.iter())
        .map(|(&x, &gj)| {
            if x != 0.0 {
                (gj + lambda * x.signum()).abs()
            } else {
                (gj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Largest eigenvalue of a symmetric positive definite matrix by power
/// iteration.
pub fn power_iteration(k: &DMatrix<f64>) -> f64 {
    let n = k.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = k * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        v = w / norm;
        let done = (next - estimate).abs() <= POWER_TOL * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    let max_diag = (0..n).map(|j| k[(j, j)]).fold(0.0, f64::max);
    estimate.max(max_diag)
}

fn soft_threshold(x: f64, level: f64) -> f64 {
    if x > level {
        x - level
    } else if x < -level {
        x + level
    } else {
        0.0
    }
}

/// Proximal gradient iteration with step `1/L`, `L` the largest eigenvalue of
/// `K1`, started from zero.
///
/// Stops once successive iterates differ by at most `tol / L` in the max norm
/// and the KKT residual is at most `10 tol`.
pub fn solve_ista(
    spec: &ProblemSpec,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<OracleSolution> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!("lambda = {lambda}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol = {tol}")));
    }
    let p = spec.p();
    let eta = 1.0 / power_iteration(spec.k1());
    let k: Vec<f64> = spec.k1().iter().copied().collect();
    let b = spec.b().as_slice();
    let level = eta * lambda;

    let mut beta = vec![0.0; p];
    let mut next = vec![0.0; p];
    let mut best = (f64::INFINITY, beta.clone());
    for _ in 0..max_iter {
        let mut change = 0.0_f64;
        for i in 0..p {
            // K1 is symmetric, so column i equals row i.
            let col = &k[i * p..(i + 1) * p];
            let g: f64 = col.iter().zip(&beta).map(|(a, x)| a * x).sum::<f64>() - b[i];
            next[i] = soft_threshold(beta[i] - eta * g, level);
            change = change.max((next[i] - beta[i]).abs());
        }
        std::mem::swap(&mut beta, &mut next);
        if change <= tol * eta {
            let v = DVector::from_column_slice(&beta);
            let residual = kkt_residual(spec, &v, lambda);
            if residual < best.0 {
                best = (residual, beta.clone());
            }
            if residual <= 10.0 * tol {
                return Ok(OracleSolution {
                    beta: v,
                    lambda,
                    kkt_residual: residual,
                    method: OracleMethod::Ista,
                });
            }
        }
    }
    let v = DVector::from_column_slice(&beta);
    let residual = kkt_residual(spec, &v, lambda);
    let (kkt_residual, best) = if residual <= best.0 {
        (residual, beta)
    } else {
        best
    };
    Err(Error::MaxIterExceeded {
        iterations: max_iter,
        best,
        kkt_residual,
    })
}

/// Exact solution by checking the optimality conditions on every sign state.
///
/// For each support `A` (by bitmask) and sign vector `δ_A` (by Gray code) the
/// candidate `β_A = K1[A,A]⁻¹ (b_A − λ δ_A)` is accepted when its signs match
/// `δ_A` and `|(K1 β − b)_j| <= λ` off `A`, both up to `1e-10 (1 + ‖b‖∞ + λ)`.
/// Accepted states whose solutions coincide are merged.
pub fn solve_kkt_enum(spec: &ProblemSpec, lambda: f64) -> Result<OracleSolution> {
    let p = spec.p();
    if p > MAX_ENUM_P {
        return Err(Error::InvalidArgument(format!(
            "p = {p} exceeds {MAX_ENUM_P} for enumeration"
        )));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!("lambda = {lambda}")));
    }
    let k = spec.k1();
    let b = spec.b();
    let tol = 1e-10 * (1.0 + linalg::inf_norm(b) + lambda);

    let mut accepted: Vec<DVector<f64>> = Vec::new();
    if (0..p).all(|j| b[j].abs() <= lambda + tol) {
        accepted.push(DVector::zeros(p));
    }

    for mask in 1u32..(1 << p) {
        let active: Vec<usize> = (0..p).filter(|&j| mask & (1 << j) != 0).collect();
        let zeros: Vec<usize> = (0..p).filter(|&j| mask & (1 << j) == 0).collect();
        let n = active.len();
        let chol = linalg::cholesky(&linalg::principal_submatrix(k, &active))
            .ok_or(Error::SingularSubmatrix)?;
        let inv = chol.inverse();
        let base = chol.solve(&linalg::subvector(b, &active));

        // Start from δ = (+1, ..., +1) and flip one sign per Gray-code step.
        let mut signs = vec![1.0; n];
        let mut beta_a = &base - &inv * DVector::from_element(n, lambda);
        for step in 0u32..(1 << n) {
            if step > 0 {
                let flip = step.trailing_zeros() as usize;
                signs[flip] = -signs[flip];
                beta_a += inv.column(flip) * (-2.0 * lambda * signs[flip]);
            }
            if (0..n).any(|i| signs[i] * beta_a[i] < -tol) {
                continue;
            }
            let gap_ok = zeros.iter().all(|&j| {
                let g: f64 = active
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| k[(j, a)] * beta_a[i])
                    .sum::<f64>()
                    - b[j];
                g.abs() <= lambda + tol
            });
            if !gap_ok {
                continue;
            }
            let delta = DVector::from_column_slice(&signs);
            let exact = chol.solve(&(linalg::subvector(b, &active) - delta * lambda));
            accepted.push(linalg::scatter(p, &active, &exact));
        }
    }

    let mut distinct: Vec<DVector<f64>> = Vec::new();
    for beta in accepted {
        let merge_tol = 1e-6 * (1.0 + linalg::inf_norm(&beta));
        if !distinct.iter().any(|d| (d - &beta).amax() <= merge_tol) {
            distinct.push(beta);
        }
    }
    match distinct.len() {
        0 => Err(Error::NoStateAccepted { lambda }),
        1 => {
            let beta = distinct.pop().expect("one state");
            let kkt_residual = kkt_residual(spec, &beta, lambda);
            Ok(OracleSolution {
                beta,
                lambda,
                kkt_residual,
                method: OracleMethod::KktEnum,
            })
        }
        count => Err(Error::MultipleStatesAccepted { lambda, count }),
    }
}
