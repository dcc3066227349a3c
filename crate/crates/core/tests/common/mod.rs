#![allow(dead_code)]

use lasso_geo::pathsolver::LassoPath;
use lasso_geo::ProblemSpec;
use nalgebra::{DMatrix, DVector};

pub const SIGMA_Y_SQ: f64 = 1.332476;

pub fn spec(p: usize, k: &[f64], b: &[f64]) -> ProblemSpec {
    ProblemSpec::from_moments(
        DMatrix::from_row_slice(p, p, k),
        DVector::from_row_slice(b),
        None,
    )
    .unwrap()
}

pub fn prostate2() -> ProblemSpec {
    ProblemSpec::from_moments(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.2805, 0.2805, 1.0]),
        DVector::from_vec(vec![0.8478, 0.5002]),
        Some(SIGMA_Y_SQ),
    )
    .unwrap()
}

pub fn prostate3() -> ProblemSpec {
    ProblemSpec::from_moments(
        DMatrix::from_row_slice(
            3,
            3,
            &[
                1.0, 0.2805, 0.225, 0.2805, 1.0, 0.34797, 0.225, 0.34797, 1.0,
            ],
        ),
        DVector::from_vec(vec![0.8478, 0.5002, 0.1958]),
        Some(SIGMA_Y_SQ),
    )
    .unwrap()
}

pub fn transfer3d() -> ProblemSpec {
    spec(
        3,
        &[1.0, 0.9, 0.3, 0.9, 1.0, 0.1, 0.3, 0.1, 1.0],
        &[0.6, 0.5, 0.9],
    )
}

pub fn nonnorm2() -> ProblemSpec {
    spec(2, &[11.0, -15.0, -15.0, 24.0], &[69.0, -87.0])
}

pub fn nonnorm3() -> ProblemSpec {
    spec(
        3,
        &[
            1.0,
            2.076723259,
            -0.8366932937,
            2.076723259,
            4.454808865,
            -1.770192871,
            -0.8366932937,
            -1.770192871,
            0.7124956373,
        ],
        &[-2.436833026, -4.8280881, 2.079566589],
    )
}

pub fn transfer4d() -> ProblemSpec {
    spec(
        4,
        &[
            1.0, -0.2, -0.1, -0.2, -0.2, 1.0, -0.3, -0.4, -0.1, -0.3, 1.0, -0.6, -0.2, -0.4, -0.6,
            1.0,
        ],
        &[-0.3, -0.1, -0.2, 0.6],
    )
}

pub fn max_abs_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

/// Largest violation of the optimality conditions `g_j = s δ_j` on the active
/// set and `|g_j| <= |s|` off it, over `samples` interior points of every
/// segment of positive length.
pub fn kkt_certificate(path: &LassoPath, samples: usize) -> f64 {
    let spec = path.spec();
    let mut worst = 0.0_f64;
    for seg in path.segments() {
        if seg.s_lo >= seg.s_hi {
            continue;
        }
        for k in 1..=samples {
            let s = seg.s_hi + (seg.s_lo - seg.s_hi) * k as f64 / (samples + 1) as f64;
            let beta = seg.beta_at(s);
            let g = spec.k1() * &beta - spec.b();
            for j in 0..spec.p() {
                let sign = seg.state.sign(j);
                let v = if sign == 0 {
                    g[j].abs() - s.abs()
                } else {
                    (g[j] - s * f64::from(sign)).abs()
                };
                worst = worst.max(v);
            }
        }
    }
    worst
}

/// `n` values log-spaced from `hi` down to `lo`.
pub fn log_grid(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let f = if n == 1 {
                0.0
            } else {
                i as f64 / (n - 1) as f64
            };
            (hi.ln() + f * (lo.ln() - hi.ln())).exp()
        })
        .collect()
}
