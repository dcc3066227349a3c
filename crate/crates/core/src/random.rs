//! Random positive definite problems for property checks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::covmodel::ProblemSpec;

pub const DEFAULT_MAX_COND: f64 = 1e4;

/// Condition number of a symmetric positive definite matrix.
pub fn condition_number(k: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(k.clone()).eigenvalues;
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn normal_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Covariance `Q diag(λ) Qᵀ` with `Q` Haar-orthogonal and eigenvalues
/// log-uniform on `[1, c]`, where `log c` is itself uniform on
/// `[0, log max_cond]`. With `normalized` the matrix is rescaled to unit
/// diagonal. Draws that exceed `max_cond` are rejected and redrawn.
pub fn random_covariance<R: Rng>(
    rng: &mut R,
    p: usize,
    normalized: bool,
    max_cond: f64,
) -> DMatrix<f64> {
    loop {
        let log_c = rng.random::<f64>() * max_cond.ln();
        let eigen = DVector::from_fn(p, |_, _| (rng.random::<f64>() * log_c).exp());
        let q = normal_matrix(rng, p, p).qr().q();
        let mut k = &q * DMatrix::from_diagonal(&eigen) * q.transpose();
        k = (&k + k.transpose()) * 0.5;
        if normalized {
            let d = DVector::from_fn(p, |j, _| 1.0 / k[(j, j)].sqrt());
            k = DMatrix::from_fn(
                p,
                p,
                |i, j| if i == j { 1.0 } else { k[(i, j)] * d[i] * d[j] },
            );
        }
        if condition_number(&k) <= max_cond {
            return k;
        }
    }
}

/// Random problem with covariance from [`random_covariance`] and `b ~ N(0, I)`.
pub fn random_spec<R: Rng>(rng: &mut R, p: usize, normalized: bool, max_cond: f64) -> ProblemSpec {
    loop {
        let k = random_covariance(rng, p, normalized, max_cond);
        let b = DVector::from_fn(p, |_, _| rng.sample(StandardNormal));
        if let Ok(spec) = ProblemSpec::from_moments(k, b, None) {
            return spec;
        }
    }
}

/// Generator for trial `trial` of a seeded batch, independent of how many
/// other trials are drawn or in which order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Trial `trial` of a mixed batch: `p` uniform on `p_range`, unit diagonal with
/// probability one half.
pub fn mixed_trial(seed: u64, trial: u64, p_range: std::ops::RangeInclusive<usize>) -> ProblemSpec {
    let mut rng = trial_rng(seed, trial);
    let p = rng.random_range(p_range);
    let normalized = rng.random::<bool>();
    random_spec(&mut rng, p, normalized, DEFAULT_MAX_COND)
}
