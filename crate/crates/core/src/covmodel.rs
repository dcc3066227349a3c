//! Quadratic model data: the predictor covariance `K1`, the predictor/response
//! covariances `b`, the least-squares center, induced sub-problems, and the
//! dataset <-> moments conversions.
//!
//! All vectors live in covariance units. When a source reports correlations
//! with the response, multiply them by the response standard deviation before
//! building a [`ProblemSpec`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Coefficients with `|beta_j| <= ZERO_TOL` are treated as exactly zero.
pub const ZERO_TOL: f64 = 1e-10;

/// Relative tolerance for the symmetry check on `K1`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance used to decide whether `K1` has unit diagonal.
pub const UNIT_DIAGONAL_TOL: f64 = 1e-12;

/// Validated quadratic lasso model.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    k1: DMatrix<f64>,
    b: DVector<f64>,
    sigma_y_sq: Option<f64>,
    n_obs: Option<usize>,
    names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresCenter {
    pub beta_hat: DVector<f64>,
    /// l1 norm of `beta_hat`.
    pub t_hat: f64,
    /// Signs of `beta_hat`, zero where `|beta_hat_j| <= ZERO_TOL`.
    pub delta_hat: Vec<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Divisor {
    N,
    #[default]
    NMinusOne,
}

impl Divisor {
    pub fn value(self, n: usize) -> f64 {
        match self {
            Divisor::N => n as f64,
            Divisor::NMinusOne => (n - 1) as f64,
        }
    }
}

/// Observations: `x` is N x p (one row per observation).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: Option<DVector<f64>>,
    divisor: Divisor,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: Option<DVector<f64>>, divisor: Divisor) -> Result<Self> {
        let (n, p) = x.shape();
        if p == 0 {
            return Err(Error::DimensionMismatch(
                "dataset has no predictor columns".into(),
            ));
        }
        if n < p + 1 {
            return Err(Error::TooFewObservations {
                rows: n,
                needed: p + 1,
            });
        }
        if let Some(y) = &y {
            if y.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "response has {} entries, expected {n}",
                    y.len()
                )));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("response"));
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("predictors"));
        }
        Ok(Dataset { x, y, divisor })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> Option<&DVector<f64>> {
        self.y.as_ref()
    }

    pub fn divisor(&self) -> Divisor {
        self.divisor
    }

    pub fn n_obs(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Centered (and optionally unit-variance) predictor matrix.
    fn centered_predictors(&self, standardize: bool) -> Result<DMatrix<f64>> {
        let n = self.n_obs();
        let div = self.divisor.value(n);
        let mut xc = self.x.clone();
        for j in 0..self.p() {
            let mut col = xc.column_mut(j);
            let raw_ss: f64 = col.iter().map(|v| v * v).sum();
            let mean = col.mean();
            col.add_scalar_mut(-mean);
            let ss: f64 = col.iter().map(|v| v * v).sum();
            if ss == 0.0 || ss <= f64::EPSILON * raw_ss {
                return Err(Error::DegenerateColumn(j));
            }
            if standardize {
                col /= (ss / div).sqrt();
            }
        }
        Ok(xc)
    }

    /// `XᵀX / divisor` after centering (and scaling when `standardize`).
    pub fn predictor_covariance(&self, standardize: bool) -> Result<DMatrix<f64>> {
        let xc = self.centered_predictors(standardize)?;
        Ok(xc.tr_mul(&xc) / self.divisor.value(self.n_obs()))
    }
}

impl ProblemSpec {
    /// Validate and wrap moment data. Rejects asymmetric or non-PD `K1`.
    pub fn from_moments(
        k1: DMatrix<f64>,
        b: DVector<f64>,
        sigma_y_sq: Option<f64>,
    ) -> Result<Self> {
        let p = k1.nrows();
        if k1.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "K1 is {}x{}, expected square",
                p,
                k1.ncols()
            )));
        }
        if p == 0 {
            return Err(Error::DimensionMismatch("empty K1".into()));
        }
        if b.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "b has {} entries, expected {p}",
                b.len()
            )));
        }
        if k1.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("K1"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("b"));
        }
        if let Some(v) = sigma_y_sq {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "sigma_y_sq must be finite and >= 0, got {v}"
                )));
            }
        }
        let scale = k1.amax().max(1.0);
        for r in 0..p {
            for c in (r + 1)..p {
                let gap = (k1[(r, c)] - k1[(c, r)]).abs();
                if gap > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric {
                        row: r,
                        col: c,
                        gap,
                    });
                }
            }
        }
        let k1 = (&k1 + k1.transpose()) * 0.5;
        if linalg::cholesky(&k1).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(ProblemSpec {
            k1,
            b,
            sigma_y_sq,
            n_obs: None,
            names: None,
        })
    }

    /// Moments of a dataset: `K1 = XᵀX/d`, `b = Xᵀy/d`, `sigma_y_sq = yᵀy/d`
    /// after centering, `d` the dataset's divisor convention.
    pub fn from_data(ds: &Dataset, standardize: bool) -> Result<Self> {
        let y = ds.y().ok_or(Error::MissingResponse)?;
        let n = ds.n_obs();
        let div = ds.divisor().value(n);
        let xc = ds.centered_predictors(standardize)?;
        let yc = y.add_scalar(-y.mean());
        let k1 = xc.tr_mul(&xc) / div;
        let b = xc.tr_mul(&yc) / div;
        let sigma_y_sq = yc.dot(&yc) / div;
        let mut spec = ProblemSpec::from_moments(k1, b, Some(sigma_y_sq))?;
        spec.n_obs = Some(n);
        Ok(spec)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} predictors",
                names.len(),
                self.p()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn with_n_obs(mut self, n: usize) -> Self {
        self.n_obs = Some(n);
        self
    }

    pub fn p(&self) -> usize {
        self.b.len()
    }

    pub fn k1(&self) -> &DMatrix<f64> {
        &self.k1
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn sigma_y_sq(&self) -> Option<f64> {
        self.sigma_y_sq
    }

    pub fn n_obs(&self) -> Option<usize> {
        self.n_obs
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn is_normalized(&self) -> bool {
        linalg::is_unit_diagonal(&self.k1, UNIT_DIAGONAL_TOL)
    }

    /// Solves `K1 β = b` by Cholesky.
    pub fn least_squares_center(&self) -> LeastSquaresCenter {
        let chol = linalg::cholesky(&self.k1).expect("validated spec is positive definite");
        let beta_hat = chol.solve(&self.b);
        let delta_hat: Vec<i8> = beta_hat.iter().map(|&v| sign_with_tol(v)).collect();
        let t_hat = delta_hat
            .iter()
            .zip(beta_hat.iter())
            .map(|(&d, &v)| f64::from(d) * v)
            .sum();
        LeastSquaresCenter {
            beta_hat,
            t_hat,
            delta_hat,
        }
    }

    /// The model restricted to the complement of `zero_set`.
    pub fn induced(&self, zero_set: &[usize]) -> Result<ProblemSpec> {
        let p = self.p();
        if let Some(&bad) = zero_set.iter().find(|&&j| j >= p) {
            return Err(Error::IndexOutOfRange { index: bad, p });
        }
        let keep: Vec<usize> = (0..p).filter(|j| !zero_set.contains(j)).collect();
        if keep.is_empty() {
            return Err(Error::EmptyRemainder);
        }
        let k1 = linalg::principal_submatrix(&self.k1, &keep);
        debug_assert!(
            linalg::cholesky(&k1).is_some(),
            "principal submatrix of a PD matrix"
        );
        Ok(ProblemSpec {
            k1,
            b: linalg::subvector(&self.b, &keep),
            sigma_y_sq: self.sigma_y_sq,
            n_obs: self.n_obs,
            names: self
                .names
                .as_ref()
                .map(|n| keep.iter().map(|&j| n[j].clone()).collect()),
        })
    }

    /// `μ(β) = ⟨K1 β, β⟩ − 2⟨b, β⟩ + σ_y²`, the level of the equimomental
    /// ellipsoid through `beta`.
    pub fn objective_value(&self, beta: &DVector<f64>) -> Result<f64> {
        let sigma_y_sq = self.sigma_y_sq.ok_or(Error::MissingResponseVariance)?;
        if beta.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "beta has {} entries, expected {}",
                beta.len(),
                self.p()
            )));
        }
        Ok((&self.k1 * beta).dot(beta) - 2.0 * self.b.dot(beta) + sigma_y_sq)
    }
}

pub(crate) fn sign_with_tol(v: f64) -> i8 {
    if v.abs() <= ZERO_TOL {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// A centered 2p-observation predictor dataset whose covariance (divisor
/// N − 1) is `k1`: rows are the columns of `S √D Sᵀ` and their negatives,
/// scaled so that the sample covariance reproduces `k1`. No response column.
pub fn synthesize_dataset(k1: &DMatrix<f64>) -> Result<Dataset> {
    let p = k1.nrows();
    if k1.ncols() != p || p == 0 {
        return Err(Error::DimensionMismatch(
            "K1 must be square and nonempty".into(),
        ));
    }
    if !linalg::is_unit_diagonal(k1, UNIT_DIAGONAL_TOL) {
        return Err(Error::NotNormalized);
    }
    if linalg::cholesky(k1).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let root = symmetric_sqrt(k1);
    let n = 2 * p;
    // Row sums of squares of [X̃/√2 | −X̃/√2] add up to K1; the factor
    // √(N − 1) turns that into a sample covariance.
    let scale = ((n - 1) as f64 / 2.0).sqrt();
    let x = DMatrix::from_fn(n, p, |r, c| {
        let (col, sign) = if r < p { (r, 1.0) } else { (r - p, -1.0) };
        sign * scale * root[(c, col)]
    });
    Dataset::new(x, None, Divisor::NMinusOne)
}

/// `S √D Sᵀ` from the symmetric eigendecomposition `K = S D Sᵀ`.
pub fn symmetric_sqrt(k: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = k.clone().symmetric_eigen();
    let sqrt_d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * sqrt_d * eig.eigenvectors.transpose()
}
