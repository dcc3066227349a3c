//! Geometric lasso: exact solution paths for the ℓ₁-constrained least-squares
//! problem, traced as the tangency of the objective's level sets with the
//! cross-polytope `‖β‖₁ = t`.

pub mod closedform_p2;
pub mod covmodel;
pub mod error;
pub mod formats;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod pathsolver;
pub mod random;

pub use covmodel::{Dataset, Divisor, LeastSquaresCenter, ProblemSpec};
pub use error::{Error, Result};
pub use pathsolver::{trace_path, EventKind, LassoPath, PathPoint, Query, SignState};
