use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("quadrature did not converge: best estimate {value} with error {err_est:e} after {n_evals} evaluations")]
    NoConvergence { value: f64, err_est: f64, n_evals: u64 },
    #[error("tail bound {bound:e} exceeds tolerance (partial value {partial})")]
    Precision { partial: f64, bound: f64 },
    #[error("singular point: {0}")]
    Singular(String),
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("too many degenerate samples: {bad} of {total}")]
    DataQuality { bad: u64, total: u64 },
    #[error("covariance is rank deficient: {0}")]
    RankDeficient(String),
    #[error("monomial set is not ample (Jacobian factor is {0})")]
    NotAmple(f64),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
