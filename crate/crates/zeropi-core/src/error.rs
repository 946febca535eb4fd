use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: residual {0:e}")]
    NotHermitian(f64),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("requested {count} eigenvalues from a {dim}-dimensional operator")]
    Count { count: usize, dim: usize },
    #[error("LAPACK failure: {0}")]
    Lapack(String),
    #[error("not converged at truncation size {size}: drift {drift:?}")]
    NotConverged { size: usize, drift: Vec<f64>, eigenvalues: Vec<f64> },
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("window closure {0} required")]
    Closure(&'static str),
    #[error("symmetry broken: commutator residual {0:e}")]
    SymmetryBroken(f64),
    #[error("series did not converge: {0}")]
    Series(String),
    #[error("overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
