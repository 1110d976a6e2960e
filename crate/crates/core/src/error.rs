use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("N = {n} is outside the supported range {min}..={max}")]
    SizeOutOfRange { n: usize, min: usize, max: usize },

    #[error("Bloch-vector length s = {0} is outside [0, 1]")]
    BlochLength(f64),

    #[error("epsilon = {epsilon} is outside the parametrization domain [{lo}, {hi}]")]
    EpsilonDomain { epsilon: f64, lo: f64, hi: f64 },

    #[error("the epsilon SLD is singular at s = 1")]
    SingularSld,

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid probability distribution: {0}")]
    Distribution(String),

    #[error("Fisher information diverges: outcome with p = {p:e} has derivative {dp:e}")]
    DivergentFisher { p: f64, dp: f64 },

    #[error("uninformative point: {0}")]
    Uninformative(String),

    #[error("j = {twice_j}/2 is not a valid total angular momentum for N = {n}")]
    InvalidJ { n: usize, twice_j: i64 },

    #[error("invalid Fock state: {0}")]
    InvalidFock(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_size(n: usize, min: usize, max: usize) -> Result<()> {
    if n < min || n > max {
        Err(Error::SizeOutOfRange { n, min, max })
    } else {
        Ok(())
    }
}
