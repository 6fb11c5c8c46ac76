use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("profiles live on different grids")]
    GridMismatch,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("norm is infinite: {0}")]
    InfiniteNorm(String),
    #[error("(k, p) = ({k}, {p}) outside the finiteness window 1/p < k < 3 + 1/p")]
    OutsideWindow { k: f64, p: f64 },
    #[error("divergent tail: {0}")]
    DivergentTail(String),
    #[error("need at least {needed} samples in the fit window, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("norm series must be positive and finite")]
    NonPositiveNorm,
    #[error("decay rate undefined: {0}")]
    RateUndefined(String),
    #[error("inadmissible step: {0}")]
    InadmissibleStep(String),
    #[error("profile is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("aliasing: relative magnitude {0:e} near the band limit")]
    Aliasing(f64),
    #[error("tails not negligible: relative boundary magnitude {0:e}")]
    TailsNotNegligible(f64),
    #[error("field is not mean-zero: {0}")]
    NotMeanZero(String),
    #[error("certificate construction failed: {0}")]
    CertificateFailed(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
