use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spectrum is not hyperbolic: eigenvalue {re}{im:+}i is within tolerance of the critical set")]
    NotHyperbolic { re: f64, im: f64 },
    #[error("matrix is (nearly) defective: eigenvector condition number {cond:.3e}")]
    DefectiveMatrix { cond: f64 },
    #[error("subspace split is not invariant under the matrix (defect {defect:.3e})")]
    NonInvariantSplit { defect: f64 },
    #[error("wrong spectral shape: {0}")]
    WrongShape(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("design matrix is rank deficient (condition number {cond:.3e})")]
    RankDeficient { cond: f64 },
    #[error("insufficient data: {samples} samples for {unknowns} unknowns")]
    InsufficientData { samples: usize, unknowns: usize },
    #[error("sampling step too coarse: derivative error bound {bound:.3e} exceeds residual {residual:.3e}")]
    StepTooCoarse { bound: f64, residual: f64 },
    #[error("prediction diverged at step {step} (norm {norm:.3e})")]
    Diverged { step: usize, norm: f64 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("requested time {t} outside trajectory range [{t0}, {t1}]")]
    OutOfRange { t: f64, t0: f64, t1: f64 },
    #[error("Newton iteration failed to converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("point is not periodic: time-T map defect {defect:.3e}")]
    NotPeriodic { defect: f64 },
    #[error("unknown testbed '{0}'")]
    UnknownTestbed(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("argument {0} outside the domain of the principal Lambert W branch")]
    OutOfDomain(f64),
    #[error("small divisor {value:.3e} at component {component}, multi-index {index:?}")]
    SmallDivisor { component: usize, index: Vec<u32>, value: f64 },
    #[error("point of amplitude {amplitude:.3e} beyond validity radius {radius:.3e}")]
    OutOfRadius { amplitude: f64, radius: f64 },
    #[error("ratio beta/alpha = {0} outside (1/2, 2); polar truncation not valid")]
    RatioOutOfRange(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
