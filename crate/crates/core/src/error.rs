use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gimbal lock: pitch {theta} rad is within the exclusion band around ±π/2")]
    GimbalLock { theta: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gain synthesis failed: {0}")]
    SynthesisFailure(String),

    #[error("{solver} did not converge (residual {residual:e})")]
    NonConvergence { solver: &'static str, residual: f64 },

    #[error("closed loop is not Hurwitz (max real eigenvalue {max_real_eig:e})")]
    UnstableClosedLoop { max_real_eig: f64 },

    #[error("innovation covariance is numerically singular")]
    InnovationCovSingular,

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("matrix format: {0}")]
    MatrixFormat(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
