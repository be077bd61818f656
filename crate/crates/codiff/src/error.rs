use thiserror::Error;

/// Errors shared across all modules of the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mixed ring instances: {0}")]
    MixedRing(String),
    #[error("ring has no derivations")]
    NoDerivations,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("constant term is not positive")]
    NotPositive,
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("degree error: {0}")]
    DegreeError(String),
    #[error("inhomogeneous input where a homogeneous form is required")]
    Inhomogeneous,
    #[error("square root unavailable in this coefficient ring: {0}")]
    SqrtUnavailable(String),
    #[error("degree cap exceeded: {0}")]
    Overflow(String),
    #[error("extension is not cleft: {0}")]
    NotCleft(String),
    #[error("codifferential is not regular: {0}")]
    NotRegular(String),
    #[error("conformal data residual exceeds tolerance: {0}")]
    NotConformal(String),
    #[error("map is not a bimodule map: {0}")]
    NotBimodule(String),
    #[error("perp fails the four-term identity: {0}")]
    PerpIdentityFails(String),
    #[error("delta is not compatible with perp: {0}")]
    DeltaNotCompatible(String),
    #[error("map fails the required Leibnizator law: {0}")]
    LeibnizatorMismatch(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
