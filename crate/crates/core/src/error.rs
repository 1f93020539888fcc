use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KlrError {
    #[error("not a generalized Cartan matrix: {0}")]
    NotGCM(String),
    #[error("not symmetrizable: {0}")]
    NotSymmetrizable(String),
    #[error("grade associator inconsistent at ({0}, {1})")]
    AssociatorInconsistent(String, String),
    #[error("unknown index label {0}")]
    UnknownIndex(String),
    #[error("weight mismatch: {0}")]
    WeightMismatch(String),
    #[error("rewriting fuel exhausted")]
    InternalRewriteFuel,
    #[error("algebra mismatch")]
    AlgebraMismatch,
    #[error("ceiling too small: {0}")]
    CeilingTooSmall(String),
    #[error("pair is not Lambda-definable (hom dimension {0})")]
    NotLambdaDefinable(usize),
    #[error("truncation exhausted: {0}")]
    TruncationExhausted(String),
    #[error("composition is not a scalar: {0}")]
    NotScalar(String),
    #[error("localization hom did not stabilize: {0}")]
    NotStabilized(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("not realizable: {0}")]
    NotRealizable(String),
    #[error("unknown generator: {0}")]
    UnknownGenerator(String),
    #[error("module is not simple: {0}")]
    NotSimple(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, KlrError>;
