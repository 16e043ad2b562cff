use thiserror::Error;

/// Errors produced by the herdlab library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("a rating scale needs at least 2 levels, got {0}")]
    InvalidScale(usize),

    #[error("not a probability vector: {0}")]
    NotOnSimplex(String),

    #[error("scale mismatch: expected {expected} levels, got {got}")]
    ScaleMismatch { expected: usize, got: usize },

    #[error("rating {rating} outside 1..={levels}")]
    RatingOutOfRange { rating: usize, levels: usize },

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("cannot aggregate an empty rating sequence")]
    EmptySequence,

    #[error("insufficient data: need at least {needed} ratings, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("index {index} out of range (valid 1..={len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid weight rule: {0}")]
    InvalidWeights(String),

    #[error("invalid misbehavior spec: {0}")]
    InvalidMisbehavior(String),

    #[error("invalid sequence expression `{0}` (expected a constant or `a*(1-1/i)[+b]`)")]
    InvalidSequenceExpr(String),

    #[error("degenerate rule: contraction factor at step {step} is not positive")]
    DegenerateRule { step: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("threshold {threshold} not reached within horizon {horizon}")]
    NotReached { threshold: f64, horizon: usize },

    #[error("reference value is zero; report the absolute error |estimate - reference| instead")]
    ZeroReference,

    #[error("internal numerical failure: {0}")]
    NonFinite(String),

    #[error("{bad} of {total} data rows could not be parsed (rows {rows:?})")]
    Unparseable {
        bad: usize,
        total: usize,
        rows: Vec<usize>,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the caller's input rather than by the
    /// environment or a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NonFinite(_) | Error::Io(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
