use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point} out of range for a space of {n} points")]
    PointOutOfRange { point: usize, n: usize },

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("kernel matrix must be square and nonempty")]
    NotSquare,

    #[error("complex weight has no exact modulus in this field")]
    IrrationalModulus,

    #[error("instance too large: {0}")]
    SizeGuard(String),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },

    #[error("`{0}` cannot be evaluated in exact mode")]
    NotExact(&'static str),

    #[error("atom at {location} lies on a cell boundary at level {level}")]
    AtomOnBoundary { location: String, level: usize },

    #[error("atom location {0} is outside [0, 1]")]
    LocationOutOfRange(String),

    #[error("invalid level {0}; levels must be at least 2 and strictly increasing")]
    InvalidLevel(usize),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("diffuse bound violated at level {level}: defect exceeds twice the largest self-atom")]
    DiffuseBoundViolated { level: usize },
}
