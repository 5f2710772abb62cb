use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("dilation factor must be positive, got {0}")]
    BadDilation(f64),

    #[error("pole at the identity")]
    PoleAtIdentity,

    #[error("kernel pole: source and target coincide")]
    KernelPole,

    #[error("characteristic point: |grad_0 F| = {0:e}")]
    Characteristic(f64),

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("degenerate recurrence for k = {k}, l = {l}, n = {n}")]
    DegenerateRecurrence { k: usize, l: usize, n: usize },

    #[error("coefficient provider has no value for m = {m}, k = {k}")]
    MissingCoefficient { m: usize, k: usize },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("function `{name}` at byte {offset} takes one argument, got {found}")]
    Arity { offset: usize, name: String, found: usize },

    #[error("domain error in `{0}`")]
    Domain(String),

    #[error("non-finite value at node {node}")]
    NonFiniteNode { node: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unsolvable: {0}")]
    Unsolvable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("interpolation failed: {0}")]
    Interpolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
