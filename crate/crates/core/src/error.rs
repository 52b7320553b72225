use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("prime divides a coefficient denominator; retry with another prime")]
    PrimeDividesDenominator,
    #[error("division by zero")]
    ZeroDivision,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: {msg}")]
    Semantic { line: usize, msg: String },
    #[error("line {line}: term is not affine in states and inputs: {msg}")]
    Nonlinear { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} reaches no source")]
    Unreachable { vertex: usize },
    #[error("vertex {vertex} out of range 1..={n}")]
    OutOfRange { vertex: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("non-generic parameter point: a model denominator vanishes")]
    NonGenericPoint,
    #[error("tuple of length {len} needs truncation order at least {len}, got {order}")]
    TupleTooLong { len: usize, order: usize },
    #[error("expected {expected} {what}, found {found}")]
    Arity { what: &'static str, expected: usize, found: usize },
    #[error("input series truncated at {found}, order {needed} requested")]
    ShortInput { needed: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("ordering must be a permutation of the outputs: {0}")]
    BadOrdering(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("no generic sample found after {0} attempts")]
    Resampling(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
