use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("unsupported jet dimension {0} (1 <= n <= 4)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("domain violation in {op}: argument value {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("point {point:?} lies outside the domain ({domain})")]
    OutsideDomain { point: Vec<f64>, domain: String },
    #[error("empty domain: no admissible sample found in {0}")]
    EmptyDomain(String),
    #[error("total derivative would need jet variables of order {0}")]
    OrderOverflow(usize),
    #[error("polynomial degree {degree} exceeds supported maximum {max}")]
    DegreeOverflow { degree: u32, max: u32 },
    #[error("bracket [e{i}, e{j}] is not in the span of the basis")]
    ClosureFailure { i: usize, j: usize },
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("{group} is not a symmetry of {target}")]
    SymmetryBreaking { group: String, target: String },
    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },
    #[error("sample {index} is off the solution manifold: |E| = {residual:e} > {bound:e}")]
    OffManifold { index: usize, residual: f64, bound: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
