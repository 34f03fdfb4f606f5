use thiserror::Error;

/// Errors raised by mesh handling, discretization, estimation and the adaptive loop.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AfemError {
    #[error("element {element} is degenerate (zero area)")]
    DegenerateElement { element: usize },
    #[error("mesh is not conforming: {0}")]
    NonConforming(String),
    #[error("index {index} out of range (limit {limit}) in {context}")]
    BadIndex {
        index: usize,
        limit: usize,
        context: &'static str,
    },
    #[error("bisection closure exceeded its cap of {cap} forced bisections")]
    ClosureDepthExceeded { cap: usize },
    #[error("refinement depth must be 1 or 3, got {0}")]
    InvalidDepth(usize),
    #[error("coefficient on subdomain {subdomain} is not symmetric positive definite")]
    NonSpdCoefficient { subdomain: usize },
    #[error("no coefficient given for subdomain {subdomain}")]
    MissingSubdomainCoefficient { subdomain: usize },
    #[error(
        "conjugate gradient did not converge in {iterations} iterations (relative residual {relative_residual:e})"
    )]
    MaxIterExceeded { iterations: usize, relative_residual: f64 },
    #[error("edge {edge} is not an interior edge")]
    NotInteriorEdge { edge: usize },
    #[error("vertex {vertex} has an empty recovery patch")]
    EmptyPatch { vertex: usize },
    #[error("field does not live on the mesh it is combined with")]
    MeshMismatch,
    #[error("variable coefficient has no analytic gradient and finite differencing is disabled")]
    MissingCoefficientGradient,
    #[error("exact error {0:e} is too small for an effectivity index")]
    ZeroError(f64),
    #[error("rate fit needs at least 3 positive samples, got {0}")]
    InsufficientData(usize),
    #[error(
        "adaptive loop stopped after {iterations} iterations with estimator {eta:e} above tolerance {tolerance:e}"
    )]
    NonConvergence {
        iterations: usize,
        eta: f64,
        tolerance: f64,
    },
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for AfemError {
    fn from(e: std::io::Error) -> Self {
        AfemError::Io(e.to_string())
    }
}

pub type Result<T, E = AfemError> = std::result::Result<T, E>;
