use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cutoff order violated: kappa = {kappa} must be below lambda = {lambda}")]
    CutoffOrder { kappa: f64, lambda: f64 },
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("C_* = {c_star} is not below 1, so C_1 is undefined")]
    CStarNotBelowOne { c_star: f64 },
    #[error("divergent integral at the {endpoint} endpoint")]
    Divergent { endpoint: &'static str },
    #[error("{what} did not converge (last residual {residual:e})")]
    NoConvergence { what: String, residual: f64 },
    #[error("basis dimension {dim} exceeds the limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },
    #[error("lattice incompatibility: {0}")]
    Lattice(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
