use crate::expr::{GridEvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] GridEvalError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite value at node {node} (r = {r})")]
    NonFinite { node: usize, r: f64 },
    #[error("weight h(r) = {value} is not positive at node {node} (r = {r})")]
    NonPositiveWeight { node: usize, r: f64, value: f64 },
    #[error("grid too small for the residual stencil: {n} nodes, need at least 7")]
    GridTooSmall { n: usize },
    #[error("seed rejected: relative residual {max_rel:.3e} at node {node} exceeds {tol:.1e}")]
    SeedRejected { max_rel: f64, node: usize, tol: f64 },
    #[error(
        "seed solution vanishes at node {node} (r = {r}, |y| = {value:.3e}); the transformed potential is singular"
    )]
    SingularSeed { node: usize, r: f64, value: f64 },
    #[error("chain normalization P(r) = {value:.6e} is not positive at node {node} (r = {r})")]
    SingularChain { node: usize, r: f64, value: f64 },
    #[error("det P changes sign or vanishes at node {node} (r = {r}, det = {det:.3e})")]
    SingularBargmann { node: usize, r: f64, det: f64 },
    #[error("multichannel denominator {value:.6e} is not positive at node {node} (r = {r})")]
    SingularDenominator { node: usize, r: f64, value: f64 },
    #[error("spectral parameters {first} and {second} coincide (|difference| < {tol:e})")]
    CoincidentSpectralParameters { first: f64, second: f64, tol: f64 },
    #[error("{0}")]
    InvalidSeedSet(String),
    #[error("{0}")]
    InvalidChannelSystem(String),
}

impl Error {
    /// True for failures caused by a singular transform (vanishing seed,
    /// non-positive P or det P crossing zero).
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            Error::SingularSeed { .. }
                | Error::SingularChain { .. }
                | Error::SingularBargmann { .. }
                | Error::SingularDenominator { .. }
        )
    }
}
