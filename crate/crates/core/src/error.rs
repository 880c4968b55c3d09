use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {0} outside the open interval (0, 1)")]
    InvalidProbability(f64),

    #[error("need at least 2 vertices, got {0}")]
    TooFewVertices(usize),

    #[error(
        "connectivity regime violated: no connected G({n_plus_1}, {p}) sample in {attempts} attempts"
    )]
    ConnectivityExhausted { n_plus_1: usize, p: f64, attempts: u32 },

    #[error("graph is disconnected (vertex {vertex} unreachable or isolated)")]
    Disconnected { vertex: usize },

    #[error("matrix is not symmetric (max |b_ij - b_ji| = {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("probability schedule is not monotone")]
    NonMonotoneSchedule,

    #[error("first-step system for target {target} is singular or inaccurate (residual {residual:e})")]
    SingularSystem { target: usize, residual: f64 },

    #[error("spectral data carries no eigenvectors")]
    MissingEigenvectors,

    #[error("normalizing variance is numerically degenerate at n = {n}, p = {p}")]
    DegenerateNormalization { n: usize, p: f64 },

    #[error("moment set was computed for (n = {moments_n}, p = {moments_p}) but graph has (n = {graph_n}, p = {graph_p})")]
    MomentMismatch {
        moments_n: usize,
        moments_p: f64,
        graph_n: usize,
        graph_p: f64,
    },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },

    #[error("{failed} of {total} trials failed, above the 10% abort threshold")]
    BatchAborted { failed: usize, total: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
