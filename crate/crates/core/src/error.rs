use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("expected edge count {expected:.3e} exceeds the configured cap {cap:.3e}")]
    EdgeCap { expected: f64, cap: f64 },

    #[error("seed count {requested} exceeds size {size} of community {community}")]
    SeedCount {
        community: usize,
        requested: usize,
        size: usize,
    },

    #[error("strategy selected community {0}, which has no usable node")]
    InfeasibleSelection(usize),

    #[error("chi is reducible: communities {unreachable:?} cannot be reached from community {root}")]
    Reducible { root: usize, unreachable: Vec<usize> },

    #[error("integration inconclusive after {steps} steps (y = {y:.6e})")]
    Inconclusive { steps: usize, y: f64 },

    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("matrix is singular")]
    Singular,

    #[error("negative radicand {value:.6e} at component {component}")]
    NegativeRadicand { component: usize, value: f64 },

    #[error("bisection failed to bracket a crossing: {0}")]
    NotBracketed(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
