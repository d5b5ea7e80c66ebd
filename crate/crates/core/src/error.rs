use thiserror::Error;

/// Errors raised by loss evaluation, path solvers, and experiment plumbing.
#[derive(Debug, Error)]
pub enum PathError {
    #[error("point outside the loss domain: {0}")]
    Domain(String),

    #[error("unsupported loss configuration: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("path solver hit its iteration cap of {cap} at t = {t}")]
    Nontermination { cap: usize, t: f64 },

    #[error("step-size schedule invariant violated at k = {k}: {detail}")]
    ScheduleInvariant { k: usize, detail: String },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PathError>;
