use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid requires x1 > x0, got [{x0}, {x1}]")]
    InvalidInterval { x0: f64, x1: f64 },

    #[error("grid size must be an even integer >= 4, got {0}")]
    InvalidGridSize(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("unsupported Gauss-Legendre order {0}; supported orders are 4, 6, 8")]
    UnsupportedOrder(u32),

    #[error("moment cache was built for step {cached}, requested {requested}")]
    StaleMoments { cached: f64, requested: f64 },

    #[error("non-finite state encountered at step {0}")]
    NonFinite(usize),

    #[error("mode with symbol g={g} has non-positive frequency squared g^2 - m0 = {lambda}")]
    NonOscillatoryMode { g: f64, lambda: f64 },

    #[error("unsupported Runge-Kutta order {0}; supported orders are 2, 4")]
    UnsupportedRkOrder(u32),

    #[error("reference cross-check failed: disagreement {disagreement:.3e} exceeds tolerance {tolerance:.3e}")]
    CrossCheckFailed { disagreement: f64, tolerance: f64 },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown method id '{0}'")]
    UnknownMethod(String),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
