use thiserror::Error;

/// Failures raised by the geometry engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A non-finite value appeared while evaluating a holomorphic function.
    /// `index` is the 1-based coordinate label that produced it, when known.
    #[error("singular evaluation{}", match .index { Some(i) => format!(" at coordinate {i}"), None => String::new() })]
    SingularEvaluation { index: Option<usize> },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("degenerate point: {0}")]
    DegeneratePoint(String),

    /// One of the domain verdicts (`positivity`, `kahler_block`, `curlyN_sum`) failed.
    #[error("point outside the positivity domain (failed verdict: {verdict})")]
    OutsideDomain { verdict: String },

    #[error("pole: {0}")]
    Pole(String),

    #[error("outside the cone: {0}")]
    OutsideCone(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("contour placement: {0}")]
    ContourPlacement(String),
}

pub type Result<T> = std::result::Result<T, Error>;
