use thiserror::Error;

/// Errors reported by the analytic and Monte-Carlo operations.
#[derive(Debug, Clone, Error)]
pub enum OdoError {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The fading model or diversity combination is not supported.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// The operating point pushes a probability below the floating-point
    /// range; the result would be numerical garbage rather than an answer.
    #[error("operating point out of numeric range: {0}")]
    NumericRange(String),

    /// Quadrature refinement exhausted its order budget without the two
    /// finest results agreeing.
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    /// Fewer samples than the estimator is specified to accept.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// The sample set does not populate the tail (or neighborhood) the
    /// estimator needs; raise the sample count or move the operating point.
    #[error("estimator starved: {0}")]
    Starved(String),
}
