use thiserror::Error;

/// Errors reported by model construction, the solvers and the MPS codec.
#[derive(Debug, Error)]
pub enum MilpError {
    /// The model violates a structural invariant (bad index, empty model, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A pivot smaller than the stability threshold persisted even after the
    /// Bland's-rule fallback kicked in.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// The simplex hit its iteration safety limit; the model is most likely
    /// degenerate beyond what the anti-cycling rules can handle.
    #[error("iteration limit exceeded after {0} simplex iterations")]
    IterationLimit(usize),

    /// A name is not usable in an MPS file or collides with another one.
    #[error("name error: {0}")]
    BadName(String),

    /// MPS text could not be parsed; carries line number and section context.
    #[error("MPS parse error at line {line} ({section}): {message}")]
    MpsParse {
        line: usize,
        section: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, MilpError>;
