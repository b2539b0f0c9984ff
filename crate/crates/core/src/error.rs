use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The CLI maps [`Error::is_invalid_input`] to exit code 2 and every other
/// variant to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("form has rank 0")]
    Empty,
    #[error("form is degenerate (determinant 0)")]
    Degenerate,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("form must be {0}")]
    Definiteness(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("tail bound {tail:e} exceeds tolerance {tol:e}; increase the truncation bound (currently {bound})")]
    Tolerance { tail: f64, tol: f64, bound: u64 },
    #[error("evaluation point has imaginary part {0} below the safe threshold")]
    UnsafePoint(f64),
    #[error("d-invariant formula not known to apply: {0}")]
    FormulaNotApplicable(String),
}

impl Error {
    /// True for malformed input (as opposed to a violated precondition).
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::NotSquare | Error::Asymmetric(..) | Error::Empty
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
