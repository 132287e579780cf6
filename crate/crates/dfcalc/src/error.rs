//! Error type shared by every module.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A gamma-function form with no defined value (pole over pole,
    /// or a pole in the numerator).
    UndefinedForm(String),
    /// Grid/operator domain violation: misaligned bases, anchor outside
    /// the admissible range, window too small, order out of range.
    Domain(String),
    /// Malformed input text (CSV, rationals, CLI values, problem JSON).
    Parse(String),
    /// An identity check whose two sides share no grid point.
    EmptyCommonDomain(String),
    /// The assembled Euler–Lagrange system has no unique solution.
    Singular(String),
    /// The descent oracle ran out of iterations.
    NonConvergence { grad_norm: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UndefinedForm(m) => write!(f, "undefined form: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::EmptyCommonDomain(m) => write!(f, "empty common domain: {m}"),
            Error::Singular(m) => write!(f, "singular system: {m}"),
            Error::NonConvergence { grad_norm } => {
                write!(f, "descent did not converge: final gradient norm {grad_norm:e}")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
