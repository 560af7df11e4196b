use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by transforms, estimators and numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A constructor or operation received an out-of-domain argument.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Not enough observations for the requested number of extremes.
    #[error("need 2 <= k < n, got k = {k} with n = {n}")]
    Size { n: usize, k: usize },

    /// Tied values among the top order statistics make the transform degenerate.
    #[error("tied values among the top {0} order statistics")]
    Tie(usize),

    /// The threshold order statistic must be strictly positive for log excesses.
    #[error("threshold order statistic is not positive ({0})")]
    Positivity(f64),

    /// The refinement stage hit its iteration cap.
    #[error("minimizer did not converge within the iteration cap")]
    NonConvergence,

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Scenario or CLI configuration problem; the message names the field.
    #[error("config error: {0}")]
    Config(String),
}
