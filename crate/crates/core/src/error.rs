use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The mean-variance loading is zero, which makes the cap and the
    /// ceding proportion undefined.
    #[error("degenerate premium: xi1 must be positive, got {xi1}")]
    DegeneratePremium { xi1: f64 },

    #[error("integration did not converge on [{a}, {b}]")]
    Integration { a: f64, b: f64 },

    #[error("no sign change on bracket [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    NoRoot {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// Argument of an inverse function falls outside its open range.
    #[error("value {value} outside open range ({lo}, {hi})")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("best-response iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),
}
