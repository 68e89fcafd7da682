use thiserror::Error;

/// Errors produced by the numerical routines and file formats of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tabulated function was asked for a value outside its grid.
    #[error("extrapolation outside tabulated range [{lo}, {hi}] rad requested at {at} rad")]
    Extrapolation { lo: f64, hi: f64, at: f64 },

    /// An integrand or input produced a non-finite value.
    #[error("non-finite value while evaluating {what} at {at}")]
    NonFinite { what: &'static str, at: f64 },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature did not converge on [{a}, {b}]: estimate {estimate:e}, \
         error {error:e} after {intervals} subintervals"
    )]
    NonConvergence {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    /// Violated structural invariant of an input (grid ordering, lengths, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Too few peaks for the requested statistic.
    #[error("insufficient peaks: need at least {needed}, found {found}")]
    InsufficientPeaks { needed: usize, found: usize },

    /// Hard-core placement gave up before all centers were placed.
    #[error("hard-core packing infeasible: placed {placed} of {requested} centers in {attempts} attempts")]
    PackingInfeasible {
        placed: usize,
        requested: usize,
        attempts: u64,
    },

    /// Malformed text input; `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
