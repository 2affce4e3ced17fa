use num_complex::Complex64;
use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("Airy argument {a} is outside the unscaled range; use airy_scaled")]
    AiryRange { a: f64 },

    #[error("pole of the mixture kernel at a = {a} (t = {t})")]
    Pole { a: f64, t: Complex64 },

    #[error("dQ/dq vanishes at q = {q}")]
    StationaryQ { q: f64 },

    #[error("no classically allowed region at e = {e}")]
    NoBoundRegion { e: f64 },

    #[error("q must be positive, got {q}")]
    NonPositiveQ { q: f64 },

    #[error("non-finite value in {what} at {at}")]
    NonFinite { what: &'static str, at: f64 },

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}]: estimate {estimate}, error {error}")]
    NoConvergence {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
    },

    #[error("energy bracket scan failed: {0}")]
    BracketScan(String),

    #[error("grid must be strictly increasing and positive (index {index})")]
    UnorderedGrid { index: usize },

    #[error("reference solver failed: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
