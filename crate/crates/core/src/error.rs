use thiserror::Error;

/// Errors raised by the gain-sensing computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity with respect to `G` diverges at the identity channel.
    #[error("{quantity} diverges at G = 1 (the value with respect to tau stays finite)")]
    Singularity { quantity: &'static str },

    #[error("series did not converge within {max_terms} terms (remaining tail bound {tail:e})")]
    NonConvergence { max_terms: usize, tail: f64 },

    #[error(
        "finite-difference levels disagree: coarse {coarse:e}, fine {fine:e} \
         (relative gap {gap:e} > {limit:e}); step {step:e} is roundoff-dominated or too coarse"
    )]
    FiniteDifference {
        coarse: f64,
        fine: f64,
        gap: f64,
        limit: f64,
        step: f64,
    },

    #[error("distributions in the family do not share a support: lengths {0:?}")]
    SupportMismatch(Vec<usize>),

    #[error("combinatorial value exceeds the 64-bit range")]
    Overflow,

    #[error("unsupported probe for simulation: {0}")]
    UnsupportedProbe(&'static str),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("pmf mean {actual} does not match the energy budget {expected}")]
    MeanMismatch { expected: f64, actual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
