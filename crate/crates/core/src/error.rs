use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: lower bound must be below upper bound")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error:e}, requested {tolerance:e})")]
    NonConvergence {
        subdivisions: usize,
        error: f64,
        tolerance: f64,
    },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("log-log fit requires positive data")]
    NonPositiveData,

    #[error("state index {index} out of range (lowest admissible index is {first})")]
    IndexOutOfRange { index: u64, first: u64 },

    #[error("invalid width {width}: {reason}")]
    InvalidWidth { width: f64, reason: &'static str },

    #[error("approximant support [{lo}, {hi}] leaves the domain [{domain_lo}, {domain_hi}]")]
    Inadmissible {
        lo: f64,
        hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },

    #[error("{0:?} approximant has no square-integrable derivative")]
    UnsupportedFamily(crate::approximants::Family),

    #[error("series classification needs at least 4 checkpoints spanning 2 decades")]
    InsufficientCheckpoints,

    #[error("no dark band found on the momentum grid (extent too small?)")]
    NoDarkBandFound,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
