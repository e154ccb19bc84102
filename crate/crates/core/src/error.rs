use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error(
        "comb truncation order {requested} too small, at least {required} is needed for spectral mass >= 1 - 1e-12"
    )]
    TruncationTooSmall { requested: usize, required: usize },

    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e} ({evaluations} evaluations)")]
    NotConverged {
        achieved: f64,
        requested: f64,
        evaluations: usize,
    },

    #[error("sideband series did not settle below {tol:.1e} before exceeding the comb truncation order {limit}: last shell still changed the envelope by {achieved:.3e}")]
    SidebandLimit { achieved: f64, tol: f64, limit: usize },

    #[error("time grid too coarse: pulse at t={time:.6e} s spans only {samples:.1} samples across its FWHM (need {required})")]
    GridTooCoarse { time: f64, samples: f64, required: usize },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
