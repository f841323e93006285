use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma = {gamma} is below 1/2, outside the range covered by the constant table")]
    OutOfHypothesis { gamma: f64 },

    #[error("QR iteration did not converge; an active block of order {unconverged} remains")]
    NoConvergence { unconverged: usize },

    #[error("eigenvalue {re} has imaginary part {im}, above the reality tolerance")]
    RealityViolation { re: f64, im: f64 },

    #[error("certification failed for ell = {ell} at eigenvalue index {index}: {detail}")]
    Certification {
        ell: u32,
        index: usize,
        detail: String,
    },

    #[error("eigenvalue table is complete only below {cutoff}, but {requested} was requested")]
    IncompleteTable { requested: f64, cutoff: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
