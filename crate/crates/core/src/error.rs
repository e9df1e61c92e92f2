use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear-algebra routine did not converge: {0}")]
    NoConvergence(String),

    #[error("propagator lost unitarity (drift {drift:.3e})")]
    UnitarityDrift { drift: f64 },

    #[error("integration step underflow (dt = {dt:.3e})")]
    StepUnderflow { dt: f64 },

    #[error("energy expectation has imaginary part {imag:.3e}; the state is corrupted")]
    ComplexEnergy { imag: f64 },

    #[error("sign pattern (W = {w:.6e}, Q_c = {q_c:.6e}, Q_h = {q_h:.6e}) is forbidden by the first law and Clausius inequality")]
    ForbiddenRegime { w: f64, q_c: f64, q_h: f64 },

    #[error("exact diagonalization is capped at {cap} sites, got {n_sites}")]
    OracleSizeCap { n_sites: usize, cap: usize },

    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
