use alloc::string::String;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value is out of range. The message names the field.
    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    /// A matrix failed one of the density-matrix invariants.
    #[error("density matrix is not {invariant} (deviation {deviation:.3e})")]
    Validation { invariant: &'static str, deviation: f64 },

    /// A parameter vector left the domain of a family.
    #[error("parameter {index} = {value} is outside the family domain")]
    Domain { index: usize, value: f64 },

    /// Pulse spacing with ωτ an odd multiple of π.
    #[error("singular pulse spacing: ωτ = {omega_tau} is an odd multiple of π")]
    SingularSpacing { omega_tau: f64 },

    /// Fisher information of a binary outcome at p ∈ {0, 1}.
    #[error("binary Fisher information is singular at p = {p}")]
    Singular { p: f64 },

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The preliminary detuning scan could not locate the resonance dip.
    #[error("scan failed: {0}")]
    ScanFailed(String),

    /// An estimator or fit produced something unusable.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }
}

/// Rejects NaN and infinities.
pub(crate) fn finite(field: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::input(field, "must be finite"))
    }
}

pub(crate) fn positive(field: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::input(field, "must be positive and finite"))
    }
}

pub(crate) fn nonnegative(field: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::input(field, "must be nonnegative and finite"))
    }
}
