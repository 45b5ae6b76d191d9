use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input parameter violates its invariant. `field` names the offending
    /// parameter.
    #[error("invalid parameter `{field}`: {reason}")]
    Validation { field: String, reason: String },

    /// A plane-wave / Floquet truncation did not converge.
    #[error("truncation did not converge: {what} (discrepancy {discrepancy:.3e} between cutoffs {cutoff_lo} and {cutoff_hi})")]
    Convergence {
        what: String,
        discrepancy: f64,
        cutoff_lo: usize,
        cutoff_hi: usize,
    },

    /// A Born-Markov quantity was requested at a resonance whose group
    /// velocity sits below the velocity floor.
    #[error("near-divergent density of states: {count} resonance(s) with |v_g| below {floor:.1e} (smallest {smallest:.3e})")]
    NearDivergent {
        count: usize,
        floor: f64,
        smallest: f64,
    },

    #[error("simulation domain: {0}")]
    Domain(String),

    #[error("time step too large: dt*max|H| = {product:.3} exceeds {limit}")]
    StepSize { product: f64, limit: f64 },

    #[error("value {value} outside tabulated range [{lo}, {hi}]")]
    InterpolationRange { value: f64, lo: f64, hi: f64 },

    #[error("incomplete passage: {0}")]
    IncompletePassage(String),

    #[error("steady state is not unique: null space dimension {dimension}")]
    Multiplicity { dimension: usize },

    #[error("positivity violated: minimum eigenvalue {min_eigenvalue:.3e}")]
    Positivity { min_eigenvalue: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn validation(field: &str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Returns a validation error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_nonnegative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and >= 0, got {value}")))
    }
}

pub(crate) fn require_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite, got {value}")))
    }
}
