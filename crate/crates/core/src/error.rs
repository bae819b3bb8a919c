//! Error type shared by all modules of the crate.

/// Errors produced by chain setup, mode evolution, counting statistics and
/// the analysis layer.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A constructor or operation received parameters outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The ODE solver failed for one mode; `k` and `tau_q` identify the run.
    #[error("solver failed at k={k:.12}, tau_q={tau_q}: {reason}")]
    Solver { k: f64, tau_q: f64, reason: String },

    /// One or more modes failed while filling a probability table.
    #[error("{} mode(s) failed; first: {}", .0.len(), .0[0])]
    ModeFailures(Vec<String>),

    /// A numerical consistency check tripped (norm, residue, probability
    /// outside its clamping window).
    #[error("numerical fault: {0}")]
    NumericalFault(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// The requested quantity is outside the supported domain (for example
    /// cumulant orders above the tabulated range).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Too few data points for the requested analysis.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A persisted table could not be parsed; the line number is 1-based.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
