//! Numerical tolerances shared by every module.
//!
//! A single record so that scenario configs can override them in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max entrywise |rho - rho^H| for a density matrix.
    pub hermiticity: f64,
    /// Max |Tr rho - 1| for a density matrix.
    pub trace: f64,
    /// Most negative eigenvalue accepted for a density matrix.
    pub positivity: f64,
    /// Hermiticity required before diagonalisation.
    pub eigen_input: f64,
    /// Max |<psi|psi> - 1| after a normalising constructor.
    pub normalization: f64,
    /// Imaginary part of a Hermitian expectation value that is still "real".
    pub expectation_imag: f64,
    /// Trace drift over a run that is reported as suspicious.
    pub trace_drift_warn: f64,
    /// Trace drift at which the integrator aborts.
    pub trace_drift_abort: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            trace: 1e-8,
            positivity: 1e-8,
            eigen_input: 1e-8,
            normalization: 1e-9,
            expectation_imag: 1e-8,
            trace_drift_warn: 1e-6,
            trace_drift_abort: 1e-4,
        }
    }
}
