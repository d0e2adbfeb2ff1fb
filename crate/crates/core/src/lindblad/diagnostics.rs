use serde::{Deserialize, Serialize};

use crate::qops::{hermitian_eigensystem_tol, DensityMatrix};
use crate::tolerances::Tolerances;

/// Health report for a density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    /// `|Tr rho - 1|`.
    pub trace_error: f64,
    /// Max entrywise `|rho - rho^H|`.
    pub hermiticity_error: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
    pub purity: f64,
    pub violations: Vec<String>,
}

impl StateDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_state(rho: &DensityMatrix) -> StateDiagnostics {
    validate_state_with(rho, &Tolerances::default())
}

/// Never fails: problems are listed in `violations`.
pub fn validate_state_with(rho: &DensityMatrix, tol: &Tolerances) -> StateDiagnostics {
    let op = rho.as_operator();
    let tr = op.trace();
    let trace_error = (tr - 1.0).norm();
    let hermiticity_error = op.hermiticity_error();
    let min_eigenvalue = match hermitian_eigensystem_tol(op, f64::INFINITY) {
        Ok((vals, _)) => vals[0],
        Err(_) => f64::NAN,
    };
    let purity = rho.purity();
    let mut violations = Vec::new();
    if !(trace_error <= tol.trace) {
        violations.push(format!("trace error {trace_error:.3e} > {:.1e}", tol.trace));
    }
    if !(hermiticity_error <= tol.hermiticity) {
        violations.push(format!(
            "hermiticity error {hermiticity_error:.3e} > {:.1e}",
            tol.hermiticity
        ));
    }
    if !(min_eigenvalue >= -tol.positivity) {
        violations.push(format!(
            "minimum eigenvalue {min_eigenvalue:.3e} < -{:.1e}",
            tol.positivity
        ));
    }
    StateDiagnostics {
        trace_error,
        hermiticity_error,
        min_eigenvalue,
        purity,
        violations,
    }
}
