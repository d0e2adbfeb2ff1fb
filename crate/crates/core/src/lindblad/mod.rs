//! Fixed-step integration of the Lindblad master equation.

mod diagnostics;
mod integrator;
mod rhs;

pub use diagnostics::{validate_state, validate_state_with, StateDiagnostics};
pub use integrator::{
    evolve, IntegratorConfig, Observable, RunDiagnostics, Sampling, Scheme, TimeSeries,
};
pub use rhs::{lindblad_rhs, Generator};
