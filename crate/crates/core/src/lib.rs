//! Simulation and calibration engine for a Kerr-cat qubit coupled to a
//! transmon through a parametric beam-splitter drive.
//!
//! Units at every public interface are ordinary frequencies in MHz and
//! times in microseconds. The factor 2π is applied once, inside the
//! Hamiltonian builders.

pub mod catspace;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod lindblad;
pub mod model;
pub mod qops;
pub mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
