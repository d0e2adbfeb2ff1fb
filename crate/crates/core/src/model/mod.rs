//! Hamiltonians, dissipators and parameter records.

mod device;
mod dissipators;
mod hamiltonian;
mod master;
mod params;
mod pulse;

pub use device::{DeviceReference, ReferenceEntry, REQUIRED_KEYS};
pub use dissipators::{build_dissipators, build_effective_dissipators, Dissipator};
pub use hamiltonian::{
    build_effective_hamiltonian, build_full_hamiltonian, build_kcq_hamiltonian,
    build_static_hamiltonian, cat_qubit, dispersive_term, drive_phase, effective_drive_operator,
    full_drive_operator, full_interaction, lift_kcq, lift_transmon, projected_basis, transmon,
};
pub use master::{DriveTerm, MasterEquation};
pub use params::{DephasingConvention, Lifetime, SystemParams, PARAM_NAMES};
pub use pulse::{EnvelopeKind, PulseSchedule};
