use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::catspace::{annihilation, number, CatFrame};
use crate::error::Result;
use crate::qops::{kron, Operator, StateVector};

use super::params::SystemParams;
use super::pulse::PulseSchedule;

/// Two-level transmon operators.
///
/// Index 0 is the excited state `|+Z>`, index 1 the ground state, so
/// `sigma_z = diag(1, -1)` and the decay operator `sigma_minus = |g><e|`
/// is `[[0, 0], [1, 0]]`. The ladder operators satisfy
/// `sigma_minus = (sigma_x + i sigma_y) / 2`, which fixes
/// `sigma_y = [[0, i], [-i, 0]]`.
pub mod transmon {
    use super::*;

    pub fn sigma_minus() -> Operator {
        Operator::from_real(2, &[0.0, 0.0, 1.0, 0.0])
            .unwrap()
            .with_label("σ-")
    }

    pub fn sigma_plus() -> Operator {
        sigma_minus().adjoint().with_label("σ+")
    }

    pub fn sigma_x() -> Operator {
        crate::qops::sigma_x()
    }

    pub fn sigma_y() -> Operator {
        crate::qops::sigma_y().scale_real(-1.0).with_label("Y")
    }

    pub fn sigma_z() -> Operator {
        crate::qops::sigma_z()
    }

    /// Excited state, the +1 eigenvector of `sigma_z`.
    pub fn plus_z() -> StateVector {
        StateVector::basis(2, 0).unwrap()
    }

    pub fn minus_z() -> StateVector {
        StateVector::basis(2, 1).unwrap()
    }

    pub fn plus_x() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_amplitudes(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)])
            .unwrap()
    }

    pub fn plus_y() -> StateVector {
        // sigma_y (1, -i)/sqrt2 = (1, -i)/sqrt2 for sigma_y = [[0, i], [-i, 0]]
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_amplitudes(vec![Complex64::new(h, 0.0), Complex64::new(0.0, -h)])
            .unwrap()
    }
}

/// Kerr-cat Hamiltonian `2π[-K a†²a² + eps2 (a†² + a²)]` in rad/µs.
///
/// Its two cat states are degenerate at energy `K alpha^4` (times 2π),
/// from the identity `H = -K (a†² - alpha²)(a² - alpha²) + K alpha^4`.
pub fn build_kcq_hamiltonian(p: &SystemParams) -> Result<Operator> {
    p.validate()?;
    let n = p.n_fock;
    let a = annihilation(n)?;
    let ad = a.adjoint();
    let a2 = a.matmul(&a)?;
    let ad2 = ad.matmul(&ad)?;
    let kerr = ad2.matmul(&a2)?.scale_real(-p.k_a);
    let squeeze = ad2.add(&a2)?.scale_real(p.eps2());
    Ok(kerr.add(&squeeze)?.scale_real(TAU).with_label("H_kcq"))
}

/// Time-independent part of the joint Hamiltonian: `H_kcq ⊗ I + (chi/2) n ⊗ sigma_z`.
pub fn build_static_hamiltonian(p: &SystemParams) -> Result<Operator> {
    let h_kcq = build_kcq_hamiltonian(p)?;
    let id2 = Operator::identity(2);
    Ok(kron(&h_kcq, &id2)
        .add(&dispersive_term(p)?)?
        .with_label("H_static"))
}

/// The drive operator `2π g3 xi a† ⊗ sigma_minus`; the Hamiltonian adds
/// `c(t) D + conj(c(t)) D†` with `c(t) = f(t) e^{i(phi + 2π delta t)}`.
pub fn full_drive_operator(p: &SystemParams) -> Result<Operator> {
    let ad = annihilation(p.n_fock)?.adjoint();
    Ok(kron(&ad, &transmon::sigma_minus()).scale_real(TAU * p.g3_tilde * p.xi))
}

/// Drive phase `phi + 2π delta t`.
pub fn drive_phase(p: &SystemParams, t: f64) -> f64 {
    p.phi + TAU * p.delta * t
}

/// Full joint Hamiltonian at time `t` (rad/µs), dimension `2N`, Kerr-cat first.
pub fn build_full_hamiltonian(
    p: &SystemParams,
    schedule: &PulseSchedule,
    t: f64,
) -> Result<Operator> {
    let f = schedule.envelope(t)?;
    let h0 = build_static_hamiltonian(p)?;
    let d = full_drive_operator(p)?;
    let c = Complex64::from_polar(f, drive_phase(p, t));
    Ok(h0
        .add(&d.scale(c))?
        .add(&d.adjoint().scale(c.conj()))?
        .with_label("H_full"))
}

/// Interaction part of the full Hamiltonian with `f = 1`:
/// `2π g3 xi (e^{i phi} a† ⊗ sigma_minus + h.c.)`.
pub fn full_interaction(p: &SystemParams) -> Result<Operator> {
    let d = full_drive_operator(p)?;
    let c = Complex64::from_polar(1.0, p.phi);
    d.scale(c).add(&d.adjoint().scale(c.conj()))
}

/// Cat-qubit Paulis in the two-dimensional basis `(+Z_kc, -Z_kc)`, where
/// `+Z_kc = (|C+> + |C->)/sqrt2`. In this basis they are the standard
/// Pauli matrices and `|C+>` is `(1, 1)/sqrt2`.
pub mod cat_qubit {
    use super::*;

    pub fn sigma_x() -> Operator {
        crate::qops::sigma_x()
    }
    pub fn sigma_y() -> Operator {
        crate::qops::sigma_y()
    }
    pub fn sigma_z() -> Operator {
        crate::qops::sigma_z()
    }

    /// `|C+>`, the +1 eigenvector of `sigma_x`.
    pub fn cat_plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_amplitudes(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)])
            .unwrap()
    }

    pub fn plus_z() -> StateVector {
        StateVector::basis(2, 0).unwrap()
    }

    /// The Fock-space vectors spanning this basis, in order.
    pub fn fock_basis(frame: &CatFrame) -> Result<[StateVector; 2]> {
        let (zp, zm) = frame.z_eigenstates()?;
        Ok([zp, zm])
    }
}

/// Drive operator of the effective model: `2π Omega sigma_z_kc ⊗ sigma_minus`.
pub fn effective_drive_operator(p: &SystemParams) -> Operator {
    kron(&cat_qubit::sigma_z(), &transmon::sigma_minus()).scale_real(TAU * p.omega())
}

/// Effective two-qubit Hamiltonian
/// `2π Omega sigma_z_kc ⊗ (cos phi sigma_x - sin phi sigma_y)` with
/// `Omega = g3 xi alpha`, Kerr-cat first.
pub fn build_effective_hamiltonian(p: &SystemParams) -> Result<Operator> {
    let (s, c) = p.phi.sin_cos();
    let t = transmon::sigma_x()
        .scale_real(c)
        .sub(&transmon::sigma_y().scale_real(s))?;
    Ok(kron(&cat_qubit::sigma_z(), &t)
        .scale_real(TAU * p.omega())
        .with_label("H_eff"))
}

/// Basis of the cat subspace tensored with the transmon, ordered to match
/// the effective model: `(+Z_kc, -Z_kc) ⊗ (e, g)`.
pub fn projected_basis(frame: &CatFrame) -> Result<Vec<StateVector>> {
    let cats = cat_qubit::fock_basis(frame)?;
    let mut out = Vec::with_capacity(4);
    for c in &cats {
        for t in [transmon::plus_z(), transmon::minus_z()] {
            out.push(c.kron(&t));
        }
    }
    Ok(out)
}

/// Lifts a two-level Kerr-cat operator onto the joint space.
pub fn lift_kcq(op: &Operator) -> Operator {
    kron(op, &Operator::identity(2))
}

/// Lifts a transmon operator onto the joint space of Fock dimension `n`.
pub fn lift_transmon(op: &Operator, n: usize) -> Operator {
    kron(&Operator::identity(n), op)
}

pub fn dispersive_term(p: &SystemParams) -> Result<Operator> {
    Ok(kron(&number(p.n_fock)?, &transmon::sigma_z()).scale_real(TAU * p.chi_ab / 2.0))
}
