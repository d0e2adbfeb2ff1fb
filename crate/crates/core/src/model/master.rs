use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::catspace::CatFrame;
use crate::error::{Error, Result};
use crate::qops::Operator;

use super::dissipators::{build_dissipators, build_effective_dissipators, Dissipator};
use super::hamiltonian::{
    build_static_hamiltonian, effective_drive_operator, full_drive_operator,
};
use super::params::SystemParams;
use super::pulse::PulseSchedule;

/// Time-dependent term `c(t) op + conj(c(t)) op†` with
/// `c(t) = f(t) exp(i (phase + 2π detuning t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveTerm {
    pub op: Operator,
    pub phase: f64,
    /// MHz.
    pub detuning: f64,
}

impl DriveTerm {
    pub fn coefficient(&self, envelope: f64, t: f64) -> Complex64 {
        Complex64::from_polar(envelope, self.phase + TAU * self.detuning * t)
    }
}

/// Everything the integrator needs: `H(t) = static + sum drives`, the
/// dissipators and the envelope.
#[derive(Debug, Clone)]
pub struct MasterEquation {
    pub static_h: Operator,
    pub drives: Vec<DriveTerm>,
    pub dissipators: Vec<Dissipator>,
    pub schedule: PulseSchedule,
}

impl MasterEquation {
    pub fn new(
        static_h: Operator,
        drives: Vec<DriveTerm>,
        dissipators: Vec<Dissipator>,
        schedule: PulseSchedule,
    ) -> Result<Self> {
        let n = static_h.dim();
        for d in &drives {
            if d.op.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d.op.dim(),
                });
            }
        }
        for d in &dissipators {
            if d.op.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d.op.dim(),
                });
            }
            if !(d.rate.is_finite() && d.rate >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "rate".into(),
                    reason: format!("dissipator rate must be non-negative, got {}", d.rate),
                });
            }
        }
        if !static_h.is_hermitian(1e-12 * static_h.norm().max(1.0)) {
            return Err(Error::NonHermitian {
                deviation: static_h.hermiticity_error(),
            });
        }
        schedule.validate()?;
        Ok(Self {
            static_h,
            drives,
            dissipators,
            schedule,
        })
    }

    /// Joint Kerr-cat/transmon model in the truncated Fock space (dim `2N`).
    pub fn full(p: &SystemParams, frame: &CatFrame, schedule: PulseSchedule) -> Result<Self> {
        let drive = DriveTerm {
            op: full_drive_operator(p)?,
            phase: p.phi,
            detuning: p.delta,
        };
        Self::new(
            build_static_hamiltonian(p)?,
            vec![drive],
            build_dissipators(p, frame)?,
            schedule,
        )
    }

    /// Four-level effective model. With `dissipative = false` no channels
    /// are attached regardless of the lifetimes in `p`.
    pub fn effective(
        p: &SystemParams,
        frame: &CatFrame,
        schedule: PulseSchedule,
        dissipative: bool,
    ) -> Result<Self> {
        p.validate()?;
        let drive = DriveTerm {
            op: effective_drive_operator(p),
            phase: p.phi,
            detuning: p.delta,
        };
        let diss = if dissipative {
            build_effective_dissipators(p, frame)?
        } else {
            Vec::new()
        };
        Self::new(Operator::zeros(4), vec![drive], diss, schedule)
    }

    pub fn dim(&self) -> usize {
        self.static_h.dim()
    }

    /// Hamiltonian at time `t` (rad/µs).
    pub fn hamiltonian_at(&self, t: f64) -> Result<Operator> {
        let f = self.schedule.envelope(t)?;
        let mut h = self.static_h.clone();
        for d in &self.drives {
            let c = d.coefficient(f, t);
            h = h.add(&d.op.scale(c))?.add(&d.op.adjoint().scale(c.conj()))?;
        }
        Ok(h)
    }
}
