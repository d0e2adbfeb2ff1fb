use crate::catspace::{annihilation, CatFrame};
use crate::error::{Error, Result};
use crate::qops::{kron, Operator};

use super::hamiltonian::{cat_qubit, lift_kcq, lift_transmon, transmon};
use super::params::{DephasingConvention, Lifetime, SystemParams};

/// One Lindblad channel `rate * D[op]`, rate in 1/µs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub rate: f64,
    pub op: Operator,
    pub label: &'static str,
}

fn dephasing_rate(
    t2r: Lifetime,
    t1: Lifetime,
    convention: DephasingConvention,
    name: &str,
) -> Result<f64> {
    let rate = match convention {
        DephasingConvention::Literal => t2r.rate(),
        DephasingConvention::Conventional => 0.5 * (t2r.rate() - 0.5 * t1.rate()),
    };
    if rate < 0.0 {
        return Err(Error::InvalidParameter {
            name: name.into(),
            reason: format!("T2R exceeds 2 T1; pure-dephasing rate would be {rate:.4e}"),
        });
    }
    Ok(rate)
}

fn push(out: &mut Vec<Dissipator>, rate: f64, op: Operator, label: &'static str) {
    if rate > 0.0 {
        out.push(Dissipator { rate, op, label });
    }
}

/// The four channels of the joint model, lifted to dimension `2N`:
/// `a` at `1/T1_a`, `sigma_z_kc` at the Kerr-cat dephasing rate, `sigma_minus`
/// at `1/T1_b` and `sigma_z` at the transmon dephasing rate. Channels with an
/// infinite time are omitted.
pub fn build_dissipators(p: &SystemParams, frame: &CatFrame) -> Result<Vec<Dissipator>> {
    p.validate()?;
    frame.check_matches(p.alpha, p.n_fock)?;
    let n = p.n_fock;
    let mut out = Vec::with_capacity(4);
    if p.t1_a.is_finite() {
        push(&mut out, p.t1_a.rate(), lift_kcq(&annihilation(n)?), "kcq_loss");
    }
    if p.t2r_a.is_finite() {
        let r = dephasing_rate(p.t2r_a, p.t1_a, p.dephasing, "t2r_a")?;
        push(&mut out, r, lift_kcq(frame.sigma_z()), "kcq_dephasing");
    }
    if p.t1_b.is_finite() {
        push(
            &mut out,
            p.t1_b.rate(),
            lift_transmon(&transmon::sigma_minus(), n),
            "transmon_decay",
        );
    }
    if p.t2r_b.is_finite() {
        let r = dephasing_rate(p.t2r_b, p.t1_b, p.dephasing, "t2r_b")?;
        push(&mut out, r, lift_transmon(&transmon::sigma_z(), n), "transmon_dephasing");
    }
    Ok(out)
}

/// The same channels for the four-level effective model. Photon loss is
/// replaced by `a` compressed onto the cat subspace.
pub fn build_effective_dissipators(
    p: &SystemParams,
    frame: &CatFrame,
) -> Result<Vec<Dissipator>> {
    p.validate()?;
    frame.check_matches(p.alpha, p.n_fock)?;
    let basis = cat_qubit::fock_basis(frame)?;
    let id2 = Operator::identity(2);
    let mut out = Vec::with_capacity(4);
    if p.t1_a.is_finite() {
        let a = annihilation(p.n_fock)?.project_onto(&basis)?;
        push(&mut out, p.t1_a.rate(), kron(&a, &id2), "kcq_loss");
    }
    if p.t2r_a.is_finite() {
        let r = dephasing_rate(p.t2r_a, p.t1_a, p.dephasing, "t2r_a")?;
        push(&mut out, r, kron(&cat_qubit::sigma_z(), &id2), "kcq_dephasing");
    }
    let id = Operator::identity(2);
    if p.t1_b.is_finite() {
        push(&mut out, p.t1_b.rate(), kron(&id, &transmon::sigma_minus()), "transmon_decay");
    }
    if p.t2r_b.is_finite() {
        let r = dephasing_rate(p.t2r_b, p.t1_b, p.dephasing, "t2r_b")?;
        push(&mut out, r, kron(&id, &transmon::sigma_z()), "transmon_dephasing");
    }
    Ok(out)
}
