//! Physics invariants shared by the property tests and the acceptance run.
//! Each check returns a one-line summary of what it measured, or the
//! violation.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};

use kerrcat::catspace::CatFrame;
use kerrcat::lindblad::{evolve, validate_state, IntegratorConfig, Observable};
use kerrcat::model::{
    build_kcq_hamiltonian, lift_transmon, transmon, MasterEquation, PulseSchedule, SystemParams,
};
use kerrcat::qops::{hermitian_eigenvalues, DensityMatrix, Operator};

pub type Check = Result<String, String>;

pub fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Dissipative drive at the default amplitude, phase π/2.
pub fn table1_params() -> SystemParams {
    SystemParams {
        phi: FRAC_PI_2,
        ..Default::default()
    }
}

fn initial(frame: &CatFrame) -> DensityMatrix {
    frame
        .cat_plus()
        .kron(&transmon::plus_x())
        .to_density()
        .unwrap()
}

fn transmon_observables(n: usize) -> Vec<Observable> {
    vec![
        Observable::new("x_t", lift_transmon(&transmon::sigma_x(), n)),
        Observable::new("y_t", lift_transmon(&transmon::sigma_y(), n)),
        Observable::new("z_t", lift_transmon(&transmon::sigma_z(), n)),
    ]
}

/// Trace, Hermiticity and positivity of the final state of a 10 µs run,
/// and purity at every snapshot along the way.
pub fn state_validity_after_long_run() -> Check {
    let p = table1_params();
    let frame = CatFrame::new(p.alpha, p.n_fock).unwrap();
    let me = MasterEquation::full(&p, &frame, PulseSchedule::rectangular(10.0).unwrap()).unwrap();
    let mut cfg = IntegratorConfig::with_dt(1e-3).stride(250);
    cfg.snapshot_stride = Some(1);
    let ts = evolve(&me, &initial(&frame), &[], &cfg).map_err(|e| e.to_string())?;
    let d = validate_state(&ts.final_state);
    let max_purity = ts
        .snapshots
        .iter()
        .map(|(_, op)| DensityMatrix::new_unchecked(op.clone()).purity())
        .fold(0.0, f64::max);
    let msg = format!(
        "trace err {:.1e}, hermiticity {:.1e}, min eig {:.1e}, max purity {:.12}",
        d.trace_error, d.hermiticity_error, d.min_eigenvalue, max_purity
    );
    ensure(
        d.trace_error < 1e-8
            && d.hermiticity_error < 1e-10
            && d.min_eigenvalue >= -1e-7
            && max_purity <= 1.0 + 1e-8,
        msg,
    )
}

/// Halving the step changes every reported transmon trace point by less
/// than 1e-6 over the 10 µs dissipative scenario.
pub fn step_halving() -> Check {
    let p = table1_params();
    let frame = CatFrame::new(p.alpha, p.n_fock).unwrap();
    let me = MasterEquation::full(&p, &frame, PulseSchedule::rectangular(10.0).unwrap()).unwrap();
    let obs = transmon_observables(p.n_fock);
    let times: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64).collect();
    let run = |dt: f64| {
        evolve(
            &me,
            &initial(&frame),
            &obs,
            &IntegratorConfig::with_dt(dt).sampled_at(times.clone()),
        )
    };
    let a = run(1e-3).map_err(|e| e.to_string())?;
    let b = run(5e-4).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for o in &obs {
        for (x, y) in a.trace(&o.name).unwrap().iter().zip(b.trace(&o.name).unwrap()) {
            worst = worst.max((x - y).abs());
        }
    }
    ensure(worst < 1e-6, format!("max change {worst:.2e}"))
}

/// Closed system with a time-independent Hamiltonian conserves energy.
pub fn energy_conservation() -> Check {
    let p = SystemParams {
        phi: 0.4,
        ..Default::default()
    }
    .closed();
    let frame = CatFrame::new(p.alpha, p.n_fock).unwrap();
    let me = MasterEquation::full(&p, &frame, PulseSchedule::rectangular(10.0).unwrap()).unwrap();
    let h = me.hamiltonian_at(0.0).unwrap();
    let same = me.hamiltonian_at(7.3).unwrap().max_abs_diff(&h).unwrap();
    if same != 0.0 {
        return Err(format!("Hamiltonian is time dependent ({same:.1e})"));
    }
    let obs = [Observable::new("h", h)];
    let cfg = IntegratorConfig::with_dt(1e-3).stride(100);
    let ts = evolve(&me, &initial(&frame), &obs, &cfg).map_err(|e| e.to_string())?;
    let e = ts.trace("h").unwrap();
    let scale = e[0].abs().max(1.0);
    let drift = e.iter().map(|v| (v - e[0]).abs()).fold(0.0, f64::max) / scale;
    ensure(drift < 1e-7, format!("relative energy drift {drift:.2e}"))
}

/// Evolving an equal mixture equals mixing the evolved states.
pub fn linearity(n_fock: usize, phi: f64, t_end: f64) -> Check {
    let p = SystemParams {
        n_fock,
        alpha: 1.0,
        phi,
        ..Default::default()
    };
    let frame = CatFrame::new(p.alpha, p.n_fock).unwrap();
    let me = MasterEquation::full(&p, &frame, PulseSchedule::rectangular(t_end).unwrap()).unwrap();
    let r1 = frame.cat_plus().kron(&transmon::plus_z()).to_density().unwrap();
    let r2 = frame.cat_minus().kron(&transmon::plus_x()).to_density().unwrap();
    let mix = DensityMatrix::mixture(&[(0.5, &r1), (0.5, &r2)]).unwrap();
    let cfg = IntegratorConfig::with_dt(t_end / 400.0);
    let end = |r: &DensityMatrix| evolve(&me, r, &[], &cfg).unwrap().final_state;
    let (a, b, m) = (end(&r1), end(&r2), end(&mix));
    let avg = a
        .as_operator()
        .add(b.as_operator())
        .unwrap()
        .scale_real(0.5);
    let err = m.as_operator().max_abs_diff(&avg).unwrap();
    ensure(err < 1e-8, format!("max deviation {err:.2e}"))
}

/// Cat Pauli operators anticommute, square to the cat projector, and the
/// projector is idempotent with trace 2.
pub fn cat_pauli_algebra(alpha: f64, n_fock: usize) -> Check {
    let f = CatFrame::new(alpha, n_fock).map_err(|e| e.to_string())?;
    let ops = [f.sigma_x(), f.sigma_y(), f.sigma_z()];
    let proj = f.projector();
    let mut worst = 0.0f64;
    for (i, a) in ops.iter().enumerate() {
        worst = worst.max(a.matmul(a).unwrap().max_abs_diff(proj).unwrap());
        for b in &ops[i + 1..] {
            worst = worst.max(a.anticommutator(b).unwrap().norm());
        }
    }
    let idem = proj.matmul(proj).unwrap().max_abs_diff(proj).unwrap();
    let tr = (proj.trace().re - 2.0).abs();
    let overlap = f.cat_plus().inner(f.cat_minus()).unwrap().norm();
    ensure(
        worst < 1e-9 && idem < 1e-9 && tr < 1e-8 && overlap < 1e-14,
        format!("alpha {alpha}: algebra {worst:.1e}, idempotence {idem:.1e}, trace {tr:.1e}, overlap {overlap:.1e}"),
    )
}

/// The two highest Kerr-cat levels sit at eps2^2/K and are degenerate.
pub fn manifold_degeneracy(alpha: f64) -> Check {
    let p = SystemParams {
        alpha,
        ..Default::default()
    };
    let h = build_kcq_hamiltonian(&p).unwrap().scale_real(1.0 / TAU);
    let ev = hermitian_eigenvalues(&h).map_err(|e| e.to_string())?;
    let mut ev = ev;
    ev.sort_by(|a, b| b.total_cmp(a));
    let want = p.eps2() * p.eps2() / p.k_a;
    let split = (ev[0] - ev[1]).abs();
    let offset = (ev[0] - want).abs();
    ensure(
        split < 1e-6 && offset < 1e-6 * want.max(1.0),
        format!("alpha {alpha}: level {:.9} MHz vs {want:.9}, split {split:.1e} MHz", ev[0]),
    )
}

/// Every Hamiltonian evaluation along a detuned, ramped pulse is Hermitian.
pub fn hamiltonian_hermiticity(phi: f64, delta: f64, t: f64) -> Check {
    let p = SystemParams {
        n_fock: 14,
        phi,
        delta,
        chi_ab: 0.01,
        ..Default::default()
    };
    let frame = CatFrame::new(p.alpha, p.n_fock).unwrap();
    let me =
        MasterEquation::full(&p, &frame, PulseSchedule::sine_squared(4.0, 0.5).unwrap()).unwrap();
    let h: Operator = me.hamiltonian_at(t).map_err(|e| e.to_string())?;
    let dev = h.hermiticity_error();
    ensure(dev < 1e-12, format!("hermiticity {dev:.1e}"))
}
