use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MasterEquation;
use crate::qops::{expect_op, DensityMatrix, Operator};
use crate::tolerances::Tolerances;

use super::diagnostics::{validate_state_with, StateDiagnostics};
use super::rhs::Generator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fixed-step fourth-order scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// RK4 in the interaction picture of the large part of the static
    /// diagonal. Kerr energies of high Fock levels (up to ~2π·K·N² rad/µs)
    /// are propagated exactly, so the step size is set by the populated
    /// levels and the off-diagonal dynamics.
    #[default]
    Rk4InteractionPicture,
    /// Classical RK4 on the full generator.
    Rk4,
}

/// Which instants are reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Every `n`-th step, always including `t = 0` and the final time.
    Stride(usize),
    /// Explicit, strictly increasing times in `[0, t_end]`. Steps are
    /// shortened where needed to land on them exactly.
    Times(Vec<f64>),
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Stride(10)
    }
}

const SPLIT_PHASE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Step size (µs).
    pub dt: f64,
    /// End time (µs); defaults to the schedule's interaction time.
    pub t_end: Option<f64>,
    pub sampling: Sampling,
    /// Store the density matrix at every `k`-th sample.
    pub snapshot_stride: Option<usize>,
    /// Rescale the trace to 1 after every step.
    pub renormalize: bool,
    pub scheme: Scheme,
    /// Interaction-picture split: diagonal energies up to this phase per
    /// step (radians) stay in the lab frame; the excess is propagated exactly.
    pub split_phase: f64,
    pub tolerances: Tolerances,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: None,
            sampling: Sampling::default(),
            snapshot_stride: None,
            renormalize: false,
            scheme: Scheme::default(),
            split_phase: SPLIT_PHASE,
            tolerances: Tolerances::default(),
        }
    }
}

impl IntegratorConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Default::default()
        }
    }

    pub fn sampled_at(mut self, times: Vec<f64>) -> Self {
        self.sampling = Sampling::Times(times);
        self
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.sampling = Sampling::Stride(stride);
        self
    }

    /// Checks `dt > 0` and `dt <= t_end / 100`.
    pub fn validate(&self, t_end: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt".into(),
                reason: format!("step must be positive, got {}", self.dt),
            });
        }
        if self.dt > t_end / 100.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter {
                name: "dt".into(),
                reason: format!(
                    "step {} exceeds 1/100 of the run length {t_end}",
                    self.dt
                ),
            });
        }
        match &self.sampling {
            Sampling::Stride(0) => {
                return Err(Error::InvalidParameter {
                    name: "sampling".into(),
                    reason: "stride must be at least 1".into(),
                })
            }
            Sampling::Times(ts) => {
                if ts.is_empty() {
                    return Err(Error::InvalidParameter {
                        name: "sampling".into(),
                        reason: "no sample times".into(),
                    });
                }
                let mut prev = -f64::INFINITY;
                for &t in ts {
                    if !(t.is_finite() && t > prev && t >= 0.0 && t <= t_end * (1.0 + 1e-12)) {
                        return Err(Error::InvalidParameter {
                            name: "sampling".into(),
                            reason: format!(
                                "sample times must increase strictly within [0, {t_end}], got {t}"
                            ),
                        });
                    }
                    prev = t;
                }
            }
            Sampling::Stride(_) => {}
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::InvalidParameter {
                name: "snapshot_stride".into(),
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub steps: usize,
    /// Largest `|Tr rho - 1|` seen at any step.
    pub max_trace_drift: f64,
    /// Largest imaginary part of a reported expectation value.
    pub max_expectation_imag: f64,
    pub final_state: Option<StateDiagnostics>,
    pub warnings: Vec<String>,
}

/// Sampled expectation values of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub traces: IndexMap<String, Vec<f64>>,
    pub snapshots: Vec<(f64, Operator)>,
    pub final_state: DensityMatrix,
    pub diagnostics: RunDiagnostics,
}

impl TimeSeries {
    pub fn trace(&self, name: &str) -> Option<&[f64]> {
        self.traces.get(name).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Named Hermitian observable.
#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    pub op: Operator,
}

impl Observable {
    pub fn new(name: impl Into<String>, op: Operator) -> Self {
        Self {
            name: name.into(),
            op,
        }
    }
}

struct Stepper {
    gen: Generator,
    scheme: Scheme,
    n: usize,
    k: Vec<Complex64>,
    acc: Vec<Complex64>,
    stage: Vec<Complex64>,
    phase_h: f64,
    phase: Vec<Complex64>,
}

impl Stepper {
    fn new(me: &MasterEquation, scheme: Scheme, split_limit: f64) -> Result<Self> {
        let limit = (scheme == Scheme::Rk4InteractionPicture).then_some(split_limit);
        let gen = Generator::new(me, limit)?;
        let n = gen.dim();
        Ok(Self {
            gen,
            scheme,
            n,
            k: vec![ZERO; n * n],
            acc: vec![ZERO; n * n],
            stage: vec![ZERO; n * n],
            phase_h: f64::NAN,
            phase: vec![ZERO; n * n],
        })
    }

    /// `exp(-i (d_m - d_n) h / 2)` for the split diagonal.
    fn prepare_phase(&mut self, h: f64) {
        // Grid steps differ from dt only by rounding; reuse the table.
        if (self.phase_h - h).abs() <= 1e-14 * h {
            return;
        }
        let d = self.gen.split_diagonal();
        let n = self.n;
        for m in 0..n {
            for k in 0..n {
                self.phase[m * n + k] = Complex64::from_polar(1.0, -(d[m] - d[k]) * h / 2.0);
            }
        }
        self.phase_h = h;
    }

    fn step(&mut self, t: f64, h: f64, rho: &mut [Complex64]) {
        match self.scheme {
            Scheme::Rk4 => self.step_rk4(t, h, rho),
            Scheme::Rk4InteractionPicture => self.step_rk4ip(t, h, rho),
        }
    }

    fn step_rk4(&mut self, t: f64, h: f64, rho: &mut [Complex64]) {
        let Self {
            gen,
            k,
            acc,
            stage,
            ..
        } = self;
        gen.apply(t, rho, k);
        for ((a, s), (&r, &kk)) in acc.iter_mut().zip(stage.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *a = r + kk * (h / 6.0);
            *s = r + kk * (h / 2.0);
        }
        gen.apply(t + h / 2.0, stage, k);
        for ((a, s), (&r, &kk)) in acc.iter_mut().zip(stage.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *a += kk * (h / 3.0);
            *s = r + kk * (h / 2.0);
        }
        gen.apply(t + h / 2.0, stage, k);
        for ((a, s), (&r, &kk)) in acc.iter_mut().zip(stage.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *a += kk * (h / 3.0);
            *s = r + kk * h;
        }
        gen.apply(t + h, stage, k);
        for ((r, &a), &kk) in rho.iter_mut().zip(acc.iter()).zip(k.iter()) {
            *r = a + kk * (h / 6.0);
        }
    }

    fn step_rk4ip(&mut self, t: f64, h: f64, rho: &mut [Complex64]) {
        self.prepare_phase(h);
        let Self {
            gen,
            k,
            acc,
            stage,
            phase,
            ..
        } = self;
        // k1 = E (h N(t, rho)); rho_I = E rho
        gen.apply_split(t, rho, k);
        for (((kk, r), p), (a, s)) in k
            .iter_mut()
            .zip(rho.iter_mut())
            .zip(phase.iter())
            .zip(acc.iter_mut().zip(stage.iter_mut()))
        {
            *kk = *p * (*kk * h);
            *r *= *p;
            *a = *r + *kk / 6.0;
            *s = *r + *kk / 2.0;
        }
        // k2 = h N(t + h/2, rho_I + k1/2)
        gen.apply_split(t + h / 2.0, stage, k);
        for ((a, s), (&r, &kk)) in acc.iter_mut().zip(stage.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *a += kk * (h / 3.0);
            *s = r + kk * (h / 2.0);
        }
        // k3 = h N(t + h/2, rho_I + k2/2)
        gen.apply_split(t + h / 2.0, stage, k);
        for (((a, s), (&r, &kk)), p) in acc
            .iter_mut()
            .zip(stage.iter_mut())
            .zip(rho.iter().zip(k.iter()))
            .zip(phase.iter())
        {
            *a += kk * (h / 3.0);
            *s = *p * (r + kk * h);
        }
        // k4 = h N(t + h, E(rho_I + k3))
        gen.apply_split(t + h, stage, k);
        for (((r, &a), &kk), p) in rho.iter_mut().zip(acc.iter()).zip(k.iter()).zip(phase.iter()) {
            *r = *p * a + kk * h / 6.0;
        }
    }
}

fn trace_of(n: usize, rho: &[Complex64]) -> Complex64 {
    (0..n).map(|i| rho[i * n + i]).sum()
}

/// Integrates the master equation from `rho0` and records the observables.
///
/// Aborts on non-finite entries or when the trace drifts by more than the
/// abort tolerance; the error carries a suggested smaller step.
pub fn evolve(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    observables: &[Observable],
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    let n = me.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim(),
        });
    }
    let tol = &cfg.tolerances;
    for o in observables {
        if o.op.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: o.op.dim(),
            });
        }
        let dev = o.op.hermiticity_error();
        if dev > tol.eigen_input {
            return Err(Error::NonHermitian { deviation: dev });
        }
    }
    let t_end = cfg.t_end.unwrap_or(me.schedule.t_int);
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end".into(),
            reason: format!("must be positive, got {t_end}"),
        });
    }
    if t_end > me.schedule.t_int * (1.0 + 1e-12) {
        return Err(Error::TimeOutOfRange {
            t: t_end,
            t_end: me.schedule.t_int,
        });
    }
    cfg.validate(t_end)?;

    let mut stepper = Stepper::new(me, cfg.scheme, cfg.split_phase / cfg.dt)?;
    let mut rho: Vec<Complex64> = rho0.as_operator().as_slice().to_vec();

    let mut times = Vec::new();
    let mut traces: IndexMap<String, Vec<f64>> = observables
        .iter()
        .map(|o| (o.name.clone(), Vec::new()))
        .collect();
    let mut snapshots = Vec::new();
    let mut diag = RunDiagnostics::default();

    let dt = cfg.dt;
    let mut record = |t: f64,
                      rho: &[Complex64],
                      times: &mut Vec<f64>,
                      diag: &mut RunDiagnostics|
     -> Result<()> {
        let op = Operator::from_raw_unchecked(n, rho.to_vec());
        for o in observables {
            let v = expect_op(&o.op, &op)?;
            diag.max_expectation_imag = diag.max_expectation_imag.max(v.im.abs());
            traces.get_mut(&o.name).expect("observable registered").push(v.re);
        }
        if let Some(stride) = cfg.snapshot_stride {
            if times.len() % stride == 0 {
                snapshots.push((t, op));
            }
        }
        times.push(t);
        Ok(())
    };

    // Every instant the stepper lands on: the step grid k*dt, the end
    // time and any requested sample times, each tagged with what to record.
    let end_eps = 1e-9 * dt;
    let grid_steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let mut stops: Vec<(f64, Option<usize>, bool)> = (1..=grid_steps)
        .map(|k| ((k as f64 * dt).min(t_end), Some(k), false))
        .collect();
    if let Some(last) = stops.last_mut() {
        last.0 = t_end;
    }
    let stride = match &cfg.sampling {
        Sampling::Stride(s) => Some(*s),
        Sampling::Times(ts) => {
            for &ts in ts {
                match stops.binary_search_by(|s| s.0.total_cmp(&ts)) {
                    Ok(i) => stops[i].2 = true,
                    Err(i) => {
                        let near_prev = i > 0 && (stops[i - 1].0 - ts).abs() <= end_eps;
                        let near_next = i < stops.len() && (stops[i].0 - ts).abs() <= end_eps;
                        if near_prev {
                            stops[i - 1].2 = true;
                        } else if near_next {
                            stops[i].2 = true;
                        } else if ts.abs() > end_eps {
                            stops.insert(i, (ts, None, true));
                        }
                    }
                }
            }
            None
        }
    };
    let record_initial = match &cfg.sampling {
        Sampling::Stride(_) => true,
        Sampling::Times(ts) => ts[0].abs() <= end_eps,
    };
    if record_initial {
        record(0.0, &rho, &mut times, &mut diag)?;
    }

    let mut t = 0.0;
    let last = stops.len() - 1;
    for (idx, &(t_next, grid_k, wanted)) in stops.iter().enumerate() {
        let h = t_next - t;
        stepper.step(t, h, &mut rho);
        t = t_next;
        let step = idx + 1;

        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::IntegratorAbort {
                step,
                time: t,
                reason: "non-finite density-matrix entry".into(),
                suggested_dt: dt / 2.0,
            });
        }
        let tr = trace_of(n, &rho);
        let drift = (tr - Complex64::new(1.0, 0.0)).norm();
        diag.max_trace_drift = diag.max_trace_drift.max(drift);
        if drift > tol.trace_drift_abort {
            return Err(Error::IntegratorAbort {
                step,
                time: t,
                reason: format!("trace drifted to {tr:.6e}"),
                suggested_dt: dt / 2.0,
            });
        }
        if cfg.renormalize {
            let s = 1.0 / tr.re;
            rho.iter_mut().for_each(|z| *z *= s);
        }

        let take = match stride {
            Some(s) => grid_k.is_some_and(|k| k % s == 0) || idx == last,
            None => wanted,
        };
        if take {
            record(t, &rho, &mut times, &mut diag)?;
        }
    }
    diag.steps = stops.len();

    if diag.max_trace_drift > tol.trace_drift_warn {
        diag.warnings.push(format!(
            "trace drift {:.3e} exceeds {:.1e}; consider a smaller dt",
            diag.max_trace_drift, tol.trace_drift_warn
        ));
    }
    if diag.max_expectation_imag > tol.expectation_imag {
        diag.warnings.push(format!(
            "expectation values carry imaginary parts up to {:.3e}",
            diag.max_expectation_imag
        ));
    }
    let final_op = Operator::from_raw_unchecked(n, rho);
    let final_state = DensityMatrix::new_unchecked(final_op);
    diag.final_state = Some(validate_state_with(&final_state, tol));

    Ok(TimeSeries {
        times,
        traces,
        snapshots,
        final_state,
        diagnostics: diag,
    })
}
