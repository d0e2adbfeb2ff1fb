use std::sync::atomic::{AtomicUsize, Ordering};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catspace::CatFrame;
use crate::error::{Error, Result};
use crate::lindblad::{evolve, IntegratorConfig, Observable, Sampling};
use crate::model::{
    cat_qubit, lift_kcq, lift_transmon, transmon, MasterEquation, PulseSchedule, SystemParams,
    PARAM_NAMES,
};
use crate::qops::{kron, DensityMatrix, Operator, StateVector};

/// Starting point of the Kerr-cat qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KcqInit {
    /// Even cat `|C+>`, the +1 eigenstate of the cat X operator.
    #[default]
    CatPlus,
    /// +1 eigenstate of the cat Z operator, `(|C+> + |C->)/sqrt(2)`.
    PlusZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransmonInit {
    #[default]
    PlusX,
    /// Excited state.
    PlusZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    pub kcq: KcqInit,
    pub transmon: TransmonInit,
}

impl InitialState {
    pub fn new(kcq: KcqInit, transmon: TransmonInit) -> Self {
        Self { kcq, transmon }
    }
}

/// Pauli observables recorded by the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    XKc,
    YKc,
    ZKc,
    XT,
    YT,
    ZT,
}

impl ObservableKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::XKc => "x_kc",
            Self::YKc => "y_kc",
            Self::ZKc => "z_kc",
            Self::XT => "x_t",
            Self::YT => "y_t",
            Self::ZT => "z_t",
        }
    }

    fn full_operator(self, frame: &CatFrame) -> Operator {
        let n = frame.n_fock();
        match self {
            Self::XKc => lift_kcq(frame.sigma_x()),
            Self::YKc => lift_kcq(frame.sigma_y()),
            Self::ZKc => lift_kcq(frame.sigma_z()),
            Self::XT => lift_transmon(&transmon::sigma_x(), n),
            Self::YT => lift_transmon(&transmon::sigma_y(), n),
            Self::ZT => lift_transmon(&transmon::sigma_z(), n),
        }
    }

    fn effective_operator(self) -> Operator {
        let i2 = Operator::identity(2);
        match self {
            Self::XKc => kron(&cat_qubit::sigma_x(), &i2),
            Self::YKc => kron(&cat_qubit::sigma_y(), &i2),
            Self::ZKc => kron(&cat_qubit::sigma_z(), &i2),
            Self::XT => kron(&i2, &transmon::sigma_x()),
            Self::YT => kron(&i2, &transmon::sigma_y()),
            Self::ZT => kron(&i2, &transmon::sigma_z()),
        }
    }
}

/// Which Hamiltonian a sweep integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Truncated Kerr oscillator times transmon, dimension `2N`.
    #[default]
    Full,
    /// Four-level projected model.
    Effective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

/// One parameter axis crossed with an interaction-time axis.
///
/// For a rectangular pulse (`base.ramp == 0`) a single run per axis value
/// is sampled at every interaction time. With a ramp, each interaction time
/// is its own pulse and only the final state is recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: SystemParams,
    pub axis: Axis,
    /// Interaction times (µs), strictly increasing and non-negative.
    pub times: Vec<f64>,
    #[serde(default)]
    pub initial: InitialState,
    pub observables: Vec<ObservableKind>,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: String| {
            Err(Error::InvalidParameter {
                name: name.into(),
                reason,
            })
        };
        if !PARAM_NAMES.contains(&self.axis.name.as_str()) {
            return Err(Error::UnknownParameter(self.axis.name.clone()));
        }
        if self.axis.values.is_empty() {
            return bad("axis", "grid is empty".into());
        }
        if let Some(v) = self.axis.values.iter().find(|v| !v.is_finite()) {
            return bad("axis", format!("non-finite grid value {v}"));
        }
        if self.times.is_empty() {
            return bad("times", "grid is empty".into());
        }
        if self.times.iter().any(|t| !t.is_finite() || *t < 0.0)
            || self.times.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("times", "must be finite, non-negative and strictly increasing".into());
        }
        if self.times.last() == Some(&0.0) {
            return bad("times", "need at least one positive time".into());
        }
        if self.observables.is_empty() {
            return bad("observables", "list is empty".into());
        }
        for &v in &self.axis.values {
            self.base.with(&self.axis.name, v)?.validate()?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of this sweep.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("spec serialises");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub params_hash: String,
    pub dt: f64,
    pub code_version: String,
}

/// Observable maps over (axis value, interaction time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapResult {
    pub axis: Axis,
    pub times: Vec<f64>,
    /// One `axis.len() x times.len()` array per observable, row-major by axis.
    pub maps: IndexMap<String, Vec<Vec<f64>>>,
    pub metadata: RunMetadata,
}

impl MapResult {
    pub fn map(&self, name: &str) -> Option<&[Vec<f64>]> {
        self.maps.get(name).map(Vec::as_slice)
    }

    /// Row of `name` at axis index `row`.
    pub fn row(&self, name: &str, row: usize) -> Option<&[f64]> {
        self.maps.get(name)?.get(row).map(Vec::as_slice)
    }

    /// Largest pointwise difference over the observables both maps share.
    pub fn max_deviation(&self, other: &MapResult) -> Result<f64> {
        if self.times != other.times || self.axis.values != other.axis.values {
            return Err(Error::InvalidParameter {
                name: "map".into(),
                reason: "grids differ".into(),
            });
        }
        let mut worst: f64 = 0.0;
        for (name, a) in &self.maps {
            let Some(b) = other.maps.get(name) else { continue };
            for (ra, rb) in a.iter().zip(b) {
                for (x, y) in ra.iter().zip(rb) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        Ok(worst)
    }

    pub fn check_shapes(&self) -> bool {
        self.maps.values().all(|m| {
            m.len() == self.axis.values.len() && m.iter().all(|r| r.len() == self.times.len())
        })
    }
}

pub(crate) fn schedule_for(p: &SystemParams, t_int: f64) -> Result<PulseSchedule> {
    if p.ramp == 0.0 {
        PulseSchedule::rectangular(t_int)
    } else {
        PulseSchedule::sine_squared(t_int, p.ramp)
    }
}

/// Initial density matrix and observables for one parameter point.
pub(crate) struct Setup {
    pub rho0: DensityMatrix,
    pub observables: Vec<Observable>,
    pub frame: CatFrame,
}

pub(crate) fn setup(
    p: &SystemParams,
    model: ModelKind,
    init: InitialState,
    kinds: &[ObservableKind],
) -> Result<Setup> {
    let frame = CatFrame::new(p.alpha, p.n_fock)?;
    let t = match init.transmon {
        TransmonInit::PlusX => transmon::plus_x(),
        TransmonInit::PlusZ => transmon::plus_z(),
    };
    let k: StateVector = match (model, init.kcq) {
        (ModelKind::Full, KcqInit::CatPlus) => frame.cat_plus().clone(),
        (ModelKind::Full, KcqInit::PlusZ) => frame.z_eigenstates()?.0,
        (ModelKind::Effective, KcqInit::CatPlus) => cat_qubit::cat_plus(),
        (ModelKind::Effective, KcqInit::PlusZ) => cat_qubit::plus_z(),
    };
    let observables = kinds
        .iter()
        .map(|&o| {
            let op = match model {
                ModelKind::Full => o.full_operator(&frame),
                ModelKind::Effective => o.effective_operator(),
            };
            Observable::new(o.name(), op)
        })
        .collect();
    Ok(Setup {
        rho0: k.kron(&t).to_density()?,
        observables,
        frame,
    })
}

pub(crate) fn master_equation(
    p: &SystemParams,
    model: ModelKind,
    frame: &CatFrame,
    schedule: PulseSchedule,
) -> Result<MasterEquation> {
    match model {
        ModelKind::Full => MasterEquation::full(p, frame, schedule),
        ModelKind::Effective => MasterEquation::effective(p, frame, schedule, true),
    }
}

/// Observable values at `times` for one parameter point, one trace per
/// entry of `kinds`.
///
/// With a rectangular pulse one run is sampled at every time. With a ramp,
/// each time is the flat-top length of its own pulse, which lasts
/// `t + 2 * ramp`; the value is read at the end of that pulse.
pub fn run_point(
    p: &SystemParams,
    model: ModelKind,
    init: InitialState,
    kinds: &[ObservableKind],
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Vec<f64>>> {
    if p.ramp == 0.0 {
        return run_pulse(p, model, init, kinds, times, cfg);
    }
    if times.is_empty() {
        return Err(empty_times());
    }
    let s = setup(p, model, init, kinds)?;
    let mut out = vec![Vec::with_capacity(times.len()); kinds.len()];
    for &t in times {
        let t_end = t + 2.0 * p.ramp;
        let me = master_equation(p, model, &s.frame, schedule_for(p, t_end)?)?;
        let cfg = IntegratorConfig {
            t_end: Some(t_end),
            sampling: Sampling::Times(vec![t_end]),
            ..cfg.clone()
        };
        let ts = evolve(&me, &s.rho0, &s.observables, &cfg)?;
        for (o, k) in out.iter_mut().zip(kinds) {
            o.push(ts.trace(k.name()).expect("recorded")[0]);
        }
    }
    Ok(out)
}

fn empty_times() -> Error {
    Error::InvalidParameter {
        name: "times".into(),
        reason: "grid is empty".into(),
    }
}

/// One pulse ending at the last of `times`, sampled at every time.
pub(crate) fn run_pulse(
    p: &SystemParams,
    model: ModelKind,
    init: InitialState,
    kinds: &[ObservableKind],
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Vec<f64>>> {
    let Some(&t_end) = times.last() else {
        return Err(empty_times());
    };
    let s = setup(p, model, init, kinds)?;
    let me = master_equation(p, model, &s.frame, schedule_for(p, t_end)?)?;
    let cfg = IntegratorConfig {
        t_end: Some(t_end),
        sampling: Sampling::Times(times.to_vec()),
        ..cfg.clone()
    };
    let ts = evolve(&me, &s.rho0, &s.observables, &cfg)?;
    Ok(kinds
        .iter()
        .map(|k| ts.trace(k.name()).expect("recorded").to_vec())
        .collect())
}

/// Runs every axis value of `spec`, in parallel on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<MapResult> {
    run_sweep_with_progress(spec, &|_, _| {})
}

/// As [`run_sweep`], calling `progress(done, total)` as cells complete.
pub fn run_sweep_with_progress(
    spec: &SweepSpec,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<MapResult> {
    spec.validate()?;
    let total = spec.axis.values.len();
    let done = AtomicUsize::new(0);
    let rows: Vec<Vec<Vec<f64>>> = spec
        .axis
        .values
        .par_iter()
        .map(|&v| {
            let p = spec.base.with(&spec.axis.name, v)?;
            let r = run_point(
                &p,
                spec.model,
                spec.initial,
                &spec.observables,
                &spec.times,
                &spec.integrator,
            );
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            r
        })
        .collect::<Result<_>>()?;
    let mut maps = IndexMap::new();
    for (k, kind) in spec.observables.iter().enumerate() {
        maps.insert(
            kind.name().to_string(),
            rows.iter().map(|r| r[k].clone()).collect(),
        );
    }
    Ok(MapResult {
        axis: spec.axis.clone(),
        times: spec.times.clone(),
        maps,
        metadata: metadata(spec),
    })
}

pub(crate) fn metadata(spec: &SweepSpec) -> RunMetadata {
    RunMetadata {
        params_hash: spec.hash(),
        dt: spec.integrator.dt,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}
