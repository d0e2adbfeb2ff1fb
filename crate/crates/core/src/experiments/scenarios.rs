use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::{
    run_pulse, run_sweep, Axis, InitialState, KcqInit, MapResult, ModelKind, ObservableKind,
    SweepSpec, TransmonInit,
};
use crate::error::{Error, Result};
use crate::lindblad::IntegratorConfig;
use crate::model::SystemParams;

impl SweepSpec {
    /// Drive phase against interaction time, starting from `|C+>|+X>` and
    /// recording the cat Y and transmon X expectations.
    pub fn phase_time(base: SystemParams, phis: Vec<f64>, times: Vec<f64>) -> Self {
        Self {
            base,
            axis: Axis::new("phi", phis),
            times,
            initial: InitialState::new(KcqInit::CatPlus, TransmonInit::PlusX),
            observables: vec![ObservableKind::YKc, ObservableKind::XT],
            model: ModelKind::Full,
            integrator: IntegratorConfig::default(),
        }
    }

    /// Drive amplitude against interaction time, starting from `|C+>|+Z>`
    /// and recording the transmon Z expectation.
    pub fn amplitude(base: SystemParams, xis: Vec<f64>, times: Vec<f64>) -> Self {
        Self {
            base,
            axis: Axis::new("xi", xis),
            times,
            initial: InitialState::new(KcqInit::CatPlus, TransmonInit::PlusZ),
            observables: vec![ObservableKind::ZT],
            model: ModelKind::Full,
            integrator: IntegratorConfig::default(),
        }
    }
}

fn require_axis(spec: &SweepSpec, name: &str) -> Result<()> {
    if spec.axis.name != name {
        return Err(Error::InvalidParameter {
            name: "axis".into(),
            reason: format!("expected a '{name}' axis, got '{}'", spec.axis.name),
        });
    }
    Ok(())
}

/// Phase-by-time maps of the beam-splitter interaction.
pub fn run_phase_time_map(spec: &SweepSpec) -> Result<MapResult> {
    require_axis(spec, "phi")?;
    let slack = 1e-12;
    if let Some(v) = spec.axis.values.iter().find(|v| v.abs() > PI + slack) {
        return Err(Error::InvalidParameter {
            name: "phi".into(),
            reason: format!("{v} lies outside [-pi, pi]"),
        });
    }
    run_sweep(spec)
}

/// Drive-amplitude-by-time maps of the transmon Z oscillation.
pub fn run_amplitude_sweep(spec: &SweepSpec) -> Result<MapResult> {
    require_axis(spec, "xi")?;
    if let Some(v) = spec.axis.values.iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidParameter {
            name: "xi".into(),
            reason: format!("amplitude {v} is negative"),
        });
    }
    run_sweep(spec)
}

/// Tracked zero crossing of the cat Y map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    /// Phase the contour was seeded from (degrees).
    pub start_deg: f64,
    /// `(time µs, crossing phase degrees)` for each usable time column.
    pub points: Vec<(f64, f64)>,
    /// Least-squares drift of the crossing phase (degrees per µs).
    pub slope_deg_per_us: f64,
    pub intercept_deg: f64,
    /// Largest distance of any crossing from `start_deg`.
    pub max_offset_deg: f64,
}

/// Drift of the `<Y_kc> = 0` contours through a phase-time map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewStatistic {
    /// Mean of the contour slopes (degrees per µs).
    pub skew_deg_per_us: f64,
    pub contours: Vec<Contour>,
}

/// Columns whose signal is weaker than this fraction of the map maximum
/// carry no usable crossing.
const USABLE_FRACTION: f64 = 0.25;

fn column_crossings(phis: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..phis.len() - 1 {
        let (y0, y1) = (ys[i], ys[i + 1]);
        if y0 == 0.0 {
            out.push(phis[i]);
        } else if y0 * y1 < 0.0 {
            out.push(phis[i] - y0 * (phis[i + 1] - phis[i]) / (y1 - y0));
        }
    }
    if ys.last() == Some(&0.0) {
        out.push(*phis.last().unwrap());
    }
    out
}

fn line_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Tracks the zero crossings of `map` (observable `name`, phase axis in
/// radians) that start near +90° and -90° and fits their drift.
pub fn skew_statistic(map: &MapResult, name: &str) -> Result<SkewStatistic> {
    if map.axis.name != "phi" {
        return Err(Error::InvalidParameter {
            name: "axis".into(),
            reason: "skew needs a phase axis".into(),
        });
    }
    let data = map
        .map(name)
        .ok_or_else(|| Error::InvalidParameter {
            name: "observable".into(),
            reason: format!("map has no '{name}' entry"),
        })?;
    let mut order: Vec<usize> = (0..map.axis.values.len()).collect();
    order.sort_by(|&a, &b| map.axis.values[a].total_cmp(&map.axis.values[b]));
    let phis: Vec<f64> = order.iter().map(|&i| map.axis.values[i].to_degrees()).collect();
    if phis.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 phase points, got {}",
            phis.len()
        )));
    }
    let peak = data
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut contours = Vec::new();
    for start in [90.0, -90.0] {
        let mut tracked: f64 = start;
        let mut points = Vec::new();
        for (c, &t) in map.times.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let ys: Vec<f64> = order.iter().map(|&i| data[i][c]).collect();
            if ys.iter().fold(0.0_f64, |m, v| m.max(v.abs())) < USABLE_FRACTION * peak {
                continue;
            }
            // Pick the crossing (or its 360° image) nearest the tracked phase.
            let best = column_crossings(&phis, &ys)
                .into_iter()
                .map(|x| x + 360.0 * ((tracked - x) / 360.0).round())
                .min_by(|a, b| (a - tracked).abs().total_cmp(&(b - tracked).abs()));
            if let Some(x) = best {
                tracked = x;
                points.push((t, x));
            }
        }
        if points.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "contour from {start} degrees has {} usable points",
                points.len()
            )));
        }
        let (slope, intercept) = line_fit(&points);
        let max_offset = points
            .iter()
            .fold(0.0_f64, |m, p| m.max((p.1 - start).abs()));
        contours.push(Contour {
            start_deg: start,
            points,
            slope_deg_per_us: slope,
            intercept_deg: intercept,
            max_offset_deg: max_offset,
        });
    }
    let skew = contours.iter().map(|c| c.slope_deg_per_us).sum::<f64>() / contours.len() as f64;
    Ok(SkewStatistic {
        skew_deg_per_us: skew,
        contours,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningResult {
    /// Beam-splitter detuning (MHz).
    pub delta: f64,
    pub map: MapResult,
    pub skew: SkewStatistic,
}

/// Phase-time maps at each detuning plus the skew of their zero contours.
pub fn run_detuning_scan(spec: &SweepSpec, deltas: &[f64]) -> Result<Vec<DetuningResult>> {
    if let Some(d) = deltas.iter().find(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "delta".into(),
            reason: format!("non-finite detuning {d}"),
        });
    }
    if !spec.observables.contains(&ObservableKind::YKc) {
        return Err(Error::InvalidParameter {
            name: "observables".into(),
            reason: "detuning scan needs y_kc".into(),
        });
    }
    deltas
        .iter()
        .map(|&delta| {
            let mut s = spec.clone();
            s.base.delta = delta;
            let map = run_phase_time_map(&s)?;
            let skew = skew_statistic(&map, ObservableKind::YKc.name())?;
            Ok(DetuningResult { delta, map, skew })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiDeviation {
    /// Cross-Kerr of the compared run (MHz).
    pub chi_ab: f64,
    /// Largest pointwise difference from the `chi_ab = 0` run.
    pub max_deviation: f64,
}

/// Reruns the phase-time scenario with each cross-Kerr value and compares
/// against the run without it.
pub fn run_chi_ablation(spec: &SweepSpec, chi_values: &[f64]) -> Result<Vec<ChiDeviation>> {
    let mut reference = spec.clone();
    reference.base.chi_ab = 0.0;
    let base_map = run_phase_time_map(&reference)?;
    chi_values
        .iter()
        .map(|&chi| {
            if !chi.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "chi_ab".into(),
                    reason: format!("non-finite value {chi}"),
                });
            }
            let mut s = spec.clone();
            s.base.chi_ab = chi;
            let map = run_phase_time_map(&s)?;
            Ok(ChiDeviation {
                chi_ab: chi,
                max_deviation: map.max_deviation(&base_map)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedRow {
    pub alpha: f64,
    /// Integration window (µs): one period of the transmon Z oscillation
    /// plus both ramps.
    pub t_end: f64,
    /// Largest difference of transmon `<Z>` between the two models.
    pub max_deviation: f64,
    pub times: Vec<f64>,
    pub full: Vec<f64>,
    pub effective: Vec<f64>,
}

const PROJECTED_SAMPLES: usize = 200;

/// Closed-system comparison of the full and projected models from
/// `|C+>|+Z>` at each cat size.
pub fn run_projected_comparison(
    params: &SystemParams,
    alphas: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<ProjectedRow>> {
    let closed = params.closed();
    for &a in alphas {
        closed.with("alpha", a)?.validate()?;
    }
    let init = InitialState::new(KcqInit::CatPlus, TransmonInit::PlusZ);
    let kinds = [ObservableKind::ZT];
    alphas
        .par_iter()
        .map(|&alpha| {
            let p = closed.with("alpha", alpha)?;
            let omega = p.omega();
            let period = if omega > 0.0 { 1.0 / (2.0 * omega) } else { 1.0 };
            let t_end = period + 2.0 * p.ramp;
            let times: Vec<f64> = (0..=PROJECTED_SAMPLES)
                .map(|k| t_end * k as f64 / PROJECTED_SAMPLES as f64)
                .collect();
            let full = run_pulse(&p, ModelKind::Full, init, &kinds, &times, cfg)?.remove(0);
            let eff = run_pulse(&p, ModelKind::Effective, init, &kinds, &times, cfg)?.remove(0);
            let dev = full
                .iter()
                .zip(&eff)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            Ok(ProjectedRow {
                alpha,
                t_end,
                max_deviation: dev,
                times,
                full,
                effective: eff,
            })
        })
        .collect()
}

/// Known constants of the Stark-shift model `omega_a - K_a (c V)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarkModel {
    /// Undriven mode frequency (MHz).
    pub omega_a: f64,
    /// Kerr coefficient (MHz per photon).
    pub k_a: f64,
}

impl Default for StarkModel {
    fn default() -> Self {
        Self {
            omega_a: 5200.0,
            k_a: 0.7,
        }
    }
}

impl StarkModel {
    /// Peak frequency (MHz) at drive amplitude `v` (device units).
    pub fn frequency(&self, c: f64, v: f64) -> f64 {
        self.omega_a - self.k_a * (c * v).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkPoint {
    pub v: f64,
    pub freq: f64,
}

/// Synthetic Stark-shift spectroscopy. `noise = Some((sigma, seed))` adds
/// Gaussian frequency noise of standard deviation `sigma` (MHz).
pub fn synth_stark_spectroscopy(
    model: &StarkModel,
    v_grid: &[f64],
    c: f64,
    noise: Option<(f64, u64)>,
) -> Result<Vec<StarkPoint>> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "c".into(),
            reason: format!("conversion factor must be positive, got {c}"),
        });
    }
    if let Some(v) = v_grid.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "v".into(),
            reason: format!("drive amplitude must be non-negative, got {v}"),
        });
    }
    let mut sampler = match noise {
        Some((sigma, seed)) => {
            let dist = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter {
                name: "sigma".into(),
                reason: e.to_string(),
            })?;
            Some((dist, ChaCha8Rng::seed_from_u64(seed)))
        }
        None => None,
    };
    Ok(v_grid
        .iter()
        .map(|&v| {
            let mut freq = model.frequency(c, v);
            if let Some((dist, rng)) = sampler.as_mut() {
                freq += dist.sample(rng);
            }
            StarkPoint { v, freq }
        })
        .collect())
}
