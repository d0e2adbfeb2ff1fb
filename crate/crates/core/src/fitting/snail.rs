//! Flux dependence of a SNAIL mode: potential expansion, frequency fit and
//! the third- and fourth-order couplings.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LeastSquares, LmOptions};
use super::result::{FitResult, FitStatus};
use crate::error::{Error, Result};

const PLANCK: f64 = 6.626_070_15e-34;
const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Josephson energy (MHz) of a junction with inductance `l_j_nh` (nH):
/// `(Phi_0 / 2 pi)^2 / L_J`, expressed as a frequency.
pub fn josephson_energy_mhz(l_j_nh: f64) -> f64 {
    let per_henry_hz = PLANCK / (16.0 * PI * PI * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);
    per_henry_hz / (l_j_nh * 1e-9) / 1e6
}

/// Circuit parameters of a chain of identical SNAILs in series with a
/// linear inductance. Energies in MHz, flux in units of the flux quantum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnailSpec {
    pub e_c: f64,
    /// Linear (series) inductive energy.
    pub e_l: f64,
    /// Josephson energy of each large junction.
    pub e_j: f64,
    /// Small-to-large junction ratio.
    pub asymmetry: f64,
    /// Large junctions per SNAIL loop.
    pub n_junctions: u32,
    pub n_snails: u32,
    /// Operating flux.
    pub phi_ext: f64,
}

impl SnailSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("e_c", self.e_c), ("e_l", self.e_l), ("e_j", self.e_j)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: format!("energy must be positive, got {v}"),
                });
            }
        }
        if !(self.asymmetry > 0.0 && self.asymmetry < 1.0) {
            return Err(Error::InvalidParameter {
                name: "asymmetry".into(),
                reason: format!("must lie in (0, 1), got {}", self.asymmetry),
            });
        }
        if self.n_junctions < 2 {
            return Err(Error::InvalidParameter {
                name: "n_junctions".into(),
                reason: format!("need at least 2, got {}", self.n_junctions),
            });
        }
        if self.n_snails < 1 {
            return Err(Error::InvalidParameter {
                name: "n_snails".into(),
                reason: "need at least 1".into(),
            });
        }
        if !self.phi_ext.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi_ext".into(),
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

/// Expansion of the mode potential about its minimum at one flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnailExpansion {
    pub flux: f64,
    /// Phase across one SNAIL at the potential minimum.
    pub phi_min: f64,
    /// Taylor coefficients of one SNAIL's potential in units of `e_j`.
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Fraction of the mode inductance carried by the SNAIL chain.
    pub participation: f64,
    /// Coefficients of the full mode after series reduction.
    pub c2_mode: f64,
    pub c3_mode: f64,
    pub c4_mode: f64,
    pub phi_zpf: f64,
    /// Mode frequency (MHz).
    pub omega: f64,
    /// Third- and fourth-order couplings (MHz).
    pub g3: f64,
    pub g4: f64,
}

/// `U(phi)/E_J = -a cos(phi) - n cos((phi - 2 pi flux)/n)` and derivatives.
fn snail_derivatives(a: f64, n: f64, fe: f64, phi: f64) -> [f64; 5] {
    let x = (phi - fe) / n;
    [
        -a * phi.cos() - n * x.cos(),
        a * phi.sin() + x.sin(),
        a * phi.cos() + x.cos() / n,
        -a * phi.sin() - x.sin() / (n * n),
        -a * phi.cos() - x.cos() / (n * n * n),
    ]
}

fn potential_minimum(a: f64, n: f64, fe: f64) -> Result<f64> {
    // The potential repeats every 2 pi n; scan one period, then polish.
    let samples = 4000 * n as usize;
    let lo = -PI * n;
    let step = TAU * n / samples as f64;
    let mut best = (lo, f64::INFINITY);
    for k in 0..samples {
        let phi = lo + k as f64 * step;
        let u = snail_derivatives(a, n, fe, phi)[0];
        if u < best.1 {
            best = (phi, u);
        }
    }
    let mut phi = best.0;
    for _ in 0..100 {
        let d = snail_derivatives(a, n, fe, phi);
        if d[2] <= 0.0 {
            break;
        }
        let delta = d[1] / d[2];
        phi -= delta.clamp(-step, step);
        if delta.abs() < 1e-15 * (1.0 + phi.abs()) {
            break;
        }
    }
    let d = snail_derivatives(a, n, fe, phi);
    if !(d[2] > 0.0) || d[1].abs() > 1e-10 {
        return Err(Error::NoMinimum(format!(
            "no stable minimum at flux {} (curvature {:.3e}, slope {:.3e})",
            fe / TAU,
            d[2],
            d[1]
        )));
    }
    Ok(phi)
}

/// Expands the SNAIL chain plus series inductance about its minimum and
/// evaluates the mode frequency and couplings at `flux`.
///
/// With `M` SNAILs carrying participation `p = M E_L / (M E_L + E_J c2)`,
/// the mode coefficients are `c2 p / M`, `c3 p^3 / M^2` and
/// `(p^4 / M^3)(c4 - 3 c3^2 (1 - p) / c2)`; then
/// `omega = sqrt(8 E_C E_J c2_mode)`, `phi_zpf = (2 E_C / (E_J c2_mode))^(1/4)`,
/// `g3 = E_J c3_mode phi_zpf^3 / 6` and `g4 = E_J c4_mode phi_zpf^4 / 24`.
pub fn snail_potential_expansion(spec: &SnailSpec, flux: f64) -> Result<SnailExpansion> {
    spec.validate()?;
    if !flux.is_finite() {
        return Err(Error::InvalidParameter {
            name: "flux".into(),
            reason: "must be finite".into(),
        });
    }
    let n = spec.n_junctions as f64;
    let m = spec.n_snails as f64;
    let fe = TAU * flux;
    let phi_min = potential_minimum(spec.asymmetry, n, fe)?;
    let [_, _, c2, c3, c4] = snail_derivatives(spec.asymmetry, n, fe, phi_min);
    let p = m * spec.e_l / (m * spec.e_l + spec.e_j * c2);
    let c2_mode = p * c2 / m;
    let c3_mode = p.powi(3) * c3 / (m * m);
    let c4_mode = p.powi(4) / m.powi(3) * (c4 - 3.0 * c3 * c3 * (1.0 - p) / c2);
    let omega = (8.0 * spec.e_c * spec.e_j * c2_mode).sqrt();
    let phi_zpf = (2.0 * spec.e_c / (spec.e_j * c2_mode)).powf(0.25);
    Ok(SnailExpansion {
        flux,
        phi_min,
        c2,
        c3,
        c4,
        participation: p,
        c2_mode,
        c3_mode,
        c4_mode,
        phi_zpf,
        omega,
        g3: spec.e_j * c3_mode * phi_zpf.powi(3) / 6.0,
        g4: spec.e_j * c4_mode * phi_zpf.powi(4) / 24.0,
    })
}

/// Inductive energy that puts the mode frequency at `target` (MHz) for the
/// given flux, all other circuit values fixed.
pub fn anchor_inductive_energy(spec: &SnailSpec, flux: f64, target: f64) -> Result<f64> {
    let freq = |e_l: f64| -> Result<f64> {
        Ok(snail_potential_expansion(&SnailSpec { e_l, ..*spec }, flux)?.omega)
    };
    let (mut lo, mut hi) = (1.0_f64, 1e10_f64);
    if freq(lo)? > target || freq(hi)? < target {
        return Err(Error::Unidentifiable(format!(
            "target {target} MHz is out of reach by varying the inductive energy"
        )));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if freq(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Flux positions of the Kerr-free point (`g4 = 0`) and of the largest
/// `|g3|` inside a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxLandmarks {
    pub g4_zero: Option<f64>,
    pub g3_peak: f64,
    pub g3_peak_value: f64,
}

pub fn flux_landmarks(spec: &SnailSpec, lo: f64, hi: f64) -> Result<FluxLandmarks> {
    if !(hi > lo) {
        return Err(Error::InvalidParameter {
            name: "window".into(),
            reason: format!("empty flux window [{lo}, {hi}]"),
        });
    }
    let steps = 400;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
        .collect();
    let ex: Vec<SnailExpansion> = grid
        .iter()
        .map(|&f| snail_potential_expansion(spec, f))
        .collect::<Result<_>>()?;
    let g4 = |f: f64| -> Result<f64> { Ok(snail_potential_expansion(spec, f)?.g4) };
    let g3_abs = |f: f64| -> Result<f64> { Ok(snail_potential_expansion(spec, f)?.g3.abs()) };

    let mut g4_zero = None;
    for k in 0..steps {
        if ex[k].g4 == 0.0 {
            g4_zero = Some(grid[k]);
            break;
        }
        if ex[k].g4 * ex[k + 1].g4 < 0.0 {
            let (mut a, mut b) = (grid[k], grid[k + 1]);
            let sa = g4(a)?.signum();
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if g4(mid)?.signum() == sa {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            g4_zero = Some(0.5 * (a + b));
            break;
        }
    }

    let k = (0..=steps)
        .max_by(|&a, &b| ex[a].g3.abs().total_cmp(&ex[b].g3.abs()))
        .expect("non-empty grid");
    // Golden-section refinement around the grid maximum.
    let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(steps)]);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = b - r * (b - a);
        let x2 = a + r * (b - a);
        if g3_abs(x1)? > g3_abs(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    let peak = 0.5 * (a + b);
    Ok(FluxLandmarks {
        g4_zero,
        g3_peak: peak,
        g3_peak_value: snail_potential_expansion(spec, peak)?.g3,
    })
}

/// Circuit values held fixed by [`snail_flux_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnailFixed {
    pub e_j: f64,
    pub asymmetry: f64,
    pub n_junctions: u32,
    pub n_snails: u32,
}

impl SnailFixed {
    pub fn spec(&self, e_c: f64, e_l: f64, phi_ext: f64) -> SnailSpec {
        SnailSpec {
            e_c,
            e_l,
            e_j: self.e_j,
            asymmetry: self.asymmetry,
            n_junctions: self.n_junctions,
            n_snails: self.n_snails,
            phi_ext,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnailFit {
    /// `e_c` and `e_l` (MHz).
    pub fit: FitResult,
    /// `(flux, g3, g4)` at each input flux for the fitted circuit.
    pub couplings: Vec<(f64, f64, f64)>,
}

struct FluxProblem<'a> {
    flux: &'a [f64],
    freq: &'a [f64],
    fixed: SnailFixed,
    floor: f64,
}

impl FluxProblem<'_> {
    fn model(&self, e_c: f64, e_l: f64, flux: f64) -> f64 {
        snail_potential_expansion(&self.fixed.spec(e_c, e_l, flux), flux)
            .map(|e| e.omega)
            .unwrap_or(f64::NAN)
    }
}

impl LeastSquares for FluxProblem<'_> {
    fn n_residuals(&self) -> usize {
        self.flux.len()
    }

    fn residual_floor(&self) -> f64 {
        self.floor
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let (e_c, e_l) = (p[0].exp(), p[1].exp());
        for ((o, &f), &w) in out.iter_mut().zip(self.flux).zip(self.freq) {
            *o = self.model(e_c, e_l, f) - w;
        }
    }

    fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>) {
        // Log parameters have unit scale; a fixed step suits both.
        let h = 1e-6;
        let m = self.flux.len();
        let (mut up, mut down) = (vec![0.0; m], vec![0.0; m]);
        for j in 0..2 {
            let mut q = p.to_vec();
            q[j] += h;
            self.residuals(&q, &mut up);
            q[j] -= 2.0 * h;
            self.residuals(&q, &mut down);
            for i in 0..m {
                jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
            }
        }
    }
}

/// Least-squares fit of `(E_C, E_L)` to a measured flux dispersion.
pub fn snail_flux_fit(flux: &[f64], freq: &[f64], fixed: SnailFixed) -> Result<SnailFit> {
    if flux.len() != freq.len() {
        return Err(Error::DimensionMismatch {
            expected: flux.len(),
            found: freq.len(),
        });
    }
    if flux.len() < 2 {
        return Err(Error::Unidentifiable(format!(
            "{} flux point(s) cannot fix two energies",
            flux.len()
        )));
    }
    if flux.iter().chain(freq).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "flux fit input",
        });
    }
    let span = flux.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - flux.iter().cloned().fold(f64::INFINITY, f64::min);
    if flux.len() < 6 || span < 0.3 {
        return Err(Error::InsufficientData(format!(
            "need at least 6 points spanning 0.3 flux quanta, got {} spanning {span:.3}",
            flux.len()
        )));
    }
    fixed.spec(1.0, 1.0, 0.0).validate()?;
    let scale = freq.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let problem = FluxProblem {
        flux,
        freq,
        fixed,
        floor: 1e-10 * scale * (flux.len() as f64).sqrt(),
    };
    // Seed: frequency scales as sqrt(E_C), so the best E_C for a trial E_L
    // is closed form; scan E_L on a log grid.
    let mut seed = (f64::INFINITY, 0.0, 0.0);
    for k in 0..=40 {
        let e_l = 10f64.powf(3.0 + 4.0 * k as f64 / 40.0);
        let g: Vec<f64> = flux.iter().map(|&f| problem.model(1.0, e_l, f)).collect();
        if g.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let root = g.iter().zip(freq).map(|(a, b)| a * b).sum::<f64>()
            / g.iter().map(|a| a * a).sum::<f64>();
        let e_c = root * root;
        let cost: f64 = g.iter().zip(freq).map(|(a, b)| (root * a - b).powi(2)).sum();
        if cost < seed.0 {
            seed = (cost, e_c, e_l);
        }
    }
    if !seed.0.is_finite() {
        return Err(Error::NoMinimum("no valid seed for the flux fit".into()));
    }
    let opts = LmOptions {
        max_iter: 200,
        ..Default::default()
    };
    let out = levenberg_marquardt(&problem, &[seed.1.ln(), seed.2.ln()], &opts)?;
    let sig = out.uncertainties();
    let (e_c, e_l) = (out.params[0].exp(), out.params[1].exp());
    let couplings = flux
        .iter()
        .map(|&f| {
            let e = snail_potential_expansion(&fixed.spec(e_c, e_l, f), f)?;
            Ok((f, e.g3, e.g4))
        })
        .collect::<Result<_>>()?;
    Ok(SnailFit {
        fit: FitResult {
            names: vec!["e_c".into(), "e_l".into()],
            values: vec![e_c, e_l],
            uncertainties: vec![e_c * sig[0], e_l * sig[1]],
            residual_rms: out.rms(),
            iterations: out.iterations,
            converged: out.converged,
            status: if out.converged {
                FitStatus::Converged
            } else {
                FitStatus::NotConverged
            },
            warnings: Vec::new(),
        },
        couplings,
    })
}
