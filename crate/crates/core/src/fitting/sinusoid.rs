use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rustfft::{num_complex::Complex, FftPlanner};

use super::lm::{covariance_sigmas, levenberg_marquardt, rms, LeastSquares, LmOptions};
use super::result::{FitResult, FitStatus};
use crate::error::{Error, Result};

/// Parameter order of [`fit_damped_sinusoid`] results. `t_ref` is the first
/// sample time; it is fixed, not fitted.
pub const SINUSOID_NAMES: [&str; 6] = ["amplitude", "frequency", "phase", "tau", "offset", "t_ref"];

/// `A exp(-(t - t_ref)/tau) cos(2 pi f t + phase) + offset`.
///
/// The envelope is referenced to the first sample so that the amplitude does
/// not depend on where the time axis starts; the phase refers to `t = 0`.
pub fn damped_sinusoid(values: &[f64], t: f64) -> f64 {
    let [a, f, phase, tau, offset, t_ref] = values[..6] else {
        unreachable!("six sinusoid parameters")
    };
    let env = if tau.is_infinite() {
        1.0
    } else {
        (-(t - t_ref) / tau).exp()
    };
    a * env * (TAU * f * t + phase).cos() + offset
}

fn wrap_phase(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Residuals in shifted time `s = t - t_ref`; parameters
/// `(A, f, phase at s = 0, decay rate, offset)`.
struct Sinusoid<'a> {
    s: &'a [f64],
    y: &'a [f64],
    floor: f64,
}

impl LeastSquares for Sinusoid<'_> {
    fn n_residuals(&self) -> usize {
        self.s.len()
    }

    fn residual_floor(&self) -> f64 {
        self.floor
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for ((o, &s), &y) in out.iter_mut().zip(self.s).zip(self.y) {
            *o = p[0] * (-p[3] * s).exp() * (TAU * p[1] * s + p[2]).cos() + p[4] - y;
        }
    }

    fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>) {
        for (i, &s) in self.s.iter().enumerate() {
            let env = (-p[3] * s).exp();
            let arg = TAU * p[1] * s + p[2];
            let (sn, cs) = arg.sin_cos();
            jac[(i, 0)] = env * cs;
            jac[(i, 1)] = -p[0] * env * sn * TAU * s;
            jac[(i, 2)] = -p[0] * env * sn;
            jac[(i, 3)] = -s * p[0] * env * cs;
            jac[(i, 4)] = 1.0;
        }
    }
}

/// Dominant frequency of `x` by zero-padded FFT with parabolic peak
/// interpolation; `x` is resampled onto a uniform grid when needed.
fn fft_peak(s: &[f64], x: &[f64]) -> f64 {
    let m = s.len();
    let span = s[m - 1] - s[0];
    let dt = span / (m - 1) as f64;
    let uniform: Vec<f64> = (0..m)
        .map(|k| {
            let t = s[0] + k as f64 * dt;
            let j = s.partition_point(|v| *v <= t).clamp(1, m - 1);
            let (t0, t1) = (s[j - 1], s[j]);
            let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            x[j - 1] * (1.0 - w) + x[j] * w
        })
        .collect();
    let len = (8 * m).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = uniform
        .iter()
        .map(|v| Complex::new(*v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2].iter().map(|z| z.norm()).collect();
    let k = (1..mag.len())
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .unwrap_or(1);
    let shift = if k + 1 < mag.len() {
        let (a, b, c) = (mag[k - 1].max(1e-300).ln(), mag[k].ln(), mag[k + 1].max(1e-300).ln());
        let den = a - 2.0 * b + c;
        if den != 0.0 {
            (0.5 * (a - c) / den).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    (k as f64 + shift) / (len as f64 * dt)
}

/// Decay-rate seed from the per-period peak envelope of `x`.
fn envelope_rate(s: &[f64], x: &[f64], f: f64) -> f64 {
    let period = 1.0 / f;
    let n_chunks = ((s[s.len() - 1] - s[0]) / period).floor() as usize;
    if n_chunks < 2 {
        return 0.0;
    }
    let mut pts = Vec::new();
    for c in 0..n_chunks {
        let (lo, hi) = (s[0] + c as f64 * period, s[0] + (c + 1) as f64 * period);
        let peak = s
            .iter()
            .zip(x)
            .filter(|(t, _)| **t >= lo && **t < hi)
            .fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
        if peak > 0.0 {
            pts.push((0.5 * (lo + hi), peak.ln()));
        }
    }
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (-sxy / sxx).max(0.0)
}

/// Linear amplitude, phase and offset for fixed frequency and decay rate.
fn linear_seed(s: &[f64], y: &[f64], f: f64, gamma: f64) -> (f64, f64, f64) {
    let m = s.len();
    let a = DMatrix::from_fn(m, 3, |i, j| {
        let env = (-gamma * s[i]).exp();
        match j {
            0 => env * (TAU * f * s[i]).cos(),
            1 => env * (TAU * f * s[i]).sin(),
            _ => 1.0,
        }
    });
    let b = DVector::from_column_slice(y);
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(3));
    (x[0].hypot(x[1]), (-x[1]).atan2(x[0]), x[2])
}

/// Fits `A exp(-(t - t_ref)/tau) cos(2 pi f t + phase) + offset`.
///
/// The frequency is seeded from an FFT peak and the decay time from the
/// log of the per-period envelope; Levenberg-Marquardt refines all five.
/// A constant trace gives a [`FitStatus::NoOscillation`] result with an
/// infinite frequency uncertainty.
pub fn fit_damped_sinusoid(t: &[f64], y: &[f64]) -> Result<FitResult> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            found: y.len(),
        });
    }
    let m = t.len();
    if m < 8 {
        return Err(Error::InsufficientData(format!(
            "need at least 8 samples, got {m}"
        )));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "sinusoid fit input",
        });
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "t".into(),
            reason: "times must be strictly increasing".into(),
        });
    }
    let t_ref = t[0];
    let s: Vec<f64> = t.iter().map(|v| v - t_ref).collect();
    let span = s[m - 1];
    let mean = y.iter().sum::<f64>() / m as f64;
    let spread = y.iter().fold(0.0_f64, |a, v| a.max((v - mean).abs()));
    let names: Vec<String> = SINUSOID_NAMES.iter().map(|n| n.to_string()).collect();
    if spread <= 1e-12 * mean.abs().max(1.0) {
        let values = vec![0.0, 0.0, 0.0, f64::INFINITY, mean, t_ref];
        let residual_rms = rms(&y.iter().map(|v| mean - v).collect::<Vec<_>>());
        return Ok(FitResult {
            names,
            values,
            uncertainties: vec![0.0, f64::INFINITY, f64::INFINITY, f64::INFINITY, 0.0, 0.0],
            residual_rms,
            iterations: 0,
            converged: false,
            status: FitStatus::NoOscillation,
            warnings: vec!["no oscillation: trace is constant".into()],
        });
    }
    let x: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let f0 = fft_peak(&s, &x);
    if f0 * span < 1.0 {
        return Err(Error::InsufficientData(format!(
            "trace spans {:.3} periods of the dominant frequency; need at least 1",
            f0 * span
        )));
    }
    let g0 = envelope_rate(&s, &x, f0);
    let (a0, ph0, off0) = linear_seed(&s, y, f0, g0);
    let scale = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let problem = Sinusoid {
        s: &s,
        y,
        floor: 1e-12 * scale * (m as f64).sqrt(),
    };
    let out = levenberg_marquardt(&problem, &[a0, f0, ph0, g0, off0], &LmOptions::default())?;
    let mut p = out.params.clone();
    let sig = covariance_sigmas(&out.jacobian, &out.residuals);
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[2] += PI;
    }
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[2] = -p[2];
    }
    let mut warnings = Vec::new();
    let gamma = p[3];
    let (tau, tau_sig) = if gamma * span > 1e-9 {
        (1.0 / gamma, sig[3] / (gamma * gamma))
    } else {
        if gamma * span < -1e-9 {
            warnings.push("envelope grows; decay time reported as unbounded".into());
        }
        (f64::INFINITY, f64::INFINITY)
    };
    let phase = wrap_phase(p[2] - TAU * p[1] * t_ref);
    let values = vec![p[0], p[1], phase, tau, p[4], t_ref];
    let residual_rms = rms(
        &t.iter()
            .zip(y)
            .map(|(tt, yy)| damped_sinusoid(&values, *tt) - yy)
            .collect::<Vec<_>>(),
    );
    Ok(FitResult {
        names,
        values,
        uncertainties: vec![sig[0], sig[1], sig[2], tau_sig, sig[4], 0.0],
        residual_rms,
        iterations: out.iterations,
        converged: out.converged,
        status: if out.converged {
            FitStatus::Converged
        } else {
            FitStatus::NotConverged
        },
        warnings,
    })
}
