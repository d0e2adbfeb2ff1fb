use serde::{Deserialize, Serialize};

use super::result::{FitResult, FitStatus};
use crate::error::{Error, Result};

/// Relative distance from the secant line below which a point counts as
/// linear when `xi_min` is chosen automatically.
pub const SECANT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct G3Options {
    /// Lower end of the linear regime; chosen by the secant rule if absent.
    pub xi_min: Option<f64>,
    /// 1σ uncertainties of the rates, used as inverse-variance weights.
    pub sigmas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G3Fit {
    /// `g3_tilde` (MHz) and the intercept of the rate line (MHz).
    pub fit: FitResult,
    pub xi_min: f64,
    pub points_used: usize,
}

/// Smallest drive amplitude from which every rate lies within 5% of the
/// secant through the two largest-amplitude points.
pub fn linear_regime_start(xi: &[f64], omega: &[f64]) -> Result<f64> {
    if xi.len() != omega.len() {
        return Err(Error::DimensionMismatch {
            expected: xi.len(),
            found: omega.len(),
        });
    }
    if xi.len() < 2 {
        return Err(Error::InsufficientData("secant needs two points".into()));
    }
    let mut order: Vec<usize> = (0..xi.len()).collect();
    order.sort_by(|&a, &b| xi[a].total_cmp(&xi[b]));
    let (i1, i2) = (order[order.len() - 2], order[order.len() - 1]);
    if xi[i2] == xi[i1] {
        return Err(Error::Unidentifiable("repeated largest amplitude".into()));
    }
    let slope = (omega[i2] - omega[i1]) / (xi[i2] - xi[i1]);
    let secant = |x: f64| omega[i1] + slope * (x - xi[i1]);
    let mut start = xi[i1];
    for &k in order.iter().rev() {
        let s = secant(xi[k]);
        if (omega[k] - s).abs() <= SECANT_TOLERANCE * s.abs() {
            start = xi[k];
        } else {
            break;
        }
    }
    Ok(start)
}

/// Weighted straight-line fit of `omega` against `xi` over the linear
/// regime; `g3_tilde = slope / alpha`.
pub fn extract_g3_tilde(
    xi: &[f64],
    omega: &[f64],
    alpha: f64,
    opts: &G3Options,
) -> Result<G3Fit> {
    if xi.len() != omega.len() {
        return Err(Error::DimensionMismatch {
            expected: xi.len(),
            found: omega.len(),
        });
    }
    if xi.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 amplitudes, got {}",
            xi.len()
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha".into(),
            reason: format!("must be positive, got {alpha}"),
        });
    }
    if xi.iter().chain(omega).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "rate fit input",
        });
    }
    let weights: Vec<f64> = match &opts.sigmas {
        Some(s) if s.len() != xi.len() => {
            return Err(Error::DimensionMismatch {
                expected: xi.len(),
                found: s.len(),
            })
        }
        Some(s) => s
            .iter()
            .map(|v| {
                if *v > 0.0 && v.is_finite() {
                    Ok(1.0 / (v * v))
                } else {
                    Err(Error::InvalidParameter {
                        name: "sigmas".into(),
                        reason: format!("uncertainty {v} must be positive and finite"),
                    })
                }
            })
            .collect::<Result<_>>()?,
        None => vec![1.0; xi.len()],
    };
    let xi_min = match opts.xi_min {
        Some(x) => x,
        None => linear_regime_start(xi, omega)?,
    };
    let used: Vec<usize> = (0..xi.len()).filter(|&i| xi[i] >= xi_min).collect();
    if used.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} amplitudes at or above xi_min = {xi_min}",
            used.len()
        )));
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &i in &used {
        let w = weights[i];
        sw += w;
        sx += w * xi[i];
        sy += w * omega[i];
        sxx += w * xi[i] * xi[i];
        sxy += w * xi[i] * omega[i];
    }
    let det = sw * sxx - sx * sx;
    if det <= 0.0 {
        return Err(Error::Unidentifiable(
            "all amplitudes in the linear regime coincide".into(),
        ));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let resid: Vec<f64> = used
        .iter()
        .map(|&i| omega[i] - (intercept + slope * xi[i]))
        .collect();
    let n = used.len();
    let scale = if opts.sigmas.is_some() {
        1.0
    } else if n > 2 {
        resid.iter().map(|r| r * r).sum::<f64>() / (n - 2) as f64
    } else {
        f64::INFINITY
    };
    let sig_slope = (scale * sw / det).sqrt();
    let sig_int = (scale * sxx / det).sqrt();
    let rms = (resid.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    Ok(G3Fit {
        fit: FitResult {
            names: vec!["g3_tilde".into(), "intercept".into()],
            values: vec![slope / alpha, intercept],
            uncertainties: vec![sig_slope / alpha, sig_int],
            residual_rms: rms,
            iterations: 0,
            converged: true,
            status: FitStatus::Converged,
            warnings: Vec::new(),
        },
        xi_min,
        points_used: n,
    })
}
