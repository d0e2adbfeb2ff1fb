use super::result::{FitResult, FitStatus};
use crate::error::{Error, Result};
use crate::experiments::StarkModel;

/// Fits the conversion factor `c` of `omega_a - K_a (c V)^2` with `omega_a`
/// and `K_a` known. The model is linear in `c^2`, so the fit is closed form.
pub fn fit_stark_shift(model: &StarkModel, v: &[f64], freq: &[f64]) -> Result<FitResult> {
    if v.len() != freq.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            found: freq.len(),
        });
    }
    if v.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points, got {}",
            v.len()
        )));
    }
    if v.iter().chain(freq).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: "Stark fit input",
        });
    }
    if !(model.k_a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "k_a".into(),
            reason: format!("must be positive, got {}", model.k_a),
        });
    }
    // shift_i = K (c V_i)^2  =>  u = c^2 by least squares on x_i = K V_i^2.
    let x: Vec<f64> = v.iter().map(|vi| model.k_a * vi * vi).collect();
    let shift: Vec<f64> = freq.iter().map(|f| model.omega_a - f).collect();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    if sxx == 0.0 {
        return Err(Error::Unidentifiable(
            "all drive amplitudes are zero".into(),
        ));
    }
    let u = x.iter().zip(&shift).map(|(a, b)| a * b).sum::<f64>() / sxx;
    if u <= 0.0 {
        return Err(Error::Unidentifiable(format!(
            "fitted c^2 = {u:.3e} is not positive; the frequency does not fall with drive"
        )));
    }
    let c = u.sqrt();
    let mut warnings = Vec::new();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    if order.windows(2).any(|w| v[w[1]] > v[w[0]] && freq[w[1]] > freq[w[0]]) {
        warnings.push("frequency rises with drive amplitude somewhere (wrong-sign Kerr?)".into());
    }
    let resid: Vec<f64> = v
        .iter()
        .zip(freq)
        .map(|(vi, f)| model.frequency(c, *vi) - f)
        .collect();
    let m = resid.len();
    let ssr: f64 = resid.iter().map(|r| r * r).sum();
    let sigma_u = (ssr / (m - 1) as f64 / sxx).sqrt();
    Ok(FitResult {
        names: vec!["c".into()],
        values: vec![c],
        uncertainties: vec![sigma_u / (2.0 * c)],
        residual_rms: (ssr / m as f64).sqrt(),
        iterations: 0,
        converged: true,
        status: FitStatus::Converged,
        warnings,
    })
}
