use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::*;
use crate::experiments::{synth_stark_spectroscopy, StarkModel};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn pure_cosine_is_exact_and_undamped() {
    let t = linspace(0.0, 5.0, 201);
    let y: Vec<f64> = t.iter().map(|t| (TAU * t).cos()).collect();
    let fit = fit_damped_sinusoid(&t, &y).unwrap();
    assert!(fit.converged);
    assert!((fit.value("frequency").unwrap() - 1.0).abs() < 1e-10);
    assert!((fit.value("amplitude").unwrap() - 1.0).abs() < 1e-10);
    assert!(fit.value("tau").unwrap().is_infinite());
    assert!(fit.residual_rms < 1e-10);
}

#[test]
fn noisy_damped_trace_roundtrip() {
    let t = linspace(0.0, 8.0, 400);
    let (f, tau) = (2.387, 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let y: Vec<f64> = t
        .iter()
        .map(|t| (-t / tau).exp() * (TAU * f * t + 0.3).cos() + noise.sample(&mut rng))
        .collect();
    let fit = fit_damped_sinusoid(&t, &y).unwrap();
    assert!(fit.converged);
    assert!((fit.value("frequency").unwrap() / f - 1.0).abs() < 0.05);
    assert!((fit.value("tau").unwrap() / tau - 1.0).abs() < 0.05);
    assert!(fit.uncertainties.iter().all(|s| *s >= 0.0));
}

#[test]
fn constant_trace_has_no_oscillation() {
    let t = linspace(0.0, 1.0, 20);
    let fit = fit_damped_sinusoid(&t, &[0.4; 20]).unwrap();
    assert_eq!(fit.status, FitStatus::NoOscillation);
    assert!(!fit.converged);
    assert!(fit.uncertainty("frequency").unwrap().is_infinite());
    assert!((fit.value("offset").unwrap() - 0.4).abs() < 1e-15);
}

#[test]
fn sinusoid_preconditions() {
    let t = linspace(0.0, 1.0, 5);
    assert!(fit_damped_sinusoid(&t, &[0.0, 1.0, 0.0, 1.0, 0.0]).is_err());
    let t = linspace(0.0, 0.3, 30);
    let y: Vec<f64> = t.iter().map(|t| (TAU * t).cos()).collect();
    assert!(matches!(
        fit_damped_sinusoid(&t, &y),
        Err(crate::Error::InsufficientData(_))
    ));
}

#[test]
fn residual_rms_reproduces_from_returned_parameters() {
    let t = linspace(0.0, 3.0, 150);
    let y: Vec<f64> = t
        .iter()
        .map(|t| 0.8 * (-t / 4.0).exp() * (TAU * 1.7 * t - 1.0).cos() + 0.1 + 0.01 * (37.0 * t).sin())
        .collect();
    let fit = fit_damped_sinusoid(&t, &y).unwrap();
    let rms = (t
        .iter()
        .zip(&y)
        .map(|(t, y)| (damped_sinusoid(&fit.values, *t) - y).powi(2))
        .sum::<f64>()
        / t.len() as f64)
        .sqrt();
    assert!((rms - fit.residual_rms).abs() < 1e-12);
}

#[test]
fn fit_result_json_keeps_infinities() {
    let t = linspace(0.0, 5.0, 101);
    let y: Vec<f64> = t.iter().map(|t| (TAU * t).cos()).collect();
    let fit = fit_damped_sinusoid(&t, &y).unwrap();
    let text = serde_json::to_string(&fit).unwrap();
    assert!(text.contains("\"inf\""));
    let back: FitResult = serde_json::from_str(&text).unwrap();
    assert!(back.value("tau").unwrap().is_infinite());
    assert_eq!(back.values[..3], fit.values[..3]);
}

#[test]
fn stark_noiseless_inversion() {
    let m = StarkModel::default();
    let v = linspace(0.0, 2000.0, 11);
    let pts = synth_stark_spectroscopy(&m, &v, 6.57e-4, None).unwrap();
    let freq: Vec<f64> = pts.iter().map(|p| p.freq).collect();
    let fit = fit_stark_shift(&m, &v, &freq).unwrap();
    assert!((fit.values[0] / 6.57e-4 - 1.0).abs() < 1e-10);
    assert!(fit.warnings.is_empty());
}

#[test]
fn stark_degenerate_and_wrong_sign() {
    let m = StarkModel::default();
    assert!(matches!(
        fit_stark_shift(&m, &[0.0; 4], &[5200.0; 4]),
        Err(crate::Error::Unidentifiable(_))
    ));
    assert!(fit_stark_shift(&m, &[1.0, 2.0], &[5200.0, 5199.0]).is_err());
    // Rising frequency: wrong-sign data cannot give a positive c^2.
    assert!(fit_stark_shift(&m, &[0.0, 1000.0, 2000.0], &[5200.0, 5200.3, 5201.2]).is_err());
    // A single rising step in otherwise falling data is flagged.
    let fit = fit_stark_shift(&m, &[0.0, 1000.0, 1500.0, 2000.0], &[5200.0, 5199.7, 5199.8, 5198.8])
        .unwrap();
    assert!(!fit.warnings.is_empty());
}

#[test]
fn g3_exact_recovery_and_scaling() {
    let xi = linspace(0.5, 3.0, 6);
    let omega: Vec<f64> = xi.iter().map(|x| 0.45 * x * 1.3).collect();
    let fit = extract_g3_tilde(&xi, &omega, 1.3, &G3Options::default()).unwrap();
    assert!((fit.fit.values[0] - 0.45).abs() < 1e-12);
    assert_eq!(fit.points_used, 6);
    let half = extract_g3_tilde(&xi, &omega, 0.65, &G3Options::default()).unwrap();
    assert_eq!(half.fit.values[0], 2.0 * fit.fit.values[0]);
    let scaled: Vec<f64> = omega.iter().map(|w| 4.0 * w).collect();
    let s = extract_g3_tilde(&xi, &scaled, 1.3, &G3Options::default()).unwrap();
    assert_eq!(s.fit.values[0], 4.0 * fit.fit.values[0]);
}

#[test]
fn g3_secant_rule_drops_the_knee() {
    // Saturating below xi = 1, linear above.
    let xi = vec![0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let omega: Vec<f64> = xi
        .iter()
        .map(|&x: &f64| if x < 1.0 { 0.3 * x.sqrt() } else { 0.6 * x - 0.3 })
        .collect();
    let fit = extract_g3_tilde(&xi, &omega, 1.0, &G3Options::default()).unwrap();
    assert_eq!(fit.xi_min, 1.0);
    assert!((fit.fit.values[0] - 0.6).abs() < 1e-12);
    let opts = G3Options {
        xi_min: Some(2.8),
        ..Default::default()
    };
    assert!(extract_g3_tilde(&xi, &omega, 1.0, &opts).is_err());
    assert!(extract_g3_tilde(&xi[..3], &omega[..3], 1.0, &G3Options::default()).is_err());
}

fn device_snail() -> SnailSpec {
    SnailSpec {
        e_c: 109.0,
        e_l: 127_287.0,
        e_j: josephson_energy_mhz(0.6),
        asymmetry: 0.1,
        n_junctions: 3,
        n_snails: 2,
        phi_ext: 0.33,
    }
}

#[test]
fn josephson_energy_of_reference_junction() {
    assert!((josephson_energy_mhz(1.0) - 163_461.5).abs() < 0.5);
}

#[test]
fn symmetric_point_has_no_cubic_term() {
    let e = snail_potential_expansion(&device_snail(), 0.0).unwrap();
    assert!(e.c3.abs() < 1e-12 && e.g3.abs() < 1e-9);
    assert!(e.c2 > 0.0);
    assert!((e.c2 - (0.1 + 1.0 / 3.0)).abs() < 1e-12);
}

#[test]
fn expansion_matches_finite_differences() {
    let spec = device_snail();
    let e = snail_potential_expansion(&spec, 0.3).unwrap();
    let u = |phi: f64| -0.1 * phi.cos() - 3.0 * ((phi - TAU * 0.3) / 3.0).cos();
    let h = 1e-3;
    let x = e.phi_min;
    let d1 = (u(x + h) - u(x - h)) / (2.0 * h);
    let d2 = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
    let d3 = (u(x + 2.0 * h) - 2.0 * u(x + h) + 2.0 * u(x - h) - u(x - 2.0 * h)) / (2.0 * h.powi(3));
    assert!(d1.abs() < 1e-6);
    assert!((d2 - e.c2).abs() < 1e-6);
    assert!((d3 - e.c3).abs() < 1e-4);
}

#[test]
fn anchored_inductance_reproduces_target() {
    let spec = device_snail();
    let e_l = anchor_inductive_energy(&spec, 0.0, 5930.0).unwrap();
    let e = snail_potential_expansion(&SnailSpec { e_l, ..spec }, 0.0).unwrap();
    assert!((e.omega - 5930.0).abs() < 1e-6);
    assert!((e_l / 127_287.0 - 1.0).abs() < 1e-3);
}

#[test]
fn flux_fit_roundtrip_and_guards() {
    let spec = device_snail();
    let flux = linspace(0.0, 0.5, 11);
    let freq: Vec<f64> = flux
        .iter()
        .map(|&f| snail_potential_expansion(&spec, f).unwrap().omega)
        .collect();
    let fixed = SnailFixed {
        e_j: spec.e_j,
        asymmetry: 0.1,
        n_junctions: 3,
        n_snails: 2,
    };
    let fit = snail_flux_fit(&flux, &freq, fixed).unwrap();
    assert!(fit.fit.converged);
    assert!((fit.fit.values[0] / 109.0 - 1.0).abs() < 1e-6);
    assert!((fit.fit.values[1] / 127_287.0 - 1.0).abs() < 1e-6);
    assert_eq!(fit.couplings.len(), 11);
    assert!(matches!(
        snail_flux_fit(&[0.1], &[5000.0], fixed),
        Err(crate::Error::Unidentifiable(_))
    ));
    assert!(snail_flux_fit(&flux[..4], &freq[..4], fixed).is_err());
}

#[test]
fn invalid_snail_specs() {
    let s = device_snail();
    assert!(snail_potential_expansion(&SnailSpec { asymmetry: 1.2, ..s }, 0.1).is_err());
    assert!(snail_potential_expansion(&SnailSpec { n_junctions: 1, ..s }, 0.1).is_err());
    assert!(snail_potential_expansion(&SnailSpec { e_c: -1.0, ..s }, 0.1).is_err());
}
