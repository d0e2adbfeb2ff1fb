//! Calibration fits: damped sinusoids, Stark shift, rate-versus-amplitude
//! slope and the SNAIL flux dispersion.

mod g3;
mod lm;
mod result;
mod sinusoid;
mod snail;
mod stark;

pub use g3::{extract_g3_tilde, linear_regime_start, G3Fit, G3Options, SECANT_TOLERANCE};
pub use lm::{levenberg_marquardt, LeastSquares, LmOptions, LmOutcome};
pub use result::{FitResult, FitStatus};
pub use sinusoid::{damped_sinusoid, fit_damped_sinusoid, SINUSOID_NAMES};
pub use snail::{
    anchor_inductive_energy, flux_landmarks, josephson_energy_mhz, snail_flux_fit,
    snail_potential_expansion, FluxLandmarks, SnailExpansion, SnailFit, SnailFixed, SnailSpec,
};
pub use stark::fit_stark_shift;

#[cfg(test)]
mod tests;
