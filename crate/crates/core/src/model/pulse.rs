use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeKind {
    /// sin² rise over `ramp`, flat top, sin² fall over the last `ramp`.
    #[default]
    SineSquared,
    /// 1 on the whole closed interval `[0, T_int]`; ignores `ramp`.
    Rectangular,
}

/// Beam-splitter drive envelope over one interaction window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSchedule {
    pub t_int: f64,
    pub ramp: f64,
    #[serde(default)]
    pub kind: EnvelopeKind,
}

impl PulseSchedule {
    pub fn new(t_int: f64, ramp: f64, kind: EnvelopeKind) -> Result<Self> {
        let s = Self { t_int, ramp, kind };
        s.validate()?;
        Ok(s)
    }

    /// Sine-squared schedule; `ramp = 0` behaves as a rectangular pulse.
    pub fn sine_squared(t_int: f64, ramp: f64) -> Result<Self> {
        Self::new(t_int, ramp, EnvelopeKind::SineSquared)
    }

    pub fn rectangular(t_int: f64) -> Result<Self> {
        Self::new(t_int, 0.0, EnvelopeKind::Rectangular)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_int.is_finite() && self.t_int > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_int".into(),
                reason: format!("interaction time must be positive, got {}", self.t_int),
            });
        }
        if !(self.ramp.is_finite() && self.ramp >= 0.0 && 2.0 * self.ramp <= self.t_int) {
            return Err(Error::InvalidParameter {
                name: "ramp".into(),
                reason: format!(
                    "need 0 <= 2*ramp <= t_int, got ramp = {} and t_int = {}",
                    self.ramp, self.t_int
                ),
            });
        }
        Ok(())
    }

    /// Envelope value in `[0, 1]` at time `t` (µs).
    pub fn envelope(&self, t: f64) -> Result<f64> {
        let slack = 1e-9 * self.t_int.max(1.0);
        if !(t >= -slack && t <= self.t_int + slack) {
            return Err(Error::TimeOutOfRange {
                t,
                t_end: self.t_int,
            });
        }
        Ok(self.envelope_unchecked(t.clamp(0.0, self.t_int)))
    }

    pub(crate) fn envelope_unchecked(&self, t: f64) -> f64 {
        if self.kind == EnvelopeKind::Rectangular || self.ramp == 0.0 {
            return 1.0;
        }
        let r = self.ramp;
        if t < r {
            (PI * t / (2.0 * r)).sin().powi(2)
        } else if t > self.t_int - r {
            (PI * (self.t_int - t) / (2.0 * r)).sin().powi(2)
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_squared_values() {
        let s = PulseSchedule::sine_squared(10.0, 1.0).unwrap();
        assert_eq!(s.envelope(0.0).unwrap(), 0.0);
        assert_eq!(s.envelope(5.0).unwrap(), 1.0);
        assert!((s.envelope(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(s.envelope(10.0).unwrap().abs() < 1e-15);
        assert!(s.envelope(10.5).is_err());
        assert!(s.envelope(-0.1).is_err());
    }

    #[test]
    fn zero_ramp_is_rectangular() {
        let s = PulseSchedule::sine_squared(3.0, 0.0).unwrap();
        for t in [0.0, 0.1, 1.5, 3.0] {
            assert_eq!(s.envelope(t).unwrap(), 1.0);
        }
    }

    #[test]
    fn area_is_t_int_minus_ramp() {
        let s = PulseSchedule::sine_squared(7.0, 1.3).unwrap();
        let n = 200_000;
        let h = s.t_int / n as f64;
        let mut area = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            area += w * s.envelope(k as f64 * h).unwrap();
        }
        area *= h;
        assert!(((area - (s.t_int - s.ramp)) / (s.t_int - s.ramp)).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_schedules() {
        assert!(PulseSchedule::sine_squared(1.0, 0.6).is_err());
        assert!(PulseSchedule::sine_squared(0.0, 0.0).is_err());
        assert!(PulseSchedule::sine_squared(1.0, -0.1).is_err());
    }
}
