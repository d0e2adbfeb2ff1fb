use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::catspace::check_truncation;
use crate::error::{Error, Result};

/// Coherence time in microseconds, or `Infinite` to drop the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lifetime {
    Finite(f64),
    Infinite,
}

impl Lifetime {
    /// Decay rate `1/T` in 1/µs; zero when infinite.
    pub fn rate(self) -> f64 {
        match self {
            Lifetime::Finite(t) => 1.0 / t,
            Lifetime::Infinite => 0.0,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Lifetime::Finite(_))
    }

    fn validate(self, name: &str) -> Result<()> {
        if let Lifetime::Finite(t) = self {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: format!("lifetime must be positive or \"infinite\", got {t}"),
                });
            }
        }
        Ok(())
    }
}

impl From<f64> for Lifetime {
    fn from(t: f64) -> Self {
        if t.is_infinite() && t > 0.0 {
            Lifetime::Infinite
        } else {
            Lifetime::Finite(t)
        }
    }
}

impl Serialize for Lifetime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Lifetime::Finite(t) => s.serialize_f64(*t),
            Lifetime::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Lifetime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Lifetime;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive time in microseconds or \"infinite\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Lifetime, E> {
                Ok(Lifetime::from(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Lifetime, E> {
                Ok(Lifetime::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Lifetime, E> {
                Ok(Lifetime::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Lifetime, E> {
                match v.to_ascii_lowercase().as_str() {
                    "infinite" | "inf" => Ok(Lifetime::Infinite),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// How a Ramsey time maps onto the rate of a `D[sigma_z]`-type dissipator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DephasingConvention {
    /// Rate `1/T2R` attached directly to `D[sigma_z]`.
    #[default]
    Literal,
    /// Pure-dephasing rate `(1/T2R - 1/(2 T1)) / 2`, so the coherence decays
    /// at `1/T2R` overall.
    Conventional,
}

/// Physical parameters of one simulation.
///
/// Frequencies are ordinary frequencies in MHz, times in µs. The squeezing
/// amplitude is not an input: it follows from `eps2 = k_a * alpha^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Kerr nonlinearity K_a (MHz).
    pub k_a: f64,
    /// Cat amplitude (real, non-negative).
    pub alpha: f64,
    /// Beam-splitter third-order coefficient (MHz).
    pub g3_tilde: f64,
    /// Beam-splitter drive amplitude in sqrt(photons).
    pub xi: f64,
    /// Beam-splitter drive phase (rad).
    pub phi: f64,
    /// Beam-splitter detuning (MHz).
    pub delta: f64,
    /// Cross-Kerr between the modes (MHz).
    pub chi_ab: f64,
    pub t1_a: Lifetime,
    pub t2r_a: Lifetime,
    pub t1_b: Lifetime,
    pub t2r_b: Lifetime,
    /// Fock truncation of the Kerr-cat mode.
    pub n_fock: usize,
    /// Envelope ramp time (µs); zero gives a rectangular pulse.
    pub ramp: f64,
    pub dephasing: DephasingConvention,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            k_a: 0.7,
            alpha: 1.3,
            g3_tilde: 0.45,
            xi: 2.04,
            phi: 0.0,
            delta: 0.0,
            chi_ab: 0.01,
            t1_a: Lifetime::Finite(40.0),
            t2r_a: Lifetime::Finite(5.0),
            t1_b: Lifetime::Finite(33.0),
            t2r_b: Lifetime::Finite(47.0),
            n_fock: 30,
            ramp: 0.0,
            dephasing: DephasingConvention::Literal,
        }
    }
}

/// Names accepted by [`SystemParams::set`] and sweep axes.
pub const PARAM_NAMES: &[&str] = &[
    "k_a", "alpha", "g3_tilde", "xi", "phi", "delta", "chi_ab", "t1_a", "t2r_a", "t1_b", "t2r_b",
    "n_fock", "ramp",
];

impl SystemParams {
    /// Squeezing amplitude `eps2 = K_a alpha^2` (MHz).
    pub fn eps2(&self) -> f64 {
        self.k_a * self.alpha * self.alpha
    }

    /// Effective interaction rate `g3_tilde * xi * alpha` (MHz).
    pub fn omega(&self) -> f64 {
        self.g3_tilde * self.xi * self.alpha
    }

    /// Same parameters with every coherence time set to infinite.
    pub fn closed(&self) -> Self {
        Self {
            t1_a: Lifetime::Infinite,
            t2r_a: Lifetime::Infinite,
            t1_b: Lifetime::Infinite,
            t2r_b: Lifetime::Infinite,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("k_a", self.k_a),
            ("alpha", self.alpha),
            ("g3_tilde", self.g3_tilde),
            ("xi", self.xi),
            ("phi", self.phi),
            ("delta", self.delta),
            ("chi_ab", self.chi_ab),
            ("ramp", self.ramp),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        for (name, v) in [
            ("k_a", self.k_a),
            ("alpha", self.alpha),
            ("g3_tilde", self.g3_tilde),
            ("xi", self.xi),
            ("ramp", self.ramp),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: format!("must be non-negative, got {v}"),
                });
            }
        }
        if self.n_fock < 2 {
            return Err(Error::InvalidParameter {
                name: "n_fock".into(),
                reason: format!("must be at least 2, got {}", self.n_fock),
            });
        }
        self.t1_a.validate("t1_a")?;
        self.t2r_a.validate("t2r_a")?;
        self.t1_b.validate("t1_b")?;
        self.t2r_b.validate("t2r_b")?;
        check_truncation(self.alpha, self.n_fock)
    }

    /// Reads a parameter by name; lifetimes report infinity as `f64::INFINITY`.
    pub fn get(&self, name: &str) -> Result<f64> {
        let life = |l: Lifetime| match l {
            Lifetime::Finite(t) => t,
            Lifetime::Infinite => f64::INFINITY,
        };
        Ok(match name {
            "k_a" => self.k_a,
            "alpha" => self.alpha,
            "g3_tilde" => self.g3_tilde,
            "xi" => self.xi,
            "phi" => self.phi,
            "delta" => self.delta,
            "chi_ab" => self.chi_ab,
            "t1_a" => life(self.t1_a),
            "t2r_a" => life(self.t2r_a),
            "t1_b" => life(self.t1_b),
            "t2r_b" => life(self.t2r_b),
            "n_fock" => self.n_fock as f64,
            "ramp" => self.ramp,
            _ => return Err(Error::UnknownParameter(name.into())),
        })
    }

    /// Sets a parameter by name. `n_fock` must be a whole number.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "k_a" => self.k_a = value,
            "alpha" => self.alpha = value,
            "g3_tilde" => self.g3_tilde = value,
            "xi" => self.xi = value,
            "phi" => self.phi = value,
            "delta" => self.delta = value,
            "chi_ab" => self.chi_ab = value,
            "t1_a" => self.t1_a = value.into(),
            "t2r_a" => self.t2r_a = value.into(),
            "t1_b" => self.t1_b = value.into(),
            "t2r_b" => self.t2r_b = value.into(),
            "ramp" => self.ramp = value,
            "n_fock" => {
                if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "n_fock".into(),
                        reason: format!("must be a whole number, got {value}"),
                    });
                }
                self.n_fock = value as usize;
            }
            _ => return Err(Error::UnknownParameter(name.into())),
        }
        Ok(())
    }

    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = self.clone();
        p.set(name, value)?;
        Ok(p)
    }
}
