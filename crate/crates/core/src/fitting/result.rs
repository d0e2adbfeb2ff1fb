use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// How a fit ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Converged,
    /// Iteration stopped before the gradient test passed; values are the
    /// best point found.
    NotConverged,
    /// Input carried no oscillation (constant trace).
    NoOscillation,
}

/// Parameters, 1σ uncertainties and quality figures of one fit.
///
/// Non-finite numbers (an unbounded decay time, an undetermined
/// uncertainty) serialise as the strings `"inf"`, `"-inf"` or `"nan"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    #[serde(with = "lossless")]
    pub values: Vec<f64>,
    #[serde(with = "lossless")]
    pub uncertainties: Vec<f64>,
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: FitStatus,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.values[i])
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.uncertainties[i])
    }
}

mod lossless {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<Num> = v
            .iter()
            .map(|x| {
                if x.is_finite() {
                    Num::F(*x)
                } else if x.is_nan() {
                    Num::S("nan".into())
                } else if *x > 0.0 {
                    Num::S("inf".into())
                } else {
                    Num::S("-inf".into())
                }
            })
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Num> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|n| match n {
                Num::F(x) => Ok(x),
                Num::S(s) => match s.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    other => Err(serde::de::Error::custom(format!("bad number '{other}'"))),
                },
            })
            .collect()
    }
}
