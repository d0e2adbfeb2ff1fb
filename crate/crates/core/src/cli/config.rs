use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{InitialState, ModelKind, ObservableKind, StarkModel};
use crate::fitting::{josephson_energy_mhz, SnailFixed, SnailSpec};
use crate::lindblad::IntegratorConfig;
use crate::model::{DeviceReference, SystemParams};

/// Drive amplitude (photon units) for the phase-map scenarios.
pub const PHASE_MAP_XI: f64 = 2.6;
/// Envelope rise time (µs) for the projected comparison.
pub const PROJECTED_RAMP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Fig2Map,
    Fig3Sweep,
    DetuningScan,
    ChiAblation,
    ProjectedCompare,
    StarkSynth,
    StarkFit,
    SnailFit,
    OscillationFit,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Fig2Map,
        Scenario::Fig3Sweep,
        Scenario::DetuningScan,
        Scenario::ChiAblation,
        Scenario::ProjectedCompare,
        Scenario::StarkSynth,
        Scenario::StarkFit,
        Scenario::SnailFit,
        Scenario::OscillationFit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2Map => "fig2-map",
            Scenario::Fig3Sweep => "fig3-sweep",
            Scenario::DetuningScan => "detuning-scan",
            Scenario::ChiAblation => "chi-ablation",
            Scenario::ProjectedCompare => "projected-compare",
            Scenario::StarkSynth => "stark-synth",
            Scenario::StarkFit => "stark-fit",
            Scenario::SnailFit => "snail-fit",
            Scenario::OscillationFit => "oscillation-fit",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|s| s.name()).collect();
                Error::Config(format!("unknown scenario `{name}` (known: {})", known.join(", ")))
            })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Either an explicit list or `count` evenly spaced points from `start` to
/// `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn range(start: f64, stop: f64, count: usize) -> Self {
        Grid::Range { start, stop, count }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, count } => match count {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Values of the swept parameter (phase for maps, amplitude for the
    /// amplitude sweep).
    pub axis: Option<Grid>,
    /// Interaction times (µs).
    pub times: Option<Grid>,
    pub model: Option<ModelKind>,
    pub initial: Option<InitialState>,
    pub observables: Option<Vec<ObservableKind>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetuningSection {
    /// Detunings (MHz).
    pub deltas: Vec<f64>,
}

impl Default for DetuningSection {
    fn default() -> Self {
        Self {
            deltas: vec![-0.1, 0.0, 0.15],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChiSection {
    /// Cross-Kerr values (MHz) compared against zero.
    pub values: Vec<f64>,
}

impl Default for ChiSection {
    fn default() -> Self {
        Self { values: vec![0.01] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectedSection {
    pub alphas: Vec<f64>,
}

impl Default for ProjectedSection {
    fn default() -> Self {
        Self {
            alphas: vec![1.0, 1.3, 1.6, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarkSection {
    /// Undriven mode frequency (MHz).
    pub omega_a: f64,
    /// Kerr coefficient (MHz per photon).
    pub k_a: f64,
    /// Conversion factor (sqrt(photon) per device unit) used for synthesis.
    pub c: f64,
    /// Drive amplitudes (device units).
    pub v: Grid,
    /// Gaussian frequency noise (MHz); zero for exact data.
    pub noise_sigma: f64,
    /// `(v, freq)` CSV to fit instead of synthetic data.
    pub input: Option<PathBuf>,
}

impl Default for StarkSection {
    fn default() -> Self {
        Self {
            omega_a: StarkModel::default().omega_a,
            k_a: StarkModel::default().k_a,
            c: 6.57e-4,
            v: Grid::range(0.0, 2000.0, 21),
            noise_sigma: 0.0,
            input: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnailSection {
    pub e_c: f64,
    pub e_l: f64,
    /// Large-junction inductance (nH).
    pub l_j: f64,
    pub asymmetry: f64,
    pub n_junctions: u32,
    pub n_snails: u32,
    pub phi_ext: f64,
    /// Flux grid for synthetic data and the coupling table.
    pub flux: Grid,
    /// `(flux, freq)` CSV to fit instead of synthetic data.
    pub input: Option<PathBuf>,
}

impl StarkSection {
    pub fn model(&self) -> StarkModel {
        StarkModel {
            omega_a: self.omega_a,
            k_a: self.k_a,
        }
    }
}

impl SnailSection {
    fn from_reference(r: &DeviceReference) -> Self {
        let get = |k: &str, d: f64| r.value(k).unwrap_or(d);
        Self {
            e_c: get("e_c", 109.0),
            e_l: get("e_l", 127_287.0),
            l_j: get("l_j", 0.6),
            asymmetry: get("asymmetry", 0.1),
            n_junctions: 3,
            n_snails: get("n_snails", 2.0) as u32,
            phi_ext: get("phi_ext", 0.33),
            flux: Grid::range(0.0, 0.5, 11),
            input: None,
        }
    }

    pub fn fixed(&self) -> SnailFixed {
        SnailFixed {
            e_j: josephson_energy_mhz(self.l_j),
            asymmetry: self.asymmetry,
            n_junctions: self.n_junctions,
            n_snails: self.n_snails,
        }
    }

    pub fn spec(&self) -> SnailSpec {
        self.fixed().spec(self.e_c, self.e_l, self.phi_ext)
    }
}

impl Default for SnailSection {
    fn default() -> Self {
        Self::from_reference(&DeviceReference::packaged())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillationSection {
    /// `(t, y)` CSV to fit instead of a simulated transmon trace.
    pub input: Option<PathBuf>,
}

/// A fully resolved run: what to execute, with which parameters, and where
/// the artifacts go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Worker threads; zero uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_params")]
    pub params: SystemParams,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub detuning: DetuningSection,
    #[serde(default)]
    pub chi: ChiSection,
    #[serde(default)]
    pub projected: ProjectedSection,
    #[serde(default)]
    pub stark: StarkSection,
    #[serde(default)]
    pub snail: SnailSection,
    #[serde(default)]
    pub oscillation: OscillationSection,
}

fn default_out() -> PathBuf {
    PathBuf::from("kerrcat-out")
}

fn default_params() -> SystemParams {
    DeviceReference::packaged().system_params()
}

/// Command-line values layered over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    /// `dotted.key=value` assignments, applied in order.
    pub set: Vec<String>,
}

impl RunConfig {
    /// Parses TOML config text and applies `overrides`.
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            Error::Config(e.to_string().trim_end().to_string())
        })?;
        Self::from_table(table, overrides)
    }

    /// Reads a TOML config, or the `config` record of a run manifest when
    /// the file ends in `.json`.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let config = manifest
                .get("config")
                .ok_or_else(|| Error::Config(format!("{} has no `config` record", path.display())))?;
            let table: toml::Table = serde_json::from_value(drop_nulls(config.clone()))
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            Self::from_table(table, overrides)
        } else {
            Self::parse(&text, overrides)
        }
    }

    fn from_table(mut table: toml::Table, o: &Overrides) -> Result<Self> {
        if let Some(s) = &o.scenario {
            table.insert("scenario".into(), toml::Value::String(s.clone()));
        }
        if let Some(p) = &o.out {
            table.insert("out".into(), toml::Value::String(p.display().to_string()));
        }
        if let Some(w) = o.workers {
            table.insert("workers".into(), toml::Value::Integer(w as i64));
        }
        if let Some(s) = o.seed {
            table.insert("seed".into(), toml::Value::Integer(s as i64));
        }
        for assignment in &o.set {
            apply_assignment(&mut table, assignment)?;
        }
        match table.get("scenario") {
            None => return Err(Error::Config("missing scenario".into())),
            Some(toml::Value::String(s)) => {
                let scenario = Scenario::parse(s)?;
                scenario_param_defaults(&mut table, scenario)?;
            }
            Some(v) => return Err(Error::Config(format!("scenario must be a string, got {v}"))),
        }
        let cfg: RunConfig = toml::Table::try_into(table)
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        Ok(cfg)
    }

    /// Checks everything that does not need the filesystem.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.integrator.dt > 0.0 && self.integrator.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "integrator.dt".into(),
                reason: format!("must be positive, got {}", self.integrator.dt),
            });
        }
        Ok(())
    }

    /// SHA-256 of everything that determines the numeric output; the output
    /// directory and worker count are excluded.
    pub fn inputs_hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.workers = 0;
        let text = serde_json::to_string(&c).expect("config serialises");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Fills the sweep section with the scenario's default grids.
    pub fn resolve_defaults(&mut self) {
        let s = &mut self.sweep;
        match self.scenario {
            Scenario::Fig2Map | Scenario::DetuningScan | Scenario::ChiAblation => {
                s.axis.get_or_insert(Grid::range(-PI, PI, 41));
                s.times.get_or_insert(Grid::range(0.0, 10.0, 101));
            }
            Scenario::Fig3Sweep => {
                // Past ~2.3 the drive hybridises the cat manifold with the
                // gap and the rate saturates, first for small cats.
                s.axis.get_or_insert(Grid::range(0.5, 2.0, 8));
                s.times.get_or_insert(Grid::range(0.0, 2.0, 200));
            }
            Scenario::OscillationFit => {
                s.times.get_or_insert(Grid::range(0.0, 2.0, 201));
            }
            _ => {}
        }
    }
}

/// Per-scenario parameter defaults, applied only where the user left the
/// key unset: the phase maps run at the stronger drive used for the Fig. 2
/// family, and the projected comparison switches the interaction on and
/// off with a smooth envelope.
fn scenario_param_defaults(table: &mut toml::Table, scenario: Scenario) -> Result<()> {
    let (key, value) = match scenario {
        Scenario::Fig2Map | Scenario::DetuningScan | Scenario::ChiAblation => ("xi", PHASE_MAP_XI),
        Scenario::ProjectedCompare => ("ramp", PROJECTED_RAMP),
        _ => return Ok(()),
    };
    let params = table
        .entry("params")
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .ok_or_else(|| Error::Config("`params` must be a table".into()))?;
    params.entry(key).or_insert(toml::Value::Float(value));
    Ok(())
}

/// Sets `a.b.c = value` in `table`, creating intermediate tables. The value
/// is read as a TOML literal, falling back to a bare string.
fn apply_assignment(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{assignment}`")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("bad key in `{assignment}`")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().expect("non-empty key");
    let mut node = table;
    for p in parts {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{p}` in `{key}` is not a table")))?;
    }
    node.insert(leaf.to_string(), value);
    Ok(())
}

/// TOML has no null; absent optional fields are simply left out.
fn drop_nulls(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(m) => Value::Object(
            m.into_iter()
                .filter(|(_, v)| !v.is_null())
                .map(|(k, v)| (k, drop_nulls(v)))
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.into_iter().map(drop_nulls).collect()),
        other => other,
    }
}
