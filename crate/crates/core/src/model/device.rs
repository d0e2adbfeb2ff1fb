use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::params::{Lifetime, SystemParams};

const PACKAGED: &str = include_str!("../../data/device_reference.csv");

/// Keys every reference ledger must carry.
pub const REQUIRED_KEYS: &[&str] = &[
    "omega_a", "omega_b", "omega_ar", "omega_br", "omega_s", "omega_bs", "omega_cqr", "kappa_ar",
    "kappa_br", "g3", "e_c", "e_l", "l_j", "asymmetry", "n_snails", "phi_ext", "t2e_b", "t_alpha",
    "t_c",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub value: f64,
    pub unit: String,
    pub provenance: String,
}

/// Device parameter ledger, loaded from `key,value,unit,provenance` rows.
///
/// Only some entries feed the dynamics; readout and pump frequencies are
/// carried as metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceReference {
    entries: IndexMap<String, ReferenceEntry>,
}

#[derive(Deserialize)]
struct Row {
    key: String,
    value: f64,
    unit: String,
    provenance: String,
}

impl DeviceReference {
    /// The ledger shipped with the crate.
    pub fn packaged() -> Self {
        Self::from_csv_str(PACKAGED).expect("packaged device reference is valid")
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut entries = IndexMap::new();
        for (line, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row?;
            let entry = ReferenceEntry {
                value: row.value,
                unit: row.unit,
                provenance: row.provenance,
            };
            if entries.insert(row.key.clone(), entry).is_some() {
                return Err(Error::Parse(format!(
                    "duplicate key `{}` on data row {}",
                    row.key,
                    line + 1
                )));
            }
        }
        let reference = Self { entries };
        reference.validate()?;
        Ok(reference)
    }

    pub fn validate(&self) -> Result<()> {
        for key in REQUIRED_KEYS {
            if !self.entries.contains_key(*key) {
                return Err(Error::Parse(format!("device reference lacks `{key}`")));
            }
        }
        for (key, e) in &self.entries {
            if e.provenance.trim().is_empty() {
                return Err(Error::Parse(format!("`{key}` has no provenance")));
            }
            if !e.value.is_finite() {
                return Err(Error::Parse(format!("`{key}` is not finite")));
            }
            if e.unit == "MHz" && e.value <= 0.0 {
                return Err(Error::Parse(format!("frequency `{key}` must be positive")));
            }
        }
        Ok(())
    }

    pub fn entry(&self, key: &str) -> Option<&ReferenceEntry> {
        self.entries.get(key)
    }

    pub fn value(&self, key: &str) -> Result<f64> {
        self.entries
            .get(key)
            .map(|e| e.value)
            .ok_or_else(|| Error::UnknownParameter(key.into()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &ReferenceEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Simulation defaults drawn from the ledger where it has an entry;
    /// the remaining fields keep [`SystemParams::default`].
    pub fn system_params(&self) -> SystemParams {
        let mut p = SystemParams::default();
        let get = |k: &str| self.entries.get(k).map(|e| e.value);
        if let Some(v) = get("k_a") {
            p.k_a = v;
        }
        if let Some(v) = get("chi_ab") {
            p.chi_ab = v;
        }
        for (key, slot) in [
            ("t1_a", &mut p.t1_a),
            ("t2r_a", &mut p.t2r_a),
            ("t1_b", &mut p.t1_b),
            ("t2r_b", &mut p.t2r_b),
        ] {
            if let Some(v) = get(key) {
                *slot = Lifetime::Finite(v);
            }
        }
        p
    }
}
