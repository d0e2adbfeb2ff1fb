use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::sweep::MapResult;
use crate::error::Result;

/// Full-precision rendering used in every CSV (17 significant digits).
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes rows of numbers under `header` to `path`.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format_number(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// One CSV per observable, named `{prefix}_{observable}.csv`.
///
/// The header holds the axis name followed by the interaction times; each
/// row starts with its axis value.
pub fn write_map_csv(map: &MapResult, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut header = vec![map.axis.name.clone()];
    header.extend(map.times.iter().map(|t| format_number(*t)));
    let mut written = Vec::new();
    for (name, data) in &map.maps {
        let path = dir.join(format!("{prefix}_{name}.csv"));
        let rows: Vec<Vec<f64>> = map
            .axis
            .values
            .iter()
            .zip(data)
            .map(|(v, r)| std::iter::once(*v).chain(r.iter().copied()).collect())
            .collect();
        write_table(&path, &header, &rows)?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}
