//! Versioned JSON model files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "params": { "n_c": 20, "dt": 0.2, ... },
//!   "coarse": { "transition": [...], "state_centers": [...] },
//!   "fine": { "kernel_taps": [...], "noise_halfwidth": 0.03 },
//!   "metadata": { "source_tour": "tour-a", "calibrated_at": null }
//! }
//! ```
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so a save/load cycle is bit-exact.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coarse::{check_stochastic, state_center, CoarseModel};
use crate::error::{Error, LoadError, Result};
use crate::fine::FineModel;
use crate::generator::{ModelMetadata, TwoLevelModel};
use crate::model::ModelParams;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u64,
    params: ModelParams,
    coarse: CoarseSection,
    fine: FineSection,
    metadata: MetadataSection,
}

#[derive(Serialize, Deserialize)]
struct CoarseSection {
    transition: Vec<f64>,
    state_centers: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FineSection {
    kernel_taps: Vec<f64>,
    noise_halfwidth: f64,
}

#[derive(Serialize, Deserialize)]
struct MetadataSection {
    source_tour: String,
    calibrated_at: Option<String>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

pub fn to_json(model: &TwoLevelModel) -> Result<String> {
    let file = ModelFile {
        version: FORMAT_VERSION,
        params: model.params,
        coarse: CoarseSection {
            transition: model.coarse.transition().to_vec(),
            state_centers: model.coarse.state_centers().to_vec(),
        },
        fine: FineSection {
            kernel_taps: model.fine.kernel_taps.clone(),
            noise_halfwidth: model.fine.noise_halfwidth,
        },
        metadata: MetadataSection {
            source_tour: model.metadata.source_tour.clone(),
            calibrated_at: model.metadata.calibrated_at.clone(),
        },
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

fn violation(field: &'static str, row: Option<usize>, reason: impl Into<String>) -> LoadError {
    LoadError::Invariant {
        field,
        row,
        reason: reason.into(),
    }
}

pub fn from_json(text: &str) -> Result<TwoLevelModel, LoadError> {
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.version != FORMAT_VERSION {
        return Err(LoadError::UnsupportedVersion {
            found: probe.version,
            supported: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_str(text)?;
    let p = file.params;
    p.validate()
        .map_err(|e| violation("params", None, e.to_string()))?;
    let n = p.n_c;

    let t = &file.coarse.transition;
    if t.len() != n * n {
        return Err(violation(
            "coarse.transition",
            None,
            format!("expected {} entries, got {}", n * n, t.len()),
        ));
    }
    if let Some((row, reason)) = check_stochastic(t, n) {
        return Err(violation("coarse.transition", Some(row), reason));
    }
    let centers = &file.coarse.state_centers;
    if centers.len() != n {
        return Err(violation(
            "coarse.state_centers",
            None,
            format!("expected {n} entries"),
        ));
    }
    if let Some(j) = (0..n).find(|&j| (centers[j] - state_center(j, n)).abs() > 1e-12) {
        return Err(violation(
            "coarse.state_centers",
            Some(j),
            format!("{} does not match the state grid", centers[j]),
        ));
    }

    let coarse = CoarseModel::new(
        n,
        p.dt,
        file.coarse.transition,
        p.smoothing_sigma,
        p.smoothing_support,
    )
    .map_err(|e| violation("coarse", None, e.to_string()))?;
    let fine = FineModel::new(
        file.fine.kernel_taps,
        p.dt,
        file.fine.noise_halfwidth,
        p.cap_threshold,
    )
    .map_err(|e| violation("fine", None, e.to_string()))?;
    let metadata = ModelMetadata {
        source_tour: file.metadata.source_tour,
        calibrated_at: file.metadata.calibrated_at,
    };
    TwoLevelModel::new(p, coarse, fine, metadata)
        .map_err(|e| violation("model", None, e.to_string()))
}

/// Write atomically: temp file in the destination directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn save_model(model: &TwoLevelModel, path: &Path) -> Result<()> {
    write_atomic(path, to_json(model)?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<TwoLevelModel> {
    let text = std::fs::read_to_string(path)?;
    Ok(from_json(&text)?)
}
