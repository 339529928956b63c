//! Artifact persistence: axis sets, per-dimension models, and run manifests
//! all live in a single output directory and reload bit for bit.

use super::{io_error, PipelineError};
use crate::axes::AxisSet;
use crate::classifier::LogisticModel;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Everything a later run needs to reproduce predictions.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub axes: Option<AxisSet>,
    pub models: BTreeMap<String, LogisticModel>,
}

/// Write `axes.json` and one `model_<dimension>.json` per model.
pub fn save_artifacts(dir: impl AsRef<Path>, artifacts: &Artifacts) -> Result<(), PipelineError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    if let Some(axes) = &artifacts.axes {
        axes.save(dir.join("axes.json"))?;
    }
    for (dimension, model) in &artifacts.models {
        model.save(dir.join(format!("model_{dimension}.json")))?;
    }
    Ok(())
}

/// Load whatever artifacts exist in the directory. Model files are
/// recognized by the `model_<dimension>.json` naming scheme.
pub fn load_artifacts(dir: impl AsRef<Path>) -> Result<Artifacts, PipelineError> {
    let dir = dir.as_ref();
    let mut artifacts = Artifacts::default();
    let axes_path = dir.join("axes.json");
    if axes_path.exists() {
        artifacts.axes = Some(AxisSet::load(&axes_path)?);
    }
    let entries = fs::read_dir(dir).map_err(|e| io_error(dir, e))?;
    let mut names: Vec<String> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| io_error(dir, e))?;
        let name = entry.file_name().to_string_lossy().to_string();
        if let Some(dimension) = name
            .strip_prefix("model_")
            .and_then(|rest| rest.strip_suffix(".json"))
        {
            names.push(dimension.to_string());
        }
    }
    names.sort();
    for dimension in names {
        let model = LogisticModel::load(dir.join(format!("model_{dimension}.json")))?;
        artifacts.models.insert(dimension, model);
    }
    Ok(artifacts)
}

/// Serialize a run manifest (config echo, seeds, row counts). Contains no
/// clocks or environment state, so identical runs write identical bytes.
pub fn write_manifest(
    path: impl AsRef<Path>,
    manifest: &serde_json::Value,
) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(path.as_ref(), text).map_err(|e| io_error(path.as_ref(), e))?;
    Ok(())
}
