//! Run configuration documents.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use untangle::flow::FlowOptions;
use untangle::{Ball, Point};

use crate::Failure;

/// Optional defaults for the demo commands; command-line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DemoConfig {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub step_size: Option<f64>,
    pub lift_height: Option<f64>,
}

/// Input of `relocate`: one entry per set, one target per set.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RelocateConfig {
    pub sets: Vec<SetConfig>,
    pub targets: Vec<Ball>,
    #[serde(default)]
    pub options: RelocateOptions,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SetConfig {
    /// CSV file, relative to the config file.
    pub csv: PathBuf,
    /// Keep only rows with this label; all rows otherwise.
    pub label: Option<i64>,
    #[serde(default)]
    pub guard: f64,
    /// Required unless the lift route is used.
    pub source: Option<Ball>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RelocateOptions {
    pub step_size: Option<f64>,
    /// Height unit `C` of the lift route.
    pub lift_height: Option<f64>,
    /// Relocate through one extra dimension instead of in place.
    #[serde(default)]
    pub lift: bool,
    pub order: Option<Vec<usize>>,
}

/// Per-set intermediate waypoints, `null` for a planned path.
pub type Waypoints = Vec<Option<Vec<Point>>>;

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

pub fn flow_options(step: Option<f64>) -> Result<FlowOptions, Failure> {
    let mut opts = FlowOptions::default();
    if let Some(h) = step {
        opts.max_step = h;
    }
    opts.validate().map_err(Failure::from)?;
    Ok(opts)
}

pub fn resolve(base: &Path, rel: &Path) -> PathBuf {
    if rel.is_absolute() {
        rel.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(rel)
    }
}
