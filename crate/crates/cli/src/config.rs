//! Run configuration: one JSON document, all values SI, flags override fields.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use fluxcant::model::DeviceParams;
use fluxcant::potential::{Branch, GridWindow};
use fluxcant::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Junction index and twist branch picking one well out of the landscape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellSelect {
    pub n_index: i64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// T.
    pub b_min: f64,
    pub b_max: f64,
    pub points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { b_min: 0.01, b_max: 0.05, points: 9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceParams,
    /// Well for `analyze`/`groundstate`/`sweep`; first global minimum when
    /// absent.
    pub well: Option<WellSelect>,
    /// Sampling window for `grid`; also overrides the automatic window of
    /// `doublewell`/`eigen` when present.
    pub window: Option<GridWindow>,
    pub n_phi: usize,
    pub n_theta: usize,
    /// Contour-level hint stored in the grid sidecar.
    pub n_levels: usize,
    /// Automatic-window half-width for `doublewell`/`eigen`, in local σ.
    pub margin: f64,
    /// Eigenstate count for `eigen`.
    pub n_states: usize,
    /// Ground-state sampling half-width (marginal σ) and per-axis points.
    pub local_margin: f64,
    pub n_local: usize,
    pub sweep: SweepSpec,
    pub output_format: OutputFormat,
    /// Separability threshold on the dimensionless correlation.
    pub separability_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            device: DeviceParams::example_device(),
            well: None,
            window: None,
            n_phi: 129,
            n_theta: 129,
            n_levels: 25,
            margin: 8.0,
            n_states: 2,
            local_margin: 6.0,
            n_local: 61,
            sweep: SweepSpec::default(),
            output_format: OutputFormat::Csv,
            separability_tol: 1e-12,
        }
    }
}

pub fn parse(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text)
        .map_err(|e| Error::InvalidParameter(format!("malformed config: {e}")))
}

/// Full-fidelity serialization; `parse(to_json(c))` gives back `c` exactly.
pub fn to_json(cfg: &RunConfig) -> Result<String> {
    let mut s = serde_json::to_string_pretty(cfg).map_err(|e| Error::Io(e.into()))?;
    s.push('\n');
    Ok(s)
}

pub fn load(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| {
                Error::InvalidParameter(format!("cannot read config {}: {e}", p.display()))
            })?;
            parse(&text)
        }
    }
}
