//! Published reference values compared by `reproduce-paper`. The numbers
//! live in a versioned data file, not in code, so each row carries its own
//! citation and tolerance.

use serde::{Deserialize, Serialize};

use fluxcant::{Error, Result};

pub const REFERENCE_JSON: &str = include_str!("../data/reference_values.json");

/// Which device variant a row applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefCase {
    /// Example device as given (ω_i = 2π·12000 rad/s).
    Stiff,
    /// Same device with the torsional stiffness removed (ω_i = 0).
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    #[serde(rename = "case")]
    pub case_: RefCase,
    pub quantity: String,
    pub published: f64,
    pub rel_tol: f64,
    pub unit: String,
    pub provenance: String,
    pub citation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ReferenceFile {
    description: String,
    rows: Vec<ReferenceRow>,
}

pub fn reference_rows() -> Result<Vec<ReferenceRow>> {
    let file: ReferenceFile = serde_json::from_str(REFERENCE_JSON)
        .map_err(|e| Error::InvalidParameter(format!("reference table is malformed: {e}")))?;
    Ok(file.rows)
}
