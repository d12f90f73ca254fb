//! Report envelope shared by every subcommand.

use carnot_bcp::Backend;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// A certificate or claimed property was rejected (exit code 2).
    Rejected,
}

/// How one numeric field of the result was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub field: String,
    pub backend: Backend,
    /// Absolute tolerance for float results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Provenance {
    pub fn exact(field: &str) -> Self {
        Provenance { field: field.into(), backend: Backend::Exact, tolerance: None }
    }

    pub fn float(field: &str, tolerance: f64) -> Self {
        Provenance { field: field.into(), backend: Backend::Float, tolerance: Some(tolerance) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport<C, R> {
    pub command: String,
    pub status: Status,
    pub config: C,
    pub result: R,
    pub provenance: Vec<Provenance>,
    /// The only field allowed to differ between identical runs.
    pub elapsed_ms: f64,
}

/// Header view used to dispatch on `command` before parsing the typed report.
pub type AnyReport = RunReport<serde_json::Value, serde_json::Value>;
