//! JSON snapshots of the state and its derived fields (`docs/snapshot.md`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_json, IoError};
use crate::diagnostics::g_diagnostic;
use crate::error::Result;
use crate::grid::Grid;
use crate::initial::InitialData;
use crate::operators::cell_fields;
use crate::params::MaterialParams;
use crate::state::{density_field, State};

pub const SNAPSHOT_SCHEMA: &str = "sphvac.snapshot/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotStatus {
    Ok,
    /// The run failed on the following step; this is the last good state.
    LastGoodBeforeFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub schema: String,
    pub status: SnapshotStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub step: usize,
    pub t: f64,
    pub nodes: Vec<f64>,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub cell_centers: Vec<f64>,
    pub density: Vec<f64>,
    pub pressure: Vec<f64>,
    pub stress_b: Vec<f64>,
    /// `𝒢` at the nodes.
    pub g: Vec<f64>,
}

impl Snapshot {
    pub fn capture(
        state: &State,
        step: usize,
        init: &InitialData,
        params: &MaterialParams,
        grid: &Grid,
    ) -> Result<Self> {
        let fields = cell_fields(state, init, params, grid)?;
        Ok(Self {
            schema: SNAPSHOT_SCHEMA.to_string(),
            status: SnapshotStatus::Ok,
            failure: None,
            step,
            t: state.t,
            nodes: grid.nodes().to_vec(),
            r: state.r.clone(),
            v: state.v.clone(),
            cell_centers: grid.cell_centers().to_vec(),
            density: density_field(state, init, grid)?,
            pressure: fields.pressure,
            stress_b: fields.stress_b,
            g: g_diagnostic(state, grid, false).g,
        })
    }

    pub fn flag_failure(mut self, reason: impl Into<String>) -> Self {
        self.status = SnapshotStatus::LastGoodBeforeFailure;
        self.failure = Some(reason.into());
        self
    }

    fn is_finite(&self) -> bool {
        let fields = [
            &self.nodes,
            &self.r,
            &self.v,
            &self.cell_centers,
            &self.density,
            &self.pressure,
            &self.stress_b,
            &self.g,
        ];
        self.t.is_finite() && fields.iter().all(|f| f.iter().all(|v| v.is_finite()))
    }

    pub fn state(&self) -> State {
        State {
            t: self.t,
            r: self.r.clone(),
            v: self.v.clone(),
        }
    }
}

/// JSON numbers use the shortest round-trip representation; non-finite
/// values are not representable and fail the write.
pub fn write_snapshot(snapshot: &Snapshot, path: &Path) -> Result<(), IoError> {
    if !snapshot.is_finite() {
        return Err(IoError::Schema {
            path: path.to_path_buf(),
            field: String::new(),
            message: "snapshot contains non-finite values".into(),
        });
    }
    let text = serde_json::to_string_pretty(snapshot).map_err(|e| IoError::Schema {
        path: path.to_path_buf(),
        field: String::new(),
        message: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(|e| IoError::file(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    let snap: Snapshot = parse_json(&text, path)?;
    if snap.schema != SNAPSHOT_SCHEMA {
        return Err(IoError::Schema {
            path: path.to_path_buf(),
            field: "schema".into(),
            message: format!("expected {SNAPSHOT_SCHEMA}, found {}", snap.schema),
        });
    }
    Ok(snap)
}

/// `snapshots/NNNNNN.json` below the output directory.
pub fn snapshot_name(step: usize) -> String {
    format!("{step:06}.json")
}
