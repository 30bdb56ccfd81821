//! The time-series CSV (`docs/series.md`).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::diagnostics::BoundCertificate;
use crate::energy::{EnergyLedger, LocalizedEnergies};

/// One row of `series.csv`. Quantities of disabled monitors are NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub d_mu: f64,
    pub d_lambda: f64,
    pub cumulative_dissipation: f64,
    pub identity_residual: f64,
    pub radius: f64,
    pub max_jacobian_ratio: f64,
    pub max_v_over_r: f64,
    pub max_vx_over_rx: f64,
    pub gx_l2: f64,
    pub boundary_stress_residual: f64,
}

pub const SERIES_COLUMNS: [&str; 13] = [
    "t",
    "kinetic",
    "potential",
    "d_mu",
    "d_lambda",
    "cumulative_dissipation",
    "identity_residual",
    "radius",
    "max_jacobian_ratio",
    "max_v_over_r",
    "max_vx_over_rx",
    "gx_l2",
    "boundary_stress_residual",
];

impl SeriesRow {
    /// A row with only `t` and `radius` set.
    pub fn blank(t: f64, radius: f64) -> Self {
        let nan = f64::NAN;
        Self {
            t,
            kinetic: nan,
            potential: nan,
            d_mu: nan,
            d_lambda: nan,
            cumulative_dissipation: nan,
            identity_residual: nan,
            radius,
            max_jacobian_ratio: nan,
            max_v_over_r: nan,
            max_vx_over_rx: nan,
            gx_l2: nan,
            boundary_stress_residual: nan,
        }
    }

    pub fn with_energy(mut self, ledger: &EnergyLedger, e0: f64) -> Self {
        self.kinetic = ledger.kinetic;
        self.potential = ledger.potential;
        self.d_mu = ledger.d_mu;
        self.d_lambda = ledger.d_lambda;
        self.cumulative_dissipation = ledger.cumulative_dissipation;
        self.identity_residual = ledger.identity_residual(e0);
        self
    }

    pub fn with_bounds(mut self, cert: &BoundCertificate) -> Self {
        self.max_jacobian_ratio = cert.max_jacobian_ratio;
        self.max_v_over_r = cert.max_v_over_r;
        self.max_vx_over_rx = cert.max_vx_over_rx;
        self
    }

    fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.kinetic,
            self.potential,
            self.d_mu,
            self.d_lambda,
            self.cumulative_dissipation,
            self.identity_residual,
            self.radius,
            self.max_jacobian_ratio,
            self.max_v_over_r,
            self.max_vx_over_rx,
            self.gx_l2,
            self.boundary_stress_residual,
        ]
    }

    /// Certificate rebuilt from the bound columns; `gamma_cap` is unknown.
    pub fn certificate(&self) -> BoundCertificate {
        BoundCertificate {
            t: self.t,
            max_jacobian_ratio: self.max_jacobian_ratio,
            max_v_over_r: self.max_v_over_r,
            max_vx_over_rx: self.max_vx_over_rx,
            radius: self.radius,
            gamma_cap: f64::NAN,
            alpha: self.max_jacobian_ratio.cbrt(),
            beta: self.max_v_over_r.max(self.max_vx_over_rx),
        }
    }
}

/// 17 significant digits; round-trips every finite binary64 value.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn write_table<const K: usize>(
    path: &Path,
    header: &[&str; K],
    rows: impl Iterator<Item = [f64; K]>,
) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(header).map_err(|e| IoError::csv(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_value(*v)))
            .map_err(|e| IoError::csv(path, e))?;
    }
    let mut inner = w
        .into_inner()
        .map_err(|e| IoError::file(path, e.into_error()))?;
    inner.flush().map_err(|e| IoError::file(path, e))
}

pub fn write_series(series: &[SeriesRow], path: &Path) -> Result<(), IoError> {
    write_table(path, &SERIES_COLUMNS, series.iter().map(SeriesRow::values))
}

pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| IoError::csv(path, e))?;
    let headers = r.headers().map_err(|e| IoError::csv(path, e))?.clone();
    if let Some(missing) = SERIES_COLUMNS
        .iter()
        .find(|c| !headers.iter().any(|h| h == **c))
    {
        return Err(IoError::Schema {
            path: path.to_path_buf(),
            field: missing.to_string(),
            message: "missing column".into(),
        });
    }
    r.deserialize()
        .collect::<Result<Vec<SeriesRow>, _>>()
        .map_err(|e| IoError::csv(path, e))
}

pub const LOCALIZED_COLUMNS: [&str; 5] = ["t", "frak_e0", "frak_e1", "frak_d0", "frak_d1"];

pub fn write_localized(series: &[LocalizedEnergies], path: &Path) -> Result<(), IoError> {
    let rows = series.iter().map(|l| {
        [
            l.t,
            l.frak_e0,
            l.frak_e1.unwrap_or(f64::NAN),
            l.frak_d0,
            l.frak_d1.unwrap_or(f64::NAN),
        ]
    });
    write_table(path, &LOCALIZED_COLUMNS, rows)
}
