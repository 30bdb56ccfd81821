use std::path::PathBuf;

use super::config::MonitorFlags;
use super::series::SeriesRow;
use super::snapshot::{snapshot_name, write_snapshot, Snapshot};
use crate::diagnostics::{g_diagnostic, pointwise_bounds};
use crate::energy::{ledger_entry, EnergyLedger};
use crate::error::Result;
use crate::grid::Grid;
use crate::initial::InitialData;
use crate::operators::boundary_stress_residual;
use crate::params::MaterialParams;
use crate::state::State;
use crate::stepper::{Monitor, StepRecord};

/// Monitor producing `series.csv` rows and snapshots every `cadence` steps.
/// The energy ledger is advanced on every step and the final step is always
/// recorded. The initial state gets a snapshot but no row.
pub struct Recorder<'a> {
    grid: &'a Grid,
    init: &'a InitialData,
    params: MaterialParams,
    flags: MonitorFlags,
    cadence: usize,
    snapshot_dir: Option<PathBuf>,
    e0: f64,
    ledger: Option<EnergyLedger>,
    rows: Vec<SeriesRow>,
    pending: Option<(usize, State)>,
    emitted: usize,
}

impl<'a> Recorder<'a> {
    pub fn new(
        grid: &'a Grid,
        init: &'a InitialData,
        params: &MaterialParams,
        flags: MonitorFlags,
        cadence: usize,
    ) -> Self {
        Self {
            grid,
            init,
            params: *params,
            flags,
            cadence: cadence.max(1),
            snapshot_dir: None,
            e0: 0.0,
            ledger: None,
            rows: Vec::new(),
            pending: None,
            emitted: 0,
        }
    }

    /// Also write snapshots into `dir`, which must exist.
    pub fn with_snapshots(mut self, dir: PathBuf) -> Self {
        self.snapshot_dir = Some(dir);
        self
    }

    pub fn rows(&self) -> &[SeriesRow] {
        &self.rows
    }

    fn row(&self, state: &State) -> Result<SeriesRow> {
        let mut row = SeriesRow::blank(state.t, state.radius());
        if let Some(l) = &self.ledger {
            row = row.with_energy(l, self.e0);
        }
        if self.flags.bounds {
            row = row.with_bounds(&pointwise_bounds(state, self.grid, self.init.rho_bar0)?);
        }
        if self.flags.g_diag {
            row.gx_l2 = g_diagnostic(state, self.grid, false).gx_l2;
        }
        row.boundary_stress_residual =
            boundary_stress_residual(state, self.init, &self.params, self.grid);
        Ok(row)
    }

    fn emit(&mut self, index: usize, state: &State) -> Result<()> {
        let row = self.row(state)?;
        self.rows.push(row);
        self.snapshot(index, state)
    }

    fn snapshot(&mut self, index: usize, state: &State) -> Result<()> {
        if let Some(dir) = &self.snapshot_dir {
            let snap = Snapshot::capture(state, index, self.init, &self.params, self.grid)?;
            write_snapshot(&snap, &dir.join(snapshot_name(index)))?;
        }
        self.emitted = index;
        Ok(())
    }

    fn advance_ledger(&mut self, state: &State) -> Result<()> {
        if self.flags.energy {
            let next = ledger_entry(
                state,
                self.ledger.as_ref(),
                self.init,
                self.grid,
                &self.params,
            )?;
            self.ledger = Some(next);
        }
        Ok(())
    }

    /// Records the last observed state if the cadence skipped it.
    pub fn finish(mut self) -> Result<Vec<SeriesRow>> {
        if let Some((index, state)) = self.pending.take() {
            if index != self.emitted {
                self.emit(index, &state)?;
            }
        }
        Ok(self.rows)
    }
}

impl Monitor for Recorder<'_> {
    fn start(&mut self, initial: &State) -> Result<()> {
        self.rows.clear();
        self.ledger = None;
        self.advance_ledger(initial)?;
        self.e0 = self.ledger.map_or(0.0, |l| l.total());
        self.pending = None;
        self.snapshot(0, initial)
    }

    fn observe(&mut self, record: &StepRecord<'_>) -> Result<()> {
        self.advance_ledger(record.state)?;
        if record.index.is_multiple_of(self.cadence) {
            self.emit(record.index, record.state)?;
        }
        self.pending = Some((record.index, record.state.clone()));
        Ok(())
    }
}
