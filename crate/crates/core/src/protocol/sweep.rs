//! Resumable (pause point, pause length) sweeps.
//!
//! Every cell runs with a master seed derived from the cell coordinates,
//! so results are independent of execution order, and a completed sweep
//! re-run with resume enabled performs zero new computation and rewrites
//! a byte-identical results file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::mcwf::{cell_seed, EffectiveTables};
use crate::protocol::run::run_anneal_with;
use crate::protocol::{ExperimentConfig, PauseProtocol};
use crate::Result;

/// The sweep grid and shared base configuration.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub pause_points: Vec<f64>,
    pub pause_lengths: Vec<f64>,
    pub trajectories: usize,
}

/// One completed sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub pause_s: f64,
    pub pause_len: f64,
    pub fidelity: f64,
    pub sigma: f64,
}

/// Canonical key for resume matching: the formatted coordinates used in
/// the CSV, so that a reloaded file matches bit-for-bit.
fn cell_key(pause_s: f64, pause_len: f64) -> String {
    format!("{pause_s:.6},{pause_len:.3}")
}

/// Parse an existing sweep CSV, ignoring comments and the header.
pub fn load_existing(path: &Path) -> Vec<SweepCell> {
    let Ok(text) = fs::read_to_string(path) else {
        return Vec::new();
    };
    let mut cells = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("s_p") {
            continue;
        }
        let cols: Vec<_> = line.split(',').collect();
        if cols.len() != 4 {
            continue;
        }
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.trim().parse().ok()).collect();
        if let Some(v) = parsed {
            cells.push(SweepCell {
                pause_s: v[0],
                pause_len: v[1],
                fidelity: v[2],
                sigma: v[3],
            });
        }
    }
    cells
}

/// Outcome of a sweep: completed cells plus any per-cell failures.
pub struct SweepOutcome {
    pub cells: Vec<SweepCell>,
    pub computed: usize,
    pub skipped: usize,
    pub failures: Vec<(f64, f64, String)>,
}

/// Run the sweep, resuming from `out_path` when `resume` is set.
///
/// The results file is rewritten in canonical grid order on every call;
/// cells already present are never recomputed under resume.
pub fn run_sweep(
    config: &ExperimentConfig,
    tables: &EffectiveTables,
    grid: &SweepGrid,
    out_path: &Path,
    resume: bool,
) -> Result<SweepOutcome> {
    let mut known: BTreeMap<String, SweepCell> = BTreeMap::new();
    if resume {
        for cell in load_existing(out_path) {
            known.insert(cell_key(cell.pause_s, cell.pause_len), cell);
        }
    }

    let mut outcome = SweepOutcome {
        cells: Vec::new(),
        computed: 0,
        skipped: 0,
        failures: Vec::new(),
    };

    for &lp in &grid.pause_lengths {
        for &sp in &grid.pause_points {
            let key = cell_key(sp, lp);
            if let Some(cell) = known.get(&key) {
                outcome.cells.push(*cell);
                outcome.skipped += 1;
                continue;
            }
            let protocol = PauseProtocol::with_pause(config.protocol.tau_ns, sp, lp);
            let seed = cell_seed(config.run.seed, sp, lp);
            match run_anneal_with(
                tables,
                &protocol,
                config.run.dt_ns,
                config.run.output_points,
                grid.trajectories,
                seed,
            ) {
                Ok(result) => {
                    let cell = SweepCell {
                        pause_s: sp,
                        pause_len: lp,
                        fidelity: result.fidelity,
                        sigma: result.fidelity_err,
                    };
                    known.insert(key, cell);
                    outcome.cells.push(cell);
                    outcome.computed += 1;
                }
                Err(e) => {
                    outcome.failures.push((sp, lp, e.to_string()));
                }
            }
        }
    }

    write_sweep_csv(out_path, config, grid, &outcome.cells)?;
    Ok(outcome)
}

/// Rewrite the sweep CSV in canonical order.
pub fn write_sweep_csv(
    path: &Path,
    config: &ExperimentConfig,
    grid: &SweepGrid,
    cells: &[SweepCell],
) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut by_key: BTreeMap<String, &SweepCell> = BTreeMap::new();
    for c in cells {
        by_key.insert(cell_key(c.pause_s, c.pause_len), c);
    }
    let mut text = String::new();
    text.push_str(&format!(
        "# config_hash={:016x} schedule_hash={:016x} trajectories={}\n",
        config.config_hash, config.schedule_hash, grid.trajectories
    ));
    text.push_str("s_p,l_p,fidelity,sigma\n");
    for &lp in &grid.pause_lengths {
        for &sp in &grid.pause_points {
            if let Some(c) = by_key.get(&cell_key(sp, lp)) {
                text.push_str(&format!(
                    "{:.6},{:.3},{:.8e},{:.8e}\n",
                    c.pause_s, c.pause_len, c.fidelity, c.sigma
                ));
            }
        }
    }
    fs::write(path, text)?;
    Ok(())
}
