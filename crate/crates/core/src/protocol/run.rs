//! Run orchestration: table precomputation, ensemble execution, file
//! outputs, spectra and the oracle comparison.

use std::path::Path;
use std::time::Instant;

use crate::mcwf::{run_ensemble, run_ensemble_with_records, EffectiveTables, RunResult, StepPlan};
use crate::model::Model;
use crate::oracle::{DenseLindblad, LindbladOptions};
use crate::protocol::report;
use crate::protocol::{ExperimentConfig, PauseProtocol};
use crate::spectral::{eigendecompose, locate_min_gap, SpectralGrid};
use crate::{Error, Result};

/// Precompute the effective tables for a config. Tables depend on the
/// model, bath, grid density and step only, so one set can serve many
/// protocols (sweeps reuse it for every cell).
pub fn build_tables(config: &ExperimentConfig, model: &Model) -> Result<EffectiveTables> {
    let bath = config.bath_params()?;
    let (dt, _) = crate::mcwf::effective_step(config.protocol.tau_ns, config.run.dt_ns);
    EffectiveTables::build(
        model,
        &bath,
        &config.lamb_config(),
        config.run.spectral_grid,
        dt,
    )
}

/// Execute one anneal (with or without pause) and return the averaged
/// observables. Pure computation, no file output.
pub fn run_anneal_with(
    tables: &EffectiveTables,
    protocol: &PauseProtocol,
    dt_requested: f64,
    output_points: usize,
    trajectories: usize,
    master_seed: u64,
) -> Result<RunResult> {
    protocol.validate()?;
    let plan = StepPlan::new(
        tables,
        protocol.tau,
        protocol.pause_s,
        protocol.pause_len,
        dt_requested,
        output_points,
    );
    run_ensemble(tables, &plan, master_seed, trajectories)
}

/// Full `anneal` activity: run the configured protocol and write the
/// observable trace, final populations and a summary JSON into the
/// output directory. On failure any partially written file is removed.
pub fn run_anneal(config: &ExperimentConfig) -> Result<RunResult> {
    let model = config.build_model()?;
    let tables = build_tables(config, &model)?;
    let protocol = config.pause_protocol();
    protocol.validate()?;
    let plan = StepPlan::new(
        &tables,
        protocol.tau,
        protocol.pause_s,
        protocol.pause_len,
        config.run.dt_ns,
        config.run.output_points,
    );
    let t0 = Instant::now();
    let (result, records) = run_ensemble_with_records(
        &tables,
        &plan,
        config.run.seed,
        config.run.trajectories,
    )?;
    let wall = t0.elapsed().as_secs_f64();
    report::write_run_outputs(config, &result, wall)?;
    if config.run.jump_log {
        report::write_jump_log(&config.run.out_dir.join("jumps.jsonl"), &records)?;
    }
    Ok(result)
}

/// Mean final populations of the first `levels` Hamming-weight states,
/// with MC errors and the uniform reference 1/N.
pub fn population_histogram(result: &RunResult, levels: usize) -> (Vec<(usize, f64, f64)>, f64) {
    let dim = result.pop_w_mean.len();
    let l = levels.min(dim);
    let rows = (0..l)
        .map(|w| (w, result.pop_w_mean[w], result.pop_w_err[w]))
        .collect();
    (rows, 1.0 / dim as f64)
}

/// Lowest `levels` eigenvalues on a uniform s grid plus the located
/// minimal gap, for the spectrum dump.
pub struct SpectrumDump {
    pub s: Vec<f64>,
    /// levels x points, eps[k][i].
    pub eps: Vec<Vec<f64>>,
    pub min_gap: Option<(f64, f64)>,
    pub min_gap_note: String,
}

pub fn compute_spectrum(model: &Model, levels: usize, points: usize) -> Result<SpectrumDump> {
    let grid = SpectralGrid::build(model, points.max(2))?;
    let l = levels.min(model.dim());
    let mut s = Vec::with_capacity(grid.len());
    let mut eps = vec![Vec::with_capacity(grid.len()); l];
    for i in 0..grid.len() {
        let eig = grid.eig(i);
        s.push(eig.s);
        for (k, col) in eps.iter_mut().enumerate() {
            col.push(eig.energies[k]);
        }
    }
    let located = locate_min_gap(|x| model.assemble_hq(x), 0.02, 0.98, 1e-6);
    let (min_gap, note) = match located {
        Ok((sd, gap)) => (Some((sd, gap)), format!("min gap {gap:.6} at s = {sd:.6}")),
        Err(e) => (None, format!("gap location: {e}")),
    };
    Ok(SpectrumDump {
        s,
        eps,
        min_gap,
        min_gap_note: note,
    })
}

/// Result rows of an oracle comparison.
pub struct OracleComparison {
    pub rows: Vec<OracleRow>,
    pub max_abs_z: f64,
}

pub struct OracleRow {
    pub s: f64,
    pub rho11_mcwf: f64,
    pub sigma_mc: f64,
    pub rho11_oracle: f64,
    pub abs_diff: f64,
    pub z_score: f64,
}

/// Run both the trajectory ensemble and the dense integrator for the
/// configured protocol and compare rho_11 at `n_checkpoints` uniformly
/// spaced schedule positions.
pub fn oracle_compare(config: &ExperimentConfig, n_checkpoints: usize) -> Result<OracleComparison> {
    if config.model.n > crate::oracle::ORACLE_MAX_QUBITS {
        return Err(Error::OracleGuard(config.model.n));
    }
    let model = config.build_model()?;
    let tables = build_tables(config, &model)?;
    let protocol = config.pause_protocol();
    let result = run_anneal_with(
        &tables,
        &protocol,
        config.run.dt_ns,
        config.run.output_points,
        config.run.trajectories,
        config.run.seed,
    )?;

    let opts = LindbladOptions {
        lamb: config.lamb_config(),
        ..Default::default()
    };
    let oracle = DenseLindblad::new(config.build_model()?, config.bath_params()?, opts)?;
    let total = protocol.total_time();
    // checkpoints away from the endpoints, matched to output samples
    let mut wanted = Vec::with_capacity(n_checkpoints);
    for k in 0..n_checkpoints {
        let f = (k + 1) as f64 / n_checkpoints as f64;
        wanted.push(f * total);
    }
    // snap each wanted time to the closest output sample of the ensemble
    let mut idxs = Vec::new();
    for &tw in &wanted {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &t) in result.t_out.iter().enumerate() {
            let d = (t - tw).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        if idxs.last() != Some(&best) {
            idxs.push(best);
        }
    }
    let times: Vec<f64> = idxs.iter().map(|&i| result.t_out[i]).collect();
    let orun = oracle.run(
        |t| protocol.pause_map(t.clamp(0.0, total)).unwrap_or(1.0),
        total,
        &times,
    )?;

    // At early checkpoints jumps are rare events: an ensemble of M
    // trajectories cannot resolve populations below ~1/M, and the
    // sample-based sigma_MC reads ~0 there because no sample deviated.
    // The z denominator therefore gets the population-resolution floor
    // 1/M, below which agreement is as exact as the unraveling permits.
    let sigma_floor = 1.0 / result.trajectories as f64;
    let mut rows = Vec::new();
    let mut max_abs_z = 0.0_f64;
    for (j, &i) in idxs.iter().enumerate() {
        let mcwf = result.rho11_mean[i];
        let sigma = result.rho11_err[i];
        let oracle_v = orun.rho11[j];
        let diff = (mcwf - oracle_v).abs();
        let z = diff / sigma.max(sigma_floor);
        max_abs_z = max_abs_z.max(z);
        rows.push(OracleRow {
            s: result.s_out[i],
            rho11_mcwf: mcwf,
            sigma_mc: sigma,
            rho11_oracle: oracle_v,
            abs_diff: diff,
            z_score: z,
        });
    }
    Ok(OracleComparison { rows, max_abs_z })
}

/// Write the oracle comparison CSV.
pub fn write_oracle_comparison(path: &Path, cmp: &OracleComparison) -> Result<()> {
    let mut text = String::from("s,rho11_mcwf,sigma_mc,rho11_oracle,abs_diff,z_score\n");
    for r in &cmp.rows {
        text.push_str(&format!(
            "{:.6},{:.8e},{:.8e},{:.8e},{:.8e},{:.4}\n",
            r.s, r.rho11_mcwf, r.sigma_mc, r.rho11_oracle, r.abs_diff, r.z_score
        ));
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Adiabaticity scale h and gap data for the validity report.
pub fn validity_inputs(model: &Model) -> Result<(f64, f64, f64)> {
    let (s_delta, delta) = locate_min_gap(|x| model.assemble_hq(x), 0.02, 0.98, 1e-6)?;
    let h = crate::spectral::adiabatic_h(model, 501)?;
    Ok((s_delta, delta, h))
}

/// Ground-state gap of H_Q at the given s (for reports).
pub fn gap_at(model: &Model, s: f64) -> Result<f64> {
    let h = model.assemble_hq(s)?;
    let eig = eigendecompose(&h, s, None)?;
    Ok(eig.gap(0))
}
