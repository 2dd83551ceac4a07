//! CSV and JSON writers. Each output embeds the config and schedule
//! hashes so a file can always be traced back to its exact inputs.

use std::fs;
use std::path::{Path, PathBuf};

use crate::mcwf::{RunResult, TrajectoryRecord};
use crate::protocol::run::SpectrumDump;
use crate::protocol::ExperimentConfig;
use crate::{Error, Result};

fn provenance(config: &ExperimentConfig) -> String {
    format!(
        "# config_hash={:016x} schedule_hash={:016x}\n",
        config.config_hash, config.schedule_hash
    )
}

/// Write observables, final populations and the summary for one run.
/// Removes anything it created if a write fails midway.
pub fn write_run_outputs(config: &ExperimentConfig, result: &RunResult, wall_s: f64) -> Result<()> {
    let dir = &config.run.out_dir;
    fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let outcome = (|| -> Result<()> {
        let obs = dir.join("observables.csv");
        write_observables(&obs, config, result)?;
        written.push(obs);
        let pops = dir.join("populations.csv");
        write_populations(&pops, config, result)?;
        written.push(pops);
        let summary = dir.join("summary.json");
        write_summary(&summary, config, result, wall_s)?;
        written.push(summary);
        Ok(())
    })();
    if outcome.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    outcome
}

pub fn write_observables(path: &Path, config: &ExperimentConfig, result: &RunResult) -> Result<()> {
    let mut text = provenance(config);
    text.push_str("s,rho11_mean,rho11_err\n");
    for i in 0..result.s_out.len() {
        text.push_str(&format!(
            "{:.6},{:.8e},{:.8e}\n",
            result.s_out[i], result.rho11_mean[i], result.rho11_err[i]
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_populations(path: &Path, config: &ExperimentConfig, result: &RunResult) -> Result<()> {
    let dim = result.pop_w_mean.len();
    let mut text = provenance(config);
    text.push_str(&format!("# uniform_reference={:.8e}\n", 1.0 / dim as f64));
    text.push_str("w,p_mean,p_err\n");
    for w in 0..dim {
        text.push_str(&format!(
            "{w},{:.8e},{:.8e}\n",
            result.pop_w_mean[w], result.pop_w_err[w]
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_summary(
    path: &Path,
    config: &ExperimentConfig,
    result: &RunResult,
    wall_s: f64,
) -> Result<()> {
    let summary = serde_json::json!({
        "fidelity": result.fidelity,
        "sigma": result.fidelity_err,
        "trajectories": result.trajectories,
        "config_hash": format!("{:016x}", config.config_hash),
        "schedule_hash": format!("{:016x}", config.schedule_hash),
        "wall_clock_s": wall_s,
        "jump_stats": {
            "mean": result.jumps_mean,
            "min": result.jumps_min,
            "max": result.jumps_max,
            "total": result.jumps_total,
        },
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Json(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}

/// Per-trajectory jump events, one JSON object per line.
pub fn write_jump_log(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let mut text = String::new();
    for (i, rec) in records.iter().enumerate() {
        for j in &rec.jumps {
            let line = serde_json::json!({
                "trajectory": i,
                "t": j.t,
                "alpha": j.alpha,
                "a": j.a,
                "b": j.b,
                "omega": j.omega,
            });
            text.push_str(&line.to_string());
            text.push('\n');
        }
    }
    fs::write(path, text)?;
    Ok(())
}

/// Spectrum dump: `s,eps_1,...,eps_L` plus the gap annotation.
pub fn write_spectrum(path: &Path, config: &ExperimentConfig, dump: &SpectrumDump) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let levels = dump.eps.len();
    let mut text = provenance(config);
    text.push_str(&format!("# {}\n", dump.min_gap_note));
    if let Some((sd, gap)) = dump.min_gap {
        text.push_str(&format!("# min_gap_s={sd:.6}\n# min_gap={gap:.6}\n"));
    }
    text.push('s');
    for k in 0..levels {
        text.push_str(&format!(",eps_{}", k + 1));
    }
    text.push('\n');
    for i in 0..dump.s.len() {
        text.push_str(&format!("{:.6}", dump.s[i]));
        for col in &dump.eps {
            text.push_str(&format!(",{:.8e}", col[i]));
        }
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Final-population histogram rows plus the uniform reference line.
pub fn write_histogram(
    path: &Path,
    config: &ExperimentConfig,
    rows: &[(usize, f64, f64)],
    reference: f64,
) -> Result<()> {
    let mut text = provenance(config);
    text.push_str(&format!("# uniform_reference={reference:.8e}\n"));
    text.push_str("w,p_mean,p_err\n");
    for &(w, p, e) in rows {
        text.push_str(&format!("{w},{p:.8e},{e:.8e}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}
