//! Experiment configuration: one TOML file with a section per module.
//!
//! Every output file embeds the FNV-1a hash of the raw config bytes and
//! of the schedule table it references, so results stay attributable to
//! their exact inputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bath::{BathParams, LambShiftConfig};
use crate::model::{AnnealSchedule, Model, ProblemHamiltonian, ProblemKind, SpinSector};
use crate::protocol::PauseProtocol;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ProblemKind,
    pub n: usize,
    #[serde(default)]
    pub p: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub eta: f64,
    pub temperature: f64,
    pub omega_c: f64,
    #[serde(default = "default_true")]
    pub lamb_shift: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub tau_ns: f64,
    #[serde(default)]
    pub pause_s: Option<f64>,
    #[serde(default)]
    pub pause_ns: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt_ns: f64,
    #[serde(default = "default_grid")]
    pub spectral_grid: usize,
    #[serde(default = "default_outputs")]
    pub output_points: usize,
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Emit per-trajectory jump logs (JSON lines) for debugging.
    #[serde(default)]
    pub jump_log: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub pause_points: Vec<f64>,
    pub pause_lengths_ns: Vec<f64>,
    #[serde(default = "default_sweep_trajectories")]
    pub trajectories: usize,
}

fn default_true() -> bool {
    true
}
fn default_trajectories() -> usize {
    5000
}
fn default_sweep_trajectories() -> usize {
    1000
}
fn default_dt() -> f64 {
    0.01
}
fn default_grid() -> usize {
    2001
}
fn default_outputs() -> usize {
    501
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("runs/out")
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            trajectories: default_trajectories(),
            seed: 0,
            dt_ns: default_dt(),
            spectral_grid: default_grid(),
            output_points: default_outputs(),
            workers: 0,
            out_dir: default_out_dir(),
            jump_log: false,
        }
    }
}

/// Parsed and validated experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub schedule: ScheduleSection,
    pub bath: BathSection,
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(skip)]
    pub config_hash: u64,
    #[serde(skip)]
    pub schedule_hash: u64,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        let text = String::from_utf8_lossy(&bytes);
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Toml(e.to_string()))?;
        cfg.config_hash = fnv1a(&bytes);
        // schedule path is relative to the config file
        if cfg.schedule.path.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.schedule.path = dir.join(&cfg.schedule.path);
            }
        }
        let sched_bytes = fs::read(&cfg.schedule.path).map_err(|e| {
            Error::Config(format!(
                "cannot read schedule file {}: {e}",
                cfg.schedule.path.display()
            ))
        })?;
        cfg.schedule_hash = fnv1a(&sched_bytes);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.kind == ProblemKind::PSpin && self.model.p.is_none() {
            return Err(Error::MissingExponent);
        }
        self.pause_protocol().validate()?;
        if self.run.dt_ns <= 0.0 {
            return Err(Error::Config(format!("dt_ns must be positive, got {}", self.run.dt_ns)));
        }
        if self.run.spectral_grid < 2 {
            return Err(Error::Config("spectral_grid needs at least 2 points".into()));
        }
        if self.run.output_points < 2 {
            return Err(Error::Config("output_points needs at least 2".into()));
        }
        if self.run.trajectories == 0 {
            return Err(Error::Config("trajectories must be >= 1".into()));
        }
        BathParams::new(
            self.bath.eta.max(f64::MIN_POSITIVE),
            self.bath.temperature,
            self.bath.omega_c,
        )?;
        if let Some(sweep) = &self.sweep {
            if sweep.pause_points.is_empty() || sweep.pause_lengths_ns.is_empty() {
                return Err(Error::Config("sweep grids must be non-empty".into()));
            }
            for &sp in &sweep.pause_points {
                if !(0.0..=1.0).contains(&sp) {
                    return Err(Error::Config(format!("sweep pause point {sp} outside [0, 1]")));
                }
            }
            for &lp in &sweep.pause_lengths_ns {
                if lp < 0.0 {
                    return Err(Error::Config(format!("sweep pause length {lp} negative")));
                }
            }
        }
        Ok(())
    }

    pub fn bath_params(&self) -> Result<BathParams> {
        // eta = 0 is the unitary limit; BathParams requires positive eta
        // for the thermal functions, so it is carried through separately
        if self.bath.eta == 0.0 {
            let mut p = BathParams::new(1.0, self.bath.temperature, self.bath.omega_c)?;
            p.eta = 0.0;
            Ok(p)
        } else {
            BathParams::new(self.bath.eta, self.bath.temperature, self.bath.omega_c)
        }
    }

    pub fn lamb_config(&self) -> LambShiftConfig {
        LambShiftConfig {
            enabled: self.bath.lamb_shift,
            ..Default::default()
        }
    }

    pub fn pause_protocol(&self) -> PauseProtocol {
        PauseProtocol {
            tau: self.protocol.tau_ns,
            pause_s: self.protocol.pause_s,
            pause_len: self.protocol.pause_ns,
        }
    }

    pub fn build_model(&self) -> Result<Model> {
        let sector = SpinSector::new(self.model.n)?;
        let problem = ProblemHamiltonian::new(self.model.kind, self.model.n, self.model.p)?;
        let schedule = AnnealSchedule::load(&self.schedule.path)?;
        Model::new(sector, problem, schedule)
    }
}

/// FNV-1a 64-bit hash, used for provenance stamps in output files.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}
