//! Command-line driver: spectra, anneal runs, pause sweeps, validity
//! reports, oracle comparisons and saturation fits.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use spinpause_core::bath::check_validity;
use spinpause_core::oracle::fit_saturation;
use spinpause_core::protocol::{self, report, ExperimentConfig, SweepGrid};

#[derive(Parser)]
#[command(
    name = "spinpause",
    about = "Dissipative quantum annealing of permutation-symmetric spin models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-thread budget (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Override the output directory from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the lowest eigenvalues over the schedule plus the minimal gap.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of levels to emit.
        #[arg(long, default_value_t = 10)]
        levels: usize,
        /// Number of s samples.
        #[arg(long, default_value_t = 501)]
        points: usize,
    },
    /// Run the configured anneal (with pause, if configured) and write
    /// observables, populations and a summary.
    Anneal {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep fidelity over the configured pause grid; resumable.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Skip cells already present in the output file.
        #[arg(long)]
        resume: bool,
    },
    /// Weak-coupling validity report for the configured instance.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the trajectory ensemble against the dense density-matrix
    /// integrator (small sectors only).
    OracleCompare {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of comparison checkpoints.
        #[arg(long, default_value_t = 20)]
        checkpoints: usize,
    },
    /// Fit the saturation law to (l_p, Phi) samples from a CSV file.
    Fit {
        /// CSV with columns l_p,phi (comments with # allowed).
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
        /// Fixed offset l0 (ns).
        #[arg(long, default_value_t = 100.0)]
        l0: f64,
    },
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)
        .with_context(|| format!("loading {}", common.config.display()))?;
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.run.out_dir = out.clone();
    }
    let workers = if common.workers > 0 {
        common.workers
    } else {
        cfg.run.workers
    };
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .ok();
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum {
            common,
            levels,
            points,
        } => {
            let cfg = load_config(&common)?;
            let model = cfg.build_model()?;
            let dump = protocol::compute_spectrum(&model, levels, points)?;
            fs::create_dir_all(&cfg.run.out_dir)?;
            let path = cfg.run.out_dir.join("spectrum.csv");
            report::write_spectrum(&path, &cfg, &dump)?;
            println!("{}", dump.min_gap_note);
            println!("wrote {}", path.display());
        }
        Command::Anneal { common } => {
            let cfg = load_config(&common)?;
            let result = protocol::run_anneal(&cfg)?;
            println!(
                "fidelity = {:.6} +- {:.6}  (M = {}, jumps/traj = {:.2})",
                result.fidelity, result.fidelity_err, result.trajectories, result.jumps_mean
            );
            println!("outputs in {}", cfg.run.out_dir.display());
        }
        Command::Sweep { common, resume } => {
            let cfg = load_config(&common)?;
            let Some(sweep_cfg) = cfg.sweep.clone() else {
                bail!("config has no [sweep] section");
            };
            let grid = SweepGrid {
                pause_points: sweep_cfg.pause_points.clone(),
                pause_lengths: sweep_cfg.pause_lengths_ns.clone(),
                trajectories: sweep_cfg.trajectories,
            };
            let model = cfg.build_model()?;
            let tables = protocol::build_tables(&cfg, &model)?;
            fs::create_dir_all(&cfg.run.out_dir)?;
            let out_path = cfg.run.out_dir.join("sweep.csv");
            let outcome = protocol::run_sweep(&cfg, &tables, &grid, &out_path, resume)?;
            println!(
                "sweep: {} computed, {} skipped, {} failed -> {}",
                outcome.computed,
                outcome.skipped,
                outcome.failures.len(),
                out_path.display()
            );
            for (sp, lp, err) in &outcome.failures {
                eprintln!("cell (s_p={sp}, l_p={lp}) failed: {err}");
            }
        }
        Command::Validate { common } => {
            let cfg = load_config(&common)?;
            let model = cfg.build_model()?;
            let (s_delta, delta, h) = protocol::validity_inputs(&model)?;
            let bath = cfg.bath_params()?;
            let protocol_def = cfg.pause_protocol();
            let report = check_validity(
                &bath,
                delta,
                h,
                protocol_def.tau,
                protocol_def.total_time() - protocol_def.tau,
            );
            println!("# instance: s_delta = {s_delta:.4}, Delta = {delta:.4}, h = {h:.1}");
            print!("{}", report.render());
        }
        Command::OracleCompare {
            common,
            checkpoints,
        } => {
            let cfg = load_config(&common)?;
            let cmp = protocol::oracle_compare(&cfg, checkpoints)?;
            fs::create_dir_all(&cfg.run.out_dir)?;
            let path = cfg.run.out_dir.join("oracle_compare.csv");
            protocol::write_oracle_comparison(&path, &cmp)?;
            println!(
                "max |z| = {:.3} over {} checkpoints -> {}",
                cmp.max_abs_z,
                cmp.rows.len(),
                path.display()
            );
        }
        Command::Fit { data, l0 } => {
            let text =
                fs::read_to_string(&data).with_context(|| format!("reading {}", data.display()))?;
            let mut points = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') || line.starts_with("l_p") {
                    continue;
                }
                let cols: Vec<_> = line.split(',').map(str::trim).collect();
                if cols.len() < 2 {
                    continue;
                }
                let l: f64 = cols[0].parse().context("bad l_p value")?;
                let phi: f64 = cols[1].parse().context("bad phi value")?;
                points.push((l, phi));
            }
            let fit = fit_saturation(&points, l0)?;
            print!("{}", fit.render());
        }
    }
    Ok(())
}
