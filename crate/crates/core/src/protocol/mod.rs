//! Protocol definition, experiment configuration, sweeps and reports.

mod config;
mod pause;
pub mod report;
pub mod run;
mod sweep;

pub use config::{fnv1a, ExperimentConfig};
pub use pause::PauseProtocol;
pub use run::{
    build_tables, compute_spectrum, gap_at, oracle_compare, population_histogram, run_anneal,
    run_anneal_with, validity_inputs, write_oracle_comparison, OracleComparison, OracleRow,
    SpectrumDump,
};
pub use sweep::{load_existing, run_sweep, write_sweep_csv, SweepCell, SweepGrid, SweepOutcome};
