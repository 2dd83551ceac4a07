//! Dissipative quantum annealing of permutation-symmetric spin models.
//!
//! The fully-connected ferromagnetic p-spin model (and its Grover-like
//! search limit) lives entirely in the maximum-total-spin sector, so an
//! n-qubit anneal reduces to an (n+1)-dimensional problem. This crate
//! builds those Hamiltonians, couples them to an Ohmic bath through the
//! adiabatic Lindblad master equation, and unravels the dynamics with
//! Monte Carlo wave-function (quantum jump) trajectories. A pause can be
//! inserted mid-anneal to exploit thermal relaxation, and sweep tooling
//! maps fidelity over pause time and duration.
//!
//! Units: energies and frequencies are angular, in units of 1e9 rad/s
//! ("angular GHz"); time is in ns. With that convention phase = energy
//! times time with no 2*pi factor anywhere.

pub mod bath;
pub mod constants;
pub mod error;
pub mod expm;
pub mod mcwf;
pub mod model;
pub mod oracle;
pub mod protocol;
pub mod spectral;

pub use bath::{BathParams, LambShiftConfig, ValidityReport};
pub use error::Error;
pub use mcwf::{EffectiveTables, RunResult, TrajectoryRecord};

pub use model::{
    AnnealSchedule, CollectiveOperators, ProblemHamiltonian, ProblemKind, SpinSector,
};
pub use oracle::{DenseLindblad, SaturationFit, TwoLevelModel};
pub use protocol::{ExperimentConfig, PauseProtocol, SweepGrid};
pub use spectral::{EigenSystem, JumpTable, SpectralGrid};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
