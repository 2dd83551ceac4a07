//! Independent verification machinery.
//!
//! The dense density-matrix integrator solves the same master equation
//! as the trajectory engine but through a completely different route
//! (adaptive Runge-Kutta on rho, instantaneous eigensystems evaluated at
//! the exact s of each stage, no Trotter step, no grid lookup), so
//! agreement between the two is meaningful. The two-level model and the
//! saturation fitter implement the closed-form analyses used to read off
//! the physics.

mod fit;
mod lindblad;
mod two_level;

pub use fit::{fit_saturation, SaturationFit};
pub use lindblad::{DenseLindblad, LindbladOptions, OracleRun};
pub use two_level::{S1Grouping, TwoLevelModel};

/// Dimension guard for oracle use: (n+1)^2 density-matrix integration
/// stays cheap only for small sectors.
pub const ORACLE_MAX_QUBITS: usize = 12;
