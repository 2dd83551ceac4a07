//! Hamiltonians of the annealing problem in the maximum-total-spin sector.
//!
//! Permutation symmetry confines the dynamics to the (n+1)-dimensional
//! subspace spanned by the Hamming-weight states |w>, w = 0..n, where w
//! counts down spins. All operators here are real and (n+1) x (n+1).

mod problem;
mod schedule;
mod sector;

pub use problem::{pspin_energy, ProblemHamiltonian, ProblemKind};
pub use schedule::{AnnealSchedule, MonotoneCubic};
pub use sector::{CollectiveOperators, SpinSector, MAX_QUBITS};

use nalgebra::DMatrix;

use crate::{Error, Result};

/// The annealing Hamiltonian H_Q(s) = A(s) * (-Sx) + B(s) * diag(problem).
///
/// Bundles the sector operators, the problem diagonal and the schedule so
/// that callers can assemble H_Q at any s in [0, 1].
#[derive(Debug, Clone)]
pub struct Model {
    pub sector: SpinSector,
    pub problem: ProblemHamiltonian,
    pub schedule: AnnealSchedule,
}

impl Model {
    pub fn new(
        sector: SpinSector,
        problem: ProblemHamiltonian,
        schedule: AnnealSchedule,
    ) -> Result<Self> {
        if problem.diagonal().len() != sector.dim() {
            return Err(Error::Config(format!(
                "problem dimension {} does not match sector dimension {}",
                problem.diagonal().len(),
                sector.dim()
            )));
        }
        Ok(Self {
            sector,
            problem,
            schedule,
        })
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    /// H_Q(s), real symmetric, in angular GHz.
    pub fn assemble_hq(&self, s: f64) -> Result<DMatrix<f64>> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::SOutOfRange(s));
        }
        let (a, b) = self.schedule.eval(s);
        Ok(self.assemble_with(a, b))
    }

    /// d/ds H_Q(s) from the schedule's analytic derivative.
    pub fn assemble_dhq(&self, s: f64) -> Result<DMatrix<f64>> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::SOutOfRange(s));
        }
        let (da, db) = self.schedule.eval_derivative(s);
        Ok(self.assemble_with(da, db))
    }

    fn assemble_with(&self, a: f64, b: f64) -> DMatrix<f64> {
        let n1 = self.dim();
        let mut h = DMatrix::<f64>::zeros(n1, n1);
        let sx = self.sector.ops().sx();
        for i in 0..n1 {
            h[(i, i)] = b * self.problem.diagonal()[i];
            if i + 1 < n1 {
                let t = -a * sx[(i, i + 1)];
                h[(i, i + 1)] = t;
                h[(i + 1, i)] = t;
            }
        }
        h
    }
}
