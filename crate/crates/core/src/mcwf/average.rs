//! Trajectory averaging and Monte Carlo errors.
//!
//! For an observable O the MC error is sigma^2 = sum_m (O_m - Obar)^2
//! / (M (M - 1)). Sums run in trajectory-index order so results do not
//! depend on thread count.

use num_complex::Complex64;

use super::{EffectiveTables, StepPlan, TrajectoryRecord};
use crate::{Error, Result};

/// Averaged observables of one run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// Wall times and schedule positions of the output samples.
    pub t_out: Vec<f64>,
    pub s_out: Vec<f64>,
    /// Instantaneous ground-state population trace.
    pub rho11_mean: Vec<f64>,
    pub rho11_err: Vec<f64>,
    /// Final populations per Hamming weight w.
    pub pop_w_mean: Vec<f64>,
    pub pop_w_err: Vec<f64>,
    /// Final populations per instantaneous eigenstate at s = 1.
    pub pop_eig_mean: Vec<f64>,
    pub pop_eig_err: Vec<f64>,
    /// Fidelity Phi = rho_11 at the end of the protocol.
    pub fidelity: f64,
    pub fidelity_err: f64,
    pub trajectories: usize,
    pub jumps_mean: f64,
    pub jumps_min: usize,
    pub jumps_max: usize,
    pub jumps_total: usize,
}

fn mean_err(samples: impl Fn(usize) -> f64, m: usize) -> (f64, f64) {
    let mut mean = 0.0;
    for i in 0..m {
        mean += samples(i);
    }
    mean /= m as f64;
    if m < 2 {
        return (mean, 0.0);
    }
    let mut ss = 0.0;
    for i in 0..m {
        let d = samples(i) - mean;
        ss += d * d;
    }
    (mean, (ss / (m as f64 * (m as f64 - 1.0))).sqrt())
}

/// Reduce trajectory records to mean observables with MC errors.
pub fn average(
    records: &[TrajectoryRecord],
    plan: &StepPlan,
    tables: &EffectiveTables,
) -> Result<RunResult> {
    let m = records.len();
    if m < 1 {
        return Err(Error::TooFewTrajectories { min: 1, got: m });
    }
    let n_out = plan.outputs.len();
    let dim = tables.dim;
    for rec in records {
        if rec.rho11.len() != n_out || rec.final_state.len() != dim {
            return Err(Error::RecordShape);
        }
    }

    let mut rho11_mean = Vec::with_capacity(n_out);
    let mut rho11_err = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let (mu, sig) = mean_err(|i| records[i].rho11[k], m);
        rho11_mean.push(mu);
        rho11_err.push(sig);
    }

    let mut pop_w_mean = Vec::with_capacity(dim);
    let mut pop_w_err = Vec::with_capacity(dim);
    for w in 0..dim {
        let (mu, sig) = mean_err(|i| records[i].final_state[w].norm_sqr(), m);
        pop_w_mean.push(mu);
        pop_w_err.push(sig);
    }

    let eig_end = tables.grid.eig(tables.grid.len() - 1);
    let mut pop_eig_mean = Vec::with_capacity(dim);
    let mut pop_eig_err = Vec::with_capacity(dim);
    for k in 0..dim {
        let proj = |i: usize| -> f64 {
            let mut amp = Complex64::new(0.0, 0.0);
            for w in 0..dim {
                amp += records[i].final_state[w] * eig_end.vectors[(w, k)];
            }
            amp.norm_sqr()
        };
        let (mu, sig) = mean_err(proj, m);
        pop_eig_mean.push(mu);
        pop_eig_err.push(sig);
    }

    debug_assert!(pop_w_mean.iter().all(|&p| (-1e-12..=1.0 + 1e-8).contains(&p)));
    debug_assert!(pop_w_mean.iter().sum::<f64>() <= 1.0 + 1e-8);

    let jumps: Vec<usize> = records.iter().map(|r| r.jumps.len()).collect();
    let jumps_total: usize = jumps.iter().sum();

    Ok(RunResult {
        t_out: plan.outputs.iter().map(|o| o.t).collect(),
        s_out: plan.outputs.iter().map(|o| o.s).collect(),
        fidelity: *rho11_mean.last().unwrap(),
        fidelity_err: *rho11_err.last().unwrap(),
        rho11_mean,
        rho11_err,
        pop_w_mean,
        pop_w_err,
        pop_eig_mean,
        pop_eig_err,
        trajectories: m,
        jumps_mean: jumps_total as f64 / m as f64,
        jumps_min: jumps.iter().copied().min().unwrap_or(0),
        jumps_max: jumps.iter().copied().max().unwrap_or(0),
        jumps_total,
    })
}
