//! Monte Carlo wave-function unraveling of the adiabatic Lindblad equation.
//!
//! Between jumps the unnormalized ket evolves under the non-Hermitian
//! H_eff(s) = H_Q + H_LS - (i/2) sum_alpha C_alpha^dag C_alpha with
//! C_alpha = sqrt(gamma(omega_alpha)) L_alpha. Jump times come from the
//! waiting-time construction: a threshold r is drawn once and the state
//! evolves until its squared norm decays to r.
//!
//! Everything schedule-dependent is precomputed on a uniform s grid:
//! eigensystems, jump channels, rates, Lamb shifts and one cached step
//! propagator per grid point. Trajectories then share the tables
//! read-only.

mod average;
mod rng;
mod trajectory;

pub use average::{average, RunResult};

pub use rng::{cell_seed, trajectory_rng};
pub use trajectory::{run_trajectory, JumpEvent, TrajectoryRecord};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bath::{gamma, lamb_shift, BathParams, LambShiftConfig};
use crate::model::Model;
use crate::spectral::SpectralGrid;
use crate::{Error, Result};

type CMat = DMatrix<Complex64>;

/// Per-grid-point pieces of the effective Hamiltonian and jump rates.
#[derive(Debug, Clone)]
pub struct EffPoint {
    /// Eigenvector matrix, column-major flat copy (dim x dim).
    pub vecs: Vec<f64>,
    /// lambda_b = eps_b + ls_b - (i/2) Gamma_b; the eigenbasis
    /// representation of H_eff when `diagonal` holds.
    pub lambda: Vec<Complex64>,
    /// Total decay rate per eigenstate, Gamma_b >= 0.
    pub gamma_total: Vec<f64>,
    /// Lamb-shift diagonal in the eigenbasis.
    pub lamb_diag: Vec<f64>,
    /// gamma(omega_alpha) per channel, aligned with the jump table.
    pub channel_gamma: Vec<f64>,
    /// Cached full-step propagator exp(-i H_eff dt), row-major flat.
    pub propagator: Vec<Complex64>,
    /// True when H_eff is diagonal in the instantaneous eigenbasis
    /// (no degenerate cross terms); enables the analytic in-step and
    /// pause evolution.
    pub diagonal: bool,
}

/// Immutable precomputed tables shared by all trajectories of a run.
pub struct EffectiveTables {
    pub grid: SpectralGrid,
    pub points: Vec<EffPoint>,
    pub dim: usize,
    /// The full step the cached propagators were built for (ns).
    pub dt: f64,
    pub bath: BathParams,
    pub lamb: LambShiftConfig,
}

impl EffectiveTables {
    /// Precompute tables for `model` against `bath` on a uniform s grid.
    ///
    /// `dt` must be the exact step the run will use, since the cached
    /// propagators bake it in.
    pub fn build(
        model: &Model,
        bath: &BathParams,
        lamb: &LambShiftConfig,
        grid_points: usize,
        dt: f64,
    ) -> Result<Self> {
        assert!(dt > 0.0);
        let grid = SpectralGrid::build(model, grid_points)?;
        let dim = model.dim();
        let eta_zero = bath.eta == 0.0;

        let points: Vec<EffPoint> = grid
            .points
            .par_iter()
            .map(|(eig, jt)| -> Result<EffPoint> {
                let n = dim;
                let mut channel_gamma = Vec::with_capacity(jt.channels.len());
                let mut channel_shift = Vec::with_capacity(jt.channels.len());
                for ch in &jt.channels {
                    if eta_zero {
                        channel_gamma.push(0.0);
                        channel_shift.push(0.0);
                    } else {
                        channel_gamma.push(gamma(ch.omega, bath));
                        channel_shift.push(if lamb.enabled {
                            lamb_shift(ch.omega, bath, lamb)?
                        } else {
                            0.0
                        });
                    }
                }

                // (L_alpha^dag L_alpha)_{b b'} = sum over members with a
                // shared upper index a; off-diagonal terms only connect
                // degenerate eigenstates.
                let mut gamma_mat = DMatrix::<f64>::zeros(n, n);
                let mut lamb_mat = DMatrix::<f64>::zeros(n, n);
                for (ci, ch) in jt.channels.iter().enumerate() {
                    let (g, sh) = (channel_gamma[ci], channel_shift[ci]);
                    if g == 0.0 && sh == 0.0 {
                        continue;
                    }
                    for &(a, b, x) in &ch.members {
                        for &(a2, b2, y) in &ch.members {
                            if a == a2 {
                                gamma_mat[(b, b2)] += g * x * y;
                                lamb_mat[(b, b2)] += sh * x * y;
                            }
                        }
                    }
                }
                let mut diagonal = true;
                'outer: for b in 0..n {
                    for b2 in 0..n {
                        if b != b2
                            && (gamma_mat[(b, b2)].abs() > 1e-14
                                || lamb_mat[(b, b2)].abs() > 1e-14)
                        {
                            diagonal = false;
                            break 'outer;
                        }
                    }
                }

                let gamma_total: Vec<f64> = (0..n).map(|b| gamma_mat[(b, b)]).collect();
                let lamb_diag: Vec<f64> = (0..n).map(|b| lamb_mat[(b, b)]).collect();
                let lambda: Vec<Complex64> = (0..n)
                    .map(|b| {
                        Complex64::new(eig.energies[b] + lamb_diag[b], -0.5 * gamma_total[b])
                    })
                    .collect();

                // H_eff in the w basis and its cached step propagator
                let mut eff_eig = CMat::zeros(n, n);
                for b in 0..n {
                    for b2 in 0..n {
                        let re = if b == b2 { eig.energies[b] } else { 0.0 } + lamb_mat[(b, b2)];
                        eff_eig[(b, b2)] = Complex64::new(re, -0.5 * gamma_mat[(b, b2)]);
                    }
                }
                let vc = eig.vectors.map(|x| Complex64::new(x, 0.0));
                let h_eff = &vc * eff_eig * vc.transpose();
                let arg = h_eff.map(|z| z * Complex64::new(0.0, -dt));
                let prop = crate::expm::expm(&arg);
                if prop.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFiniteState { t: 0.0 });
                }

                let mut vecs = vec![0.0; n * n];
                for k in 0..n {
                    for w in 0..n {
                        vecs[k * n + w] = eig.vectors[(w, k)];
                    }
                }
                let mut propagator = vec![Complex64::new(0.0, 0.0); n * n];
                for i in 0..n {
                    for j in 0..n {
                        propagator[i * n + j] = prop[(i, j)];
                    }
                }
                Ok(EffPoint {
                    vecs,
                    lambda,
                    gamma_total,
                    lamb_diag,
                    channel_gamma,
                    propagator,
                    diagonal,
                })
            })
            .collect::<Result<_>>()?;

        Ok(Self {
            grid,
            points,
            dim,
            dt,
            bath: *bath,
            lamb: *lamb,
        })
    }

    pub fn nearest(&self, s: f64) -> usize {
        self.grid.nearest(s)
    }

    /// Ground state of H_Q(0) as a complex ket.
    pub fn initial_state(&self) -> Vec<Complex64> {
        let eig = self.grid.eig(0);
        (0..self.dim)
            .map(|w| Complex64::new(eig.vectors[(w, 0)], 0.0))
            .collect()
    }
}

/// Resolve the actual uniform step: the largest dt <= requested that
/// divides tau into an integer number of steps.
pub fn effective_step(tau: f64, dt_requested: f64) -> (f64, usize) {
    let n = (tau / dt_requested).ceil().max(1.0) as usize;
    (tau / n as f64, n)
}

/// Where an observable sample falls inside the protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputInstant {
    /// At a ramp step boundary (step index 0..=n_steps). When the index
    /// equals the pause boundary the sample is taken before the pause.
    RampBoundary { step: usize },
    /// During the pause, `offset` ns after the pause begins.
    Pause { offset: f64 },
}

/// One requested observable sample.
#[derive(Debug, Clone, Copy)]
pub struct OutputPoint {
    pub instant: OutputInstant,
    /// Wall time of the sample (ns).
    pub t: f64,
    /// Schedule position s(t).
    pub s: f64,
    /// Grid index to read the instantaneous ground state from.
    pub grid_idx: usize,
}

/// Discretized execution plan for one protocol.
pub struct StepPlan {
    pub tau: f64,
    pub dt: f64,
    pub n_steps: usize,
    /// Ramp boundary index at which the pause is inserted.
    pub pause_after_step: Option<usize>,
    pub pause_len: f64,
    pub outputs: Vec<OutputPoint>,
}

impl StepPlan {
    /// Build a plan for a ramp of `tau` ns with an optional pause, with
    /// `n_out` samples uniform in wall time. Samples falling on the ramp
    /// snap to the nearest step boundary.
    pub fn new(
        tables: &EffectiveTables,
        tau: f64,
        pause_s: Option<f64>,
        pause_len: f64,
        dt_requested: f64,
        n_out: usize,
    ) -> Self {
        let (dt, n_steps) = effective_step(tau, dt_requested);
        assert!(
            (dt - tables.dt).abs() < 1e-12,
            "tables were built for dt = {}, plan needs {}",
            tables.dt,
            dt
        );
        let pause_after_step = pause_s.map(|sp| {
            ((sp.clamp(0.0, 1.0) * tau) / dt).round() as usize
        });
        let l_p = if pause_after_step.is_some() { pause_len } else { 0.0 };
        let total = tau + l_p;
        let t_pause = pause_after_step.map(|k| k as f64 * dt);

        let n_out = n_out.max(2);
        let mut outputs = Vec::with_capacity(n_out);
        for i in 0..n_out {
            let t = total * i as f64 / (n_out - 1) as f64;
            let (instant, s) = match t_pause {
                Some(tp) if t > tp && t < tp + l_p => {
                    (OutputInstant::Pause { offset: t - tp }, tp / tau)
                }
                Some(tp) if t >= tp + l_p => {
                    let step = (((t - l_p) / dt).round() as usize).min(n_steps);
                    (
                        OutputInstant::RampBoundary { step },
                        (step as f64 * dt / tau).min(1.0),
                    )
                }
                _ => {
                    let step = ((t / dt).round() as usize).min(n_steps);
                    (
                        OutputInstant::RampBoundary { step },
                        (step as f64 * dt / tau).min(1.0),
                    )
                }
            };
            let grid_idx = tables.nearest(s);
            outputs.push(OutputPoint {
                instant,
                t,
                s,
                grid_idx,
            });
        }
        Self {
            tau,
            dt,
            n_steps,
            pause_after_step,
            pause_len: l_p,
            outputs,
        }
    }

    pub fn total_time(&self) -> f64 {
        self.tau + self.pause_len
    }
}

/// Run M independent trajectories in parallel and average them.
///
/// Trajectory i draws its randomness from a stream derived from
/// (master_seed, i), so results are independent of thread count and
/// execution order; the averaging pass runs in index order.
pub fn run_ensemble(
    tables: &EffectiveTables,
    plan: &StepPlan,
    master_seed: u64,
    n_traj: usize,
) -> Result<RunResult> {
    run_ensemble_with_records(tables, plan, master_seed, n_traj).map(|(r, _)| r)
}

/// Like [`run_ensemble`] but also hands back the per-trajectory records
/// (for jump logs and population diagnostics).
pub fn run_ensemble_with_records(
    tables: &EffectiveTables,
    plan: &StepPlan,
    master_seed: u64,
    n_traj: usize,
) -> Result<(RunResult, Vec<TrajectoryRecord>)> {
    let psi0 = tables.initial_state();
    let records: Vec<TrajectoryRecord> = (0..n_traj)
        .into_par_iter()
        .map(|i| run_trajectory(tables, plan, &psi0, master_seed, i as u64))
        .collect::<Result<_>>()?;
    let result = average(&records, plan, tables)?;
    Ok((result, records))
}
