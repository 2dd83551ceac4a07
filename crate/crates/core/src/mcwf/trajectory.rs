//! Single-trajectory execution: waiting-time jump search inside cached
//! propagator steps, channel selection, and the pause fast path.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{EffPoint, EffectiveTables, OutputInstant, StepPlan};
use crate::{Error, Result};

/// Tolerance on |norm^2 - r| for the in-step jump-time refinement.
const NORM_TOL: f64 = 1e-10;
const MAX_BISECT: usize = 60;

/// One recorded quantum jump.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct JumpEvent {
    /// Wall time of the jump (ns).
    pub t: f64,
    /// Channel index (0 is the dephasing group).
    pub alpha: usize,
    /// Dominant (a, b) member of the channel at the jump.
    pub a: usize,
    pub b: usize,
    /// Channel Bohr frequency (angular GHz).
    pub omega: f64,
}

/// Everything one trajectory reports back.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    /// rho_11 at each plan output.
    pub rho11: Vec<f64>,
    /// Normalized final state in the |w> basis.
    pub final_state: Vec<Complex64>,
    pub jumps: Vec<JumpEvent>,
}

struct Ctx<'a> {
    tables: &'a EffectiveTables,
    plan: &'a StepPlan,
    rng: ChaCha8Rng,
    r: f64,
    out_cursor: usize,
    rho11: Vec<f64>,
    jumps: Vec<JumpEvent>,
}

#[inline]
fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

#[inline]
fn apply_prop(prop: &[Complex64], x: &[Complex64], y: &mut [Complex64]) {
    let n = x.len();
    for (i, yi) in y.iter_mut().enumerate() {
        let row = &prop[i * n..(i + 1) * n];
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, xv) in row.iter().zip(x.iter()) {
            acc += p * xv;
        }
        *yi = acc;
    }
}

/// c_k = <eps_k | psi> using the flat column-major eigenvector copy.
fn to_eigen(pt: &EffPoint, psi: &[Complex64], c: &mut [Complex64]) {
    let n = psi.len();
    for (k, ck) in c.iter_mut().enumerate() {
        let col = &pt.vecs[k * n..(k + 1) * n];
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, p) in col.iter().zip(psi.iter()) {
            acc += p * *v;
        }
        *ck = acc;
    }
}

fn from_eigen(pt: &EffPoint, c: &[Complex64], psi: &mut [Complex64]) {
    let n = c.len();
    for p in psi.iter_mut() {
        *p = Complex64::new(0.0, 0.0);
    }
    for (k, ck) in c.iter().enumerate() {
        let col = &pt.vecs[k * n..(k + 1) * n];
        for (p, v) in psi.iter_mut().zip(col.iter()) {
            *p += ck * *v;
        }
    }
}

/// Evolve eigenbasis coordinates for `dt` under the diagonal lambda.
fn evolve_eigen(pt: &EffPoint, c: &mut [Complex64], dt: f64) {
    for (ck, lam) in c.iter_mut().zip(pt.lambda.iter()) {
        // exp(-i lambda dt) with lambda = E - i Gamma/2:
        // real part lam.im * dt = -Gamma dt / 2 (decay), imag -E dt
        let phase = Complex64::new(lam.im * dt, -lam.re * dt).exp();
        *ck *= phase;
    }
}

/// Squared norm after evolving `c` for `dt` (diagonal decay only).
fn norm2_after(pt: &EffPoint, c: &[Complex64], dt: f64) -> f64 {
    c.iter()
        .zip(pt.gamma_total.iter())
        .map(|(ck, g)| ck.norm_sqr() * (-g * dt).exp())
        .sum()
}

/// Find dt* in (0, dt_max] with norm^2(dt*) = r by bisection; the
/// caller guarantees norm^2(0) > r >= norm^2(dt_max). Terminates within
/// MAX_BISECT halvings or when |norm^2 - r| < NORM_TOL.
fn solve_crossing(pt: &EffPoint, c: &[Complex64], r: f64, dt_max: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = dt_max;
    let mut mid = 0.5 * dt_max;
    for _ in 0..MAX_BISECT {
        mid = 0.5 * (lo + hi);
        let v = norm2_after(pt, c, mid);
        if (v - r).abs() < NORM_TOL {
            return mid;
        }
        if v > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

fn draw_threshold(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if x > 0.0 {
            return x;
        }
    }
}

/// Cumulative-rule channel pick: smallest m with sum_{alpha<=m} P >= mu.
pub(crate) fn select_index(weights: &[f64], mu: f64) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoJumpChannel);
    }
    let mut cum = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cum += w / total;
        if cum >= mu {
            return Ok(i);
        }
    }
    Ok(weights.len() - 1)
}

/// Jump weights Pi_alpha = gamma_alpha * ||L_alpha c||^2 in eigen
/// coordinates.
fn jump_weights(
    tables: &EffectiveTables,
    grid_idx: usize,
    c: &[Complex64],
    weights: &mut Vec<f64>,
    scratch: &mut [Complex64],
) {
    let pt = &tables.points[grid_idx];
    let jt = tables.grid.jump(grid_idx);
    weights.clear();
    for (ci, ch) in jt.channels.iter().enumerate() {
        let g = pt.channel_gamma[ci];
        if g == 0.0 {
            weights.push(0.0);
            continue;
        }
        let w = if ch.members.len() == 1 {
            let (_, b, el) = ch.members[0];
            el * el * c[b].norm_sqr()
        } else {
            for z in scratch.iter_mut() {
                *z = Complex64::new(0.0, 0.0);
            }
            for &(a, b, el) in &ch.members {
                scratch[a] += c[b] * el;
            }
            scratch.iter().map(|z| z.norm_sqr()).sum()
        };
        weights.push(g * w);
    }
}

/// Apply channel `alpha` to eigen coordinates and renormalize; returns
/// the dominant (a, b) member for the log.
fn apply_jump(
    tables: &EffectiveTables,
    grid_idx: usize,
    alpha: usize,
    c: &mut Vec<Complex64>,
    scratch: &mut Vec<Complex64>,
) -> Result<(usize, usize)> {
    let jt = tables.grid.jump(grid_idx);
    let ch = &jt.channels[alpha];
    scratch.clear();
    scratch.resize(c.len(), Complex64::new(0.0, 0.0));
    let mut dominant = (0usize, 0usize);
    let mut best = -1.0;
    for &(a, b, el) in &ch.members {
        let contrib = c[b] * el;
        scratch[a] += contrib;
        let mag = contrib.norm_sqr();
        if mag > best {
            best = mag;
            dominant = (a, b);
        }
    }
    let n2 = norm2(scratch);
    if !(n2 > 0.0) {
        return Err(Error::ZeroNormJump);
    }
    let inv = 1.0 / n2.sqrt();
    for (ck, sk) in c.iter_mut().zip(scratch.iter()) {
        *ck = sk * inv;
    }
    Ok(dominant)
}

impl<'a> Ctx<'a> {
    fn record_ramp_outputs(&mut self, step: usize, psi: &[Complex64]) {
        let n2 = norm2(psi);
        while self.out_cursor < self.plan.outputs.len() {
            let out = &self.plan.outputs[self.out_cursor];
            match out.instant {
                OutputInstant::RampBoundary { step: s } if s == step => {
                    let eig = self.tables.grid.eig(out.grid_idx);
                    let mut amp = Complex64::new(0.0, 0.0);
                    for (w, p) in psi.iter().enumerate() {
                        amp += p * eig.vectors[(w, 0)];
                    }
                    self.rho11.push(amp.norm_sqr() / n2);
                    self.out_cursor += 1;
                }
                _ => break,
            }
        }
    }

    /// Consume pause outputs with offset <= upto; `c` holds the eigen
    /// coordinates at pause offset `elapsed`.
    fn record_pause_outputs(&mut self, pt: &EffPoint, c: &[Complex64], elapsed: f64, upto: f64) {
        while self.out_cursor < self.plan.outputs.len() {
            let out = &self.plan.outputs[self.out_cursor];
            match out.instant {
                OutputInstant::Pause { offset } if offset <= upto + 1e-12 => {
                    let dt_rel = (offset - elapsed).max(0.0);
                    let n2 = norm2_after(pt, c, dt_rel);
                    let p1 = c[0].norm_sqr() * (-pt.gamma_total[0] * dt_rel).exp();
                    self.rho11.push(p1 / n2);
                    self.out_cursor += 1;
                }
                _ => break,
            }
        }
    }

    /// Advance `psi` through one cached-propagator step, handling any
    /// number of jumps inside the step. `t0` is the wall time at the
    /// step start.
    fn ramp_step(
        &mut self,
        grid_idx: usize,
        psi: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
        t0: f64,
    ) -> Result<()> {
        let pt = &self.tables.points[grid_idx];
        apply_prop(&pt.propagator, psi, scratch);
        let n2 = norm2(scratch);
        if !n2.is_finite() {
            return Err(Error::NonFiniteState { t: t0 });
        }
        if n2 > self.r {
            std::mem::swap(psi, scratch);
            return Ok(());
        }
        // a jump occurs inside this step
        if pt.diagonal {
            let mut c = vec![Complex64::new(0.0, 0.0); psi.len()];
            to_eigen(pt, psi, &mut c);
            self.jump_cascade_eigen(grid_idx, &mut c, self.tables.dt, t0, None)?;
            from_eigen(&self.tables.points[grid_idx], &c, psi);
        } else {
            self.jump_cascade_dense(grid_idx, psi, self.tables.dt, t0)?;
        }
        Ok(())
    }

    /// Repeated waiting-time search in eigen coordinates over a window
    /// of length `span` at fixed grid point. When `pause_elapsed0` is
    /// set the window is a pause segment and outputs are consumed along
    /// the way.
    fn jump_cascade_eigen(
        &mut self,
        grid_idx: usize,
        c: &mut Vec<Complex64>,
        span: f64,
        t0: f64,
        pause_elapsed0: Option<f64>,
    ) -> Result<()> {
        let mut elapsed = 0.0;
        let mut weights: Vec<f64> = Vec::new();
        let mut scratch = vec![Complex64::new(0.0, 0.0); c.len()];
        loop {
            let pt = &self.tables.points[grid_idx];
            let remaining = span - elapsed;
            let n2_end = norm2_after(pt, c, remaining);
            if !n2_end.is_finite() {
                return Err(Error::NonFiniteState { t: t0 + elapsed });
            }
            if n2_end > self.r {
                if let Some(base) = pause_elapsed0 {
                    self.record_pause_outputs(pt, c, base + elapsed, base + span);
                }
                evolve_eigen(pt, c, remaining);
                return Ok(());
            }
            let dt_star = solve_crossing(pt, c, self.r, remaining);
            if let Some(base) = pause_elapsed0 {
                self.record_pause_outputs(pt, c, base + elapsed, base + elapsed + dt_star);
            }
            evolve_eigen(pt, c, dt_star);
            elapsed += dt_star;
            // select and apply the jump at t*
            jump_weights(self.tables, grid_idx, c, &mut weights, &mut scratch);
            let mu: f64 = self.rng.gen();
            let alpha = select_index(&weights, mu)?;
            let (a, b) = apply_jump(self.tables, grid_idx, alpha, c, &mut scratch)?;
            let omega = self.tables.grid.jump(grid_idx).channels[alpha].omega;
            self.jumps.push(JumpEvent {
                t: t0 + elapsed,
                alpha,
                a,
                b,
                omega,
            });
            self.r = draw_threshold(&mut self.rng);
        }
    }

    /// Dense fallback for grid points whose H_eff is not diagonal in the
    /// eigenbasis (degenerate channel groups): bisect by fractional
    /// matrix exponentials from the window-start state.
    fn jump_cascade_dense(
        &mut self,
        grid_idx: usize,
        psi: &mut Vec<Complex64>,
        span: f64,
        t0: f64,
    ) -> Result<()> {
        let n = psi.len();
        let h_eff = self.dense_h_eff(grid_idx);
        let mut elapsed = 0.0;
        let mut weights: Vec<f64> = Vec::new();
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        let propagate = |state: &[Complex64], dt: f64| -> Vec<Complex64> {
            let arg = h_eff.map(|z| z * Complex64::new(0.0, -dt));
            let p = crate::expm::expm(&arg);
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += p[(i, k)] * state[k];
                }
                out[i] = acc;
            }
            out
        };
        loop {
            let remaining = span - elapsed;
            let endpoint = propagate(psi, remaining);
            let n2_end = norm2(&endpoint);
            if !n2_end.is_finite() {
                return Err(Error::NonFiniteState { t: t0 + elapsed });
            }
            if n2_end > self.r {
                *psi = endpoint;
                return Ok(());
            }
            let mut lo = 0.0;
            let mut hi = remaining;
            let mut state_star = endpoint;
            for _ in 0..MAX_BISECT {
                let mid = 0.5 * (lo + hi);
                let probe = propagate(psi, mid);
                let v = norm2(&probe);
                if (v - self.r).abs() < NORM_TOL {
                    state_star = probe;
                    lo = mid;
                    break;
                }
                if v > self.r {
                    lo = mid;
                } else {
                    hi = mid;
                }
                state_star = probe;
            }
            let dt_star = lo.max(0.5 * (lo + hi));
            *psi = state_star;
            elapsed += dt_star;
            // jump in eigen coordinates
            let pt = &self.tables.points[grid_idx];
            let mut c = vec![Complex64::new(0.0, 0.0); n];
            to_eigen(pt, psi, &mut c);
            jump_weights(self.tables, grid_idx, &c, &mut weights, &mut scratch);
            let mu: f64 = self.rng.gen();
            let alpha = select_index(&weights, mu)?;
            let mut cv = c;
            let (a, b) = apply_jump(self.tables, grid_idx, alpha, &mut cv, &mut scratch)?;
            from_eigen(pt, &cv, psi);
            let omega = self.tables.grid.jump(grid_idx).channels[alpha].omega;
            self.jumps.push(JumpEvent {
                t: t0 + elapsed,
                alpha,
                a,
                b,
                omega,
            });
            self.r = draw_threshold(&mut self.rng);
        }
    }

    fn dense_h_eff(&self, grid_idx: usize) -> nalgebra::DMatrix<Complex64> {
        let n = self.tables.dim;
        let pt = &self.tables.points[grid_idx];
        let jt = self.tables.grid.jump(grid_idx);
        let eig = self.tables.grid.eig(grid_idx);
        let mut eff = nalgebra::DMatrix::<Complex64>::zeros(n, n);
        for b in 0..n {
            eff[(b, b)] = Complex64::new(eig.energies[b], 0.0);
        }
        for (ci, ch) in jt.channels.iter().enumerate() {
            let g = pt.channel_gamma[ci];
            let sh = if self.tables.lamb.enabled && self.tables.bath.eta > 0.0 {
                crate::bath::lamb_shift(ch.omega, &self.tables.bath, &self.tables.lamb)
                    .unwrap_or(0.0)
            } else {
                0.0
            };
            for &(a, m_b, x) in &ch.members {
                for &(a2, m_b2, y) in &ch.members {
                    if a == a2 {
                        eff[(m_b, m_b2)] += Complex64::new(sh * x * y, -0.5 * g * x * y);
                    }
                }
            }
        }
        let vc = eig.vectors.map(|x| Complex64::new(x, 0.0));
        &vc * eff * vc.transpose()
    }

    /// Hold at the pause grid point for `l_p` ns.
    fn pause(&mut self, boundary_step: usize, psi: &mut Vec<Complex64>) -> Result<()> {
        let l_p = self.plan.pause_len;
        if l_p <= 0.0 {
            return Ok(());
        }
        let s_p = boundary_step as f64 * self.plan.dt / self.plan.tau;
        let grid_idx = self.tables.nearest(s_p);
        let t0 = boundary_step as f64 * self.plan.dt;
        let pt = &self.tables.points[grid_idx];
        if pt.diagonal {
            let mut c = vec![Complex64::new(0.0, 0.0); psi.len()];
            to_eigen(pt, psi, &mut c);
            self.jump_cascade_eigen(grid_idx, &mut c, l_p, t0, Some(0.0))?;
            from_eigen(&self.tables.points[grid_idx], &c, psi);
        } else {
            // stepped fallback at the pause point
            let n_sub = (l_p / self.tables.dt).ceil().max(1.0) as usize;
            let sub = l_p / n_sub as f64;
            for k in 0..n_sub {
                let elapsed = k as f64 * sub;
                {
                    let pt = &self.tables.points[grid_idx];
                    let mut cl = vec![Complex64::new(0.0, 0.0); psi.len()];
                    to_eigen(pt, psi, &mut cl);
                    self.record_pause_outputs(pt, &cl, elapsed, elapsed);
                }
                self.jump_cascade_dense(grid_idx, psi, sub, t0 + elapsed)?;
            }
            let pt = &self.tables.points[grid_idx];
            let mut cl = vec![Complex64::new(0.0, 0.0); psi.len()];
            to_eigen(pt, psi, &mut cl);
            self.record_pause_outputs(pt, &cl, l_p, l_p);
        }
        Ok(())
    }
}

/// Run one trajectory to the end of the protocol. Fully deterministic
/// given (master_seed, index).
pub fn run_trajectory(
    tables: &EffectiveTables,
    plan: &StepPlan,
    psi0: &[Complex64],
    master_seed: u64,
    index: u64,
) -> Result<TrajectoryRecord> {
    let mut rng = super::rng::trajectory_rng(master_seed, index);
    let r = draw_threshold(&mut rng);
    let mut ctx = Ctx {
        tables,
        plan,
        rng,
        r,
        out_cursor: 0,
        rho11: Vec::with_capacity(plan.outputs.len()),
        jumps: Vec::new(),
    };
    let mut psi = psi0.to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); psi.len()];

    ctx.record_ramp_outputs(0, &psi);
    if ctx.plan.pause_after_step == Some(0) {
        ctx.pause(0, &mut psi)?;
        ctx.record_ramp_outputs(0, &psi);
    }
    for step in 0..plan.n_steps {
        let s_mid = (step as f64 + 0.5) * plan.dt / plan.tau;
        let grid_idx = tables.nearest(s_mid);
        let mut t0 = step as f64 * plan.dt;
        if let Some(k) = plan.pause_after_step {
            if step >= k {
                t0 += plan.pause_len;
            }
        }
        ctx.ramp_step(grid_idx, &mut psi, &mut scratch, t0)?;
        ctx.record_ramp_outputs(step + 1, &psi);
        if ctx.plan.pause_after_step == Some(step + 1) {
            ctx.pause(step + 1, &mut psi)?;
            ctx.record_ramp_outputs(step + 1, &psi);
        }
    }
    debug_assert_eq!(ctx.out_cursor, plan.outputs.len());

    let n2 = norm2(&psi).sqrt();
    let final_state: Vec<Complex64> = psi.iter().map(|z| z / n2).collect();
    Ok(TrajectoryRecord {
        rho11: ctx.rho11,
        final_state,
        jumps: ctx.jumps,
    })
}
