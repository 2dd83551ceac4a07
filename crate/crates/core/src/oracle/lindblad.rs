//! Dense Lindblad integrator: adaptive Dormand-Prince on the full
//! density matrix, channel-wise dissipator in the instantaneous
//! eigenbasis evaluated at the exact schedule position of every stage.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bath::{gamma, lamb_shift, BathParams, LambShiftConfig};
use crate::model::Model;
use crate::spectral::eigendecompose;
use crate::{Error, Result};

type CMat = DMatrix<Complex64>;

/// Integrator options.
#[derive(Debug, Clone, Copy)]
pub struct LindbladOptions {
    pub rtol: f64,
    pub atol: f64,
    pub lamb: LambShiftConfig,
    /// Refuse sectors above this qubit count (oracle guard).
    pub max_qubits: usize,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            lamb: LambShiftConfig::default(),
            max_qubits: super::ORACLE_MAX_QUBITS,
        }
    }
}

/// Linear-interpolation table for S(omega), precomputed once so the
/// integrator does not re-run the principal-value quadrature at every
/// right-hand-side evaluation. Two segments: dense where S curves (|w|
/// up to a few tens of temperatures), coarse out to the spectral span.
struct LambTable {
    inner_max: f64,
    inner_step: f64,
    inner: Vec<f64>,
    outer_max: f64,
    outer_step: f64,
    /// Values on [-outer_max, outer_max], coarse.
    outer: Vec<f64>,
}

impl LambTable {
    fn build(bath: &BathParams, cfg: &LambShiftConfig, omega_max: f64) -> Result<Self> {
        let inner_max = (40.0 * bath.temperature).min(omega_max);
        let n_in = 20_001usize;
        let inner_step = 2.0 * inner_max / (n_in - 1) as f64;
        let mut inner = Vec::with_capacity(n_in);
        for i in 0..n_in {
            let w = -inner_max + inner_step * i as f64;
            inner.push(lamb_shift(w, bath, cfg)?);
        }
        let outer_max = omega_max.max(inner_max * 1.5);
        let n_out = 8_001usize;
        let outer_step = 2.0 * outer_max / (n_out - 1) as f64;
        let mut outer = Vec::with_capacity(n_out);
        for i in 0..n_out {
            let w = -outer_max + outer_step * i as f64;
            outer.push(lamb_shift(w, bath, cfg)?);
        }
        Ok(Self {
            inner_max,
            inner_step,
            inner,
            outer_max,
            outer_step,
            outer,
        })
    }

    fn at(&self, w: f64) -> f64 {
        let (lo, step, values) = if w.abs() <= self.inner_max {
            (-self.inner_max, self.inner_step, &self.inner)
        } else {
            (-self.outer_max, self.outer_step, &self.outer)
        };
        let x = (w - lo) / step;
        let i = (x.floor() as isize).clamp(0, values.len() as isize - 2) as usize;
        let f = (x - i as f64).clamp(0.0, 1.0);
        values[i] * (1.0 - f) + values[i + 1] * f
    }
}

/// Result of one oracle integration.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    /// Instantaneous ground-state population at each checkpoint.
    pub rho11: Vec<f64>,
    /// Diagnostics accumulated over the run.
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
    pub min_eigenvalue: f64,
    /// Final density matrix in the |w> basis.
    pub final_rho: CMat,
}

/// Dense density-matrix integrator for a model + bath.
pub struct DenseLindblad {
    model: Model,
    bath: BathParams,
    opts: LindbladOptions,
    lamb_table: Option<LambTable>,
}

impl DenseLindblad {
    pub fn new(model: Model, bath: BathParams, opts: LindbladOptions) -> Result<Self> {
        if model.sector.n() > opts.max_qubits {
            return Err(Error::OracleGuard(model.sector.n()));
        }
        let lamb_table = if opts.lamb.enabled && bath.eta > 0.0 {
            // bound the Bohr frequencies by the extreme spectral span
            let mut omega_max = 1.0_f64;
            for i in 0..=64 {
                let s = i as f64 / 64.0;
                let h = model.assemble_hq(s)?;
                let eig = eigendecompose(&h, s, None)?;
                let span = eig.energies[eig.dim() - 1] - eig.energies[0];
                omega_max = omega_max.max(1.1 * span);
            }
            Some(LambTable::build(&bath, &opts.lamb, omega_max)?)
        } else {
            None
        };
        Ok(Self {
            model,
            bath,
            opts,
            lamb_table,
        })
    }

    fn rhs(&self, t: f64, rho: &CMat, s_of_t: &dyn Fn(f64) -> f64) -> Result<CMat> {
        let n = self.model.dim();
        let s = s_of_t(t);
        let h = self.model.assemble_hq(s)?;
        let eig = eigendecompose(&h, s, None)?;
        let coupling = self.model.sector.ops().coupling_diag();
        // A = V^T diag(c) V
        let mut scaled = eig.vectors.clone();
        for w in 0..n {
            for k in 0..n {
                scaled[(w, k)] *= coupling[w];
            }
        }
        let a = eig.vectors.transpose() * &scaled;

        let vc = eig.vectors.map(|x| Complex64::new(x, 0.0));
        let rt = vc.transpose() * rho * &vc;

        let mut drt = CMat::zeros(n, n);
        // decay channels (a != b): population feed and out-rates
        let mut out = vec![0.0_f64; n];
        let mut feed = vec![0.0_f64; n];
        for aa in 0..n {
            for b in 0..n {
                if aa == b {
                    continue;
                }
                let rate = gamma(eig.energies[b] - eig.energies[aa], &self.bath)
                    * a[(aa, b)]
                    * a[(aa, b)];
                out[b] += rate;
                feed[aa] += rate * rt[(b, b)].re;
            }
        }
        let g0 = gamma(0.0, &self.bath);
        let d: Vec<f64> = (0..n).map(|k| a[(k, k)]).collect();
        // Lamb-shift diagonal
        let mut ls = vec![0.0_f64; n];
        if let Some(table) = &self.lamb_table {
            for b in 0..n {
                for aa in 0..n {
                    if aa != b {
                        ls[b] += table.at(eig.energies[b] - eig.energies[aa])
                            * a[(aa, b)]
                            * a[(aa, b)];
                    }
                }
                ls[b] += table.at(0.0) * d[b] * d[b];
            }
        }
        for x in 0..n {
            for y in 0..n {
                let mut v = Complex64::new(0.0, 0.0);
                // coherent part: i [rho, H] in the eigenbasis
                let de = (eig.energies[x] + ls[x]) - (eig.energies[y] + ls[y]);
                v += Complex64::new(0.0, -de) * rt[(x, y)];
                // anticommutator of the decay channels
                v -= 0.5 * (out[x] + out[y]) * rt[(x, y)];
                // collective dephasing
                v += g0 * (d[x] * d[y] - 0.5 * (d[x] * d[x] + d[y] * d[y])) * rt[(x, y)];
                if x == y {
                    v += Complex64::new(feed[x], 0.0);
                }
                drt[(x, y)] = v;
            }
        }
        Ok(&vc * drt * vc.transpose())
    }

    /// Integrate from the ground state of H_Q(0) to `t_end`, sampling
    /// rho_11 at the given checkpoint times.
    pub fn run(
        &self,
        s_of_t: impl Fn(f64) -> f64,
        t_end: f64,
        checkpoints: &[f64],
    ) -> Result<OracleRun> {
        let n = self.model.dim();
        let h0 = self.model.assemble_hq(s_of_t(0.0))?;
        let eig0 = eigendecompose(&h0, 0.0, None)?;
        let psi0 = eig0.vectors.column(0);
        let mut rho = CMat::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                rho[(x, y)] = Complex64::new(psi0[x] * psi0[y], 0.0);
            }
        }

        let mut cps: Vec<f64> = checkpoints.to_vec();
        cps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out = OracleRun {
            t: Vec::new(),
            s: Vec::new(),
            rho11: Vec::new(),
            max_trace_drift: 0.0,
            max_hermiticity_drift: 0.0,
            min_eigenvalue: 0.0,
            final_rho: rho.clone(),
        };

        let mut t = 0.0_f64;
        let mut dt = (t_end / 1e4).min(0.1).max(1e-6);
        let mut cp_idx = 0;
        // consume checkpoints at or before t = 0
        while cp_idx < cps.len() && cps[cp_idx] <= 0.0 {
            self.record(&mut out, 0.0, &rho, &s_of_t)?;
            cp_idx += 1;
        }

        while t < t_end - 1e-12 {
            let mut target = t + dt;
            let mut hit_cp = false;
            if cp_idx < cps.len() && cps[cp_idx] <= target + 1e-12 {
                target = cps[cp_idx];
                hit_cp = true;
            }
            let h = (target - t).max(1e-12);
            let (next, err) = self.dp_step(t, &rho, h, &s_of_t)?;
            let tol = self.opts.atol
                + self.opts.rtol * next.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if err <= tol || h <= 1e-10 {
                rho = next;
                t = target;
                if hit_cp {
                    self.record(&mut out, t, &rho, &s_of_t)?;
                    cp_idx += 1;
                }
                let grow = 0.9 * (tol / err.max(1e-300)).powf(0.2);
                dt = (h * grow.clamp(0.2, 5.0)).min(t_end / 10.0);
            } else {
                let shrink = 0.9 * (tol / err).powf(0.25);
                dt = h * shrink.clamp(0.1, 0.9);
            }
        }
        while cp_idx < cps.len() {
            self.record(&mut out, t_end, &rho, &s_of_t)?;
            cp_idx += 1;
        }

        // final invariant sweep
        let trace: Complex64 = (0..n).map(|i| rho[(i, i)]).sum();
        out.max_trace_drift = out.max_trace_drift.max((trace.re - 1.0).abs() + trace.im.abs());
        let mut herm = 0.0_f64;
        for x in 0..n {
            for y in 0..n {
                herm = herm.max((rho[(x, y)] - rho[(y, x)].conj()).norm());
            }
        }
        out.max_hermiticity_drift = out.max_hermiticity_drift.max(herm);
        out.min_eigenvalue = min_eig_hermitian(&rho);
        if out.min_eigenvalue < -1e-8 {
            return Err(Error::PositivityLost(out.min_eigenvalue));
        }
        out.final_rho = rho;
        Ok(out)
    }

    fn record(
        &self,
        out: &mut OracleRun,
        t: f64,
        rho: &CMat,
        s_of_t: &dyn Fn(f64) -> f64,
    ) -> Result<()> {
        let s = s_of_t(t);
        let h = self.model.assemble_hq(s)?;
        let eig = eigendecompose(&h, s, None)?;
        let n = self.model.dim();
        let mut p = Complex64::new(0.0, 0.0);
        for x in 0..n {
            for y in 0..n {
                p += Complex64::new(eig.vectors[(x, 0)], 0.0)
                    * rho[(x, y)]
                    * Complex64::new(eig.vectors[(y, 0)], 0.0);
            }
        }
        out.t.push(t);
        out.s.push(s);
        out.rho11.push(p.re);
        let trace: Complex64 = (0..n).map(|i| rho[(i, i)]).sum();
        out.max_trace_drift = out
            .max_trace_drift
            .max((trace.re - 1.0).abs() + trace.im.abs());
        Ok(())
    }

    /// One Dormand-Prince 5(4) stage; returns (y_next, error_estimate).
    fn dp_step(
        &self,
        t: f64,
        y: &CMat,
        h: f64,
        s_of_t: &dyn Fn(f64) -> f64,
    ) -> Result<(CMat, f64)> {
        let k1 = self.rhs(t, y, s_of_t)?;
        let k2 = self.rhs(t + h / 5.0, &(y + &k1 * cr(h / 5.0)), s_of_t)?;
        let k3 = self.rhs(
            t + 3.0 * h / 10.0,
            &(y + &k1 * cr(3.0 * h / 40.0) + &k2 * cr(9.0 * h / 40.0)),
            s_of_t,
        )?;
        let k4 = self.rhs(
            t + 4.0 * h / 5.0,
            &(y + &k1 * cr(44.0 * h / 45.0) - &k2 * cr(56.0 * h / 15.0) + &k3 * cr(32.0 * h / 9.0)),
            s_of_t,
        )?;
        let k5 = self.rhs(
            t + 8.0 * h / 9.0,
            &(y + &k1 * cr(19372.0 * h / 6561.0) - &k2 * cr(25360.0 * h / 2187.0)
                + &k3 * cr(64448.0 * h / 6561.0)
                - &k4 * cr(212.0 * h / 729.0)),
            s_of_t,
        )?;
        let k6 = self.rhs(
            t + h,
            &(y + &k1 * cr(9017.0 * h / 3168.0) - &k2 * cr(355.0 * h / 33.0)
                + &k3 * cr(46732.0 * h / 5247.0)
                + &k4 * cr(49.0 * h / 176.0)
                - &k5 * cr(5103.0 * h / 18656.0)),
            s_of_t,
        )?;
        let y5 = y
            + &k1 * cr(35.0 * h / 384.0)
            + &k3 * cr(500.0 * h / 1113.0)
            + &k4 * cr(125.0 * h / 192.0)
            - &k5 * cr(2187.0 * h / 6784.0)
            + &k6 * cr(11.0 * h / 84.0);
        let k7 = self.rhs(t + h, &y5, s_of_t)?;
        // 4th-order solution for the error estimate
        let y4 = y
            + &k1 * cr(5179.0 * h / 57600.0)
            + &k3 * cr(7571.0 * h / 16695.0)
            + &k4 * cr(393.0 * h / 640.0)
            - &k5 * cr(92097.0 * h / 339200.0)
            + &k6 * cr(187.0 * h / 2100.0)
            + &k7 * cr(h / 40.0);
        let err = (&y5 - &y4)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        Ok((y5, err))
    }
}

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Smallest eigenvalue of a Hermitian complex matrix via the real
/// symmetric embedding [[Re, -Im], [Im, Re]].
pub fn min_eig_hermitian(rho: &CMat) -> f64 {
    let n = rho.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for x in 0..n {
        for y in 0..n {
            let z = rho[(x, y)];
            m[(x, y)] = z.re;
            m[(x + n, y + n)] = z.re;
            m[(x + n, y)] = z.im;
            m[(x, y + n)] = -z.im;
        }
    }
    let (vals, _) = crate::spectral::jacobi_eigh(&m);
    vals.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
}

#[allow(dead_code)]
fn purity(rho: &CMat) -> f64 {
    let p = rho * rho;
    (0..rho.nrows()).map(|i| p[(i, i)].re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnnealSchedule, ProblemHamiltonian, ProblemKind, SpinSector};

    fn linear_schedule() -> AnnealSchedule {
        let samples: Vec<(f64, f64, f64)> = (0..=200)
            .map(|i| {
                let s = i as f64 / 200.0;
                (s, 1.0 - s, s)
            })
            .collect();
        AnnealSchedule::from_samples(samples, "<linear>").unwrap()
    }

    fn model_n4() -> Model {
        Model::new(
            SpinSector::new(4).unwrap(),
            ProblemHamiltonian::new(ProblemKind::PSpin, 4, Some(3)).unwrap(),
            linear_schedule(),
        )
        .unwrap()
    }

    #[test]
    fn guard_rejects_large_sectors() {
        let m = Model::new(
            SpinSector::new(20).unwrap(),
            ProblemHamiltonian::new(ProblemKind::PSpin, 20, Some(19)).unwrap(),
            linear_schedule(),
        )
        .unwrap();
        let bath = BathParams::new(1e-3, 1.57, 1000.0).unwrap();
        assert!(matches!(
            DenseLindblad::new(m, bath, LindbladOptions::default()),
            Err(Error::OracleGuard(20))
        ));
    }

    #[test]
    fn unitary_limit_preserves_purity_and_trace() {
        let m = model_n4();
        let mut bath = BathParams::new(1e-3, 1.57, 1000.0).unwrap();
        bath.eta = 0.0;
        let oracle = DenseLindblad::new(m, bath, LindbladOptions::default()).unwrap();
        let tau = 10.0;
        let run = oracle
            .run(|t| (t / tau).min(1.0), tau, &[2.5, 5.0, 10.0])
            .unwrap();
        assert!(run.max_trace_drift < 1e-9, "trace drift {}", run.max_trace_drift);
        assert!((purity(&run.final_rho) - 1.0).abs() < 1e-8);
        assert!(run.min_eigenvalue > -1e-8);
    }

    #[test]
    fn thermal_fixed_point_at_constant_h() {
        // hold deep in the problem phase (s = 0.9, where the transverse
        // mixing is small but nonzero); detailed balance must carry the
        // populations to the Gibbs state of the instantaneous Hamiltonian
        let m = model_n4();
        let bath = BathParams::new(2e-2, 1.57, 1000.0).unwrap();
        let beta = bath.beta();
        let opts = LindbladOptions {
            lamb: LambShiftConfig {
                enabled: false,
                ..Default::default()
            },
            ..Default::default()
        };
        let oracle = DenseLindblad::new(m, bath, opts).unwrap();
        let hold = 12_000.0;
        let run = oracle.run(|_| 0.9, hold, &[hold]).unwrap();
        let h = oracle.model.assemble_hq(0.9).unwrap();
        let eig = eigendecompose(&h, 0.9, None).unwrap();
        let e = &eig.energies;
        let z: f64 = (0..e.len()).map(|k| (-beta * (e[k] - e[0])).exp()).sum();
        for k in 0..e.len() {
            let want = (-beta * (e[k] - e[0])).exp() / z;
            let mut got = Complex64::new(0.0, 0.0);
            for x in 0..e.len() {
                for y in 0..e.len() {
                    got += cr(eig.vectors[(x, k)]) * run.final_rho[(x, y)] * cr(eig.vectors[(y, k)]);
                }
            }
            assert!(
                (got.re - want).abs() < 0.02,
                "level {k}: got {} want {want}",
                got.re
            );
        }
        assert!(run.max_trace_drift < 1e-8);
    }

    #[test]
    fn trace_conserved_dissipative() {
        let m = model_n4();
        let bath = BathParams::new(1e-3, 1.57, 1000.0).unwrap();
        let oracle = DenseLindblad::new(m, bath, LindbladOptions::default()).unwrap();
        let tau = 10.0;
        let run = oracle
            .run(|t| (t / tau).min(1.0), tau, &[5.0, 10.0])
            .unwrap();
        assert!(run.max_trace_drift < 1e-9, "drift {}", run.max_trace_drift);
        assert!(run.max_hermiticity_drift < 1e-10);
        assert!(run.min_eigenvalue > -1e-8);
    }
}
