//! Levenberg-Marquardt fit of a saturation law.
//!
//! Phi(l_p) = Phi_sat [1 - alpha exp(-(l_p - l0)/T_r)] with l0 fixed;
//! the three free parameters are (Phi_sat, alpha, T_r). Initialization
//! is deterministic: Phi_sat from the largest sample, alpha and T_r from
//! a log-linearized regression of the residuals.

use crate::{Error, Result};

/// Fitted saturation-law parameters with standard-error estimates.
#[derive(Debug, Clone)]
pub struct SaturationFit {
    pub phi_sat: f64,
    pub alpha: f64,
    pub t_r: f64,
    pub l0: f64,
    /// Standard errors of (phi_sat, alpha, t_r).
    pub stderr: [f64; 3],
    pub residual_norm: f64,
    pub iterations: usize,
}

impl SaturationFit {
    pub fn eval(&self, l: f64) -> f64 {
        self.phi_sat * (1.0 - self.alpha * (-(l - self.l0) / self.t_r).exp())
    }

    pub fn render(&self) -> String {
        format!(
            "saturation fit: Phi(l_p) = Phi_sat (1 - alpha exp(-(l_p - l0)/T_r))\n\
             Phi_sat = {:.6} +- {:.6}\n\
             alpha   = {:.6} +- {:.6}\n\
             T_r     = {:.4} +- {:.4} ns\n\
             l0      = {:.4} ns (fixed)\n\
             residual norm = {:.4e}, iterations = {}\n",
            self.phi_sat,
            self.stderr[0],
            self.alpha,
            self.stderr[1],
            self.t_r,
            self.stderr[2],
            self.l0,
            self.residual_norm,
            self.iterations
        )
    }
}

fn model(l: f64, l0: f64, p: &[f64; 3]) -> f64 {
    p[0] * (1.0 - p[1] * (-(l - l0) / p[2]).exp())
}

/// Clamp into the physical box: Phi_sat in (0, 1], T_r > 0.
fn clamp(p: &mut [f64; 3]) {
    p[0] = p[0].clamp(1e-9, 1.0);
    p[1] = p[1].max(0.0);
    p[2] = p[2].max(1e-9);
}

/// Solve a 3x3 linear system by Gaussian elimination with pivoting.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

fn invert3(a: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut out = [[0.0; 3]; 3];
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let col = solve3(a, e)?;
        for i in 0..3 {
            out[i][k] = col[i];
        }
    }
    Some(out)
}

/// Fit the saturation law to (l_p, Phi) samples with l0 fixed.
pub fn fit_saturation(points: &[(f64, f64)], l0: f64) -> Result<SaturationFit> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(l, _)| l >= l0).collect();
    if pts.len() < 4 {
        return Err(Error::TooFewFitPoints {
            min: 4,
            got: pts.len(),
        });
    }
    // deterministic initial guess
    let phi_max = pts.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    let phi0 = (phi_max * 1.0005).clamp(1e-6, 1.0);
    // log-linearized: ln(1 - Phi/phi0) = ln alpha - (l - l0)/T_r, using
    // only samples still visibly away from saturation
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    let resid_first = (1.0 - pts[0].1 / phi0).max(0.0);
    for &(l, phi) in &pts {
        let resid = 1.0 - phi / phi0;
        if resid > (1e-2 * resid_first).max(1e-10) {
            xs.push(l - l0);
            zs.push(resid.ln());
        }
    }
    let span = (pts.last().unwrap().0 - l0).max(1.0);
    let (mut alpha0, mut tr0) = (0.2, span / 3.0);
    if xs.len() >= 2 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let mz = zs.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxz: f64 = xs.iter().zip(&zs).map(|(x, z)| (x - mx) * (z - mz)).sum();
        if sxx > 0.0 && sxz < 0.0 {
            let slope = sxz / sxx;
            tr0 = -1.0 / slope;
            alpha0 = (mz - slope * mx).exp();
        }
    }

    let rss = |p: &[f64; 3]| -> f64 {
        pts.iter()
            .map(|&(l, y)| {
                let r = model(l, l0, p) - y;
                r * r
            })
            .sum()
    };

    // Levenberg-Marquardt from one start; returns (params, rss, iters).
    let lm_from = |start: [f64; 3], budget: usize| -> ([f64; 3], f64, usize) {
        let mut p = start;
        clamp(&mut p);
        let mut lambda = 1e-3;
        let mut current = rss(&p);
        let mut stalled = 0usize;
        let mut iterations = 0usize;
        while iterations < budget {
            iterations += 1;
            let mut jtj = [[0.0; 3]; 3];
            let mut jtr = [0.0; 3];
            for &(l, y) in &pts {
                let e = (-(l - l0) / p[2]).exp();
                let f = model(l, l0, &p);
                let r = f - y;
                let j = [
                    1.0 - p[1] * e,
                    -p[0] * e,
                    -p[0] * p[1] * e * (l - l0) / (p[2] * p[2]),
                ];
                for a in 0..3 {
                    jtr[a] += j[a] * r;
                    for b in 0..3 {
                        jtj[a][b] += j[a] * j[b];
                    }
                }
            }
            let mut damped = jtj;
            for d in 0..3 {
                damped[d][d] *= 1.0 + lambda;
                damped[d][d] += 1e-12;
            }
            let Some(delta) = solve3(damped, [-jtr[0], -jtr[1], -jtr[2]]) else {
                break;
            };
            let mut trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]];
            clamp(&mut trial);
            let trial_rss = rss(&trial);
            if trial_rss <= current {
                let improved = current - trial_rss;
                p = trial;
                current = trial_rss;
                lambda = (lambda * 0.3).max(1e-12);
                if improved < 1e-15 * (1.0 + current) {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
            } else {
                lambda *= 10.0;
                if lambda > 1e10 {
                    stalled += 1;
                    lambda = 1e10;
                }
            }
            if stalled >= 5 {
                break;
            }
        }
        (p, current, iterations)
    };

    // deterministic start ladder: the regression guess plus a spread of
    // relaxation scales, in case the knee is unresolved by the sampling
    let starts = [
        [phi0, alpha0.clamp(1e-6, 2.0), tr0],
        [phi0, 0.5, span / 3.0],
        [phi0, 0.5, span / 10.0],
        [phi0, 0.5, span / 30.0],
        [phi0, 0.2, span / 100.0],
        [phi0, 0.2, span / 300.0],
    ];
    let max_iter = 300;
    let mut best: Option<([f64; 3], f64)> = None;
    let mut iterations = 0;
    for start in starts {
        let (p, r, it) = lm_from(start, max_iter);
        iterations += it;
        if best.as_ref().map_or(true, |(_, br)| r < *br) {
            best = Some((p, r));
        }
        if r < 1e-18 {
            break;
        }
    }
    let Some((p, current)) = best else {
        return Err(Error::FitDiverged(max_iter));
    };
    if !current.is_finite() {
        return Err(Error::FitDiverged(iterations));
    }

    // covariance from the unweighted normal equations
    let mut jtj = [[0.0; 3]; 3];
    for &(l, _) in &pts {
        let e = (-(l - l0) / p[2]).exp();
        let j = [
            1.0 - p[1] * e,
            -p[0] * e,
            -p[0] * p[1] * e * (l - l0) / (p[2] * p[2]),
        ];
        for a in 0..3 {
            for b in 0..3 {
                jtj[a][b] += j[a] * j[b];
            }
        }
    }
    let dof = (pts.len() as i64 - 3).max(1) as f64;
    let sigma2 = current / dof;
    let stderr = invert3(jtj)
        .map(|inv| {
            [
                (inv[0][0].max(0.0) * sigma2).sqrt(),
                (inv[1][1].max(0.0) * sigma2).sqrt(),
                (inv[2][2].max(0.0) * sigma2).sqrt(),
            ]
        })
        .unwrap_or([f64::NAN; 3]);

    Ok(SaturationFit {
        phi_sat: p[0],
        alpha: p[1],
        t_r: p[2],
        l0,
        stderr,
        residual_norm: current.sqrt(),
        iterations,
    })
}
