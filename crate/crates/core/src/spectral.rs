//! Instantaneous eigensystems, minimal-gap location and jump tables.
//!
//! The Lindblad operators live in the instantaneous eigenbasis of H_Q(s):
//! L_ab = <eps_a| sum_i sigma_z^i |eps_b> |eps_a><eps_b| with Bohr
//! frequency omega_ba = eps_b - eps_a. Channels whose frequencies
//! coincide (within a relative tolerance) are merged into one collective
//! operator; the omega = 0 group always exists and carries the dephasing
//! operator built from the diagonal elements.

use nalgebra::{DMatrix, DVector};

use crate::model::Model;
use crate::{Error, Result};

/// Relative tolerance for grouping coincident Bohr frequencies.
pub const DEGENERACY_REL_TOL: f64 = 1e-9;

/// Sorted, phase-fixed eigensystem of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub s: f64,
    /// Ascending eigenvalues (angular GHz).
    pub energies: DVector<f64>,
    /// Orthonormal eigenvectors as columns, phase-fixed so the largest
    /// magnitude component of each is positive; with a predecessor the
    /// sign is instead chosen to keep <v_prev | v> >= 0.
    pub vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// eps_{k+1} - eps_k.
    pub fn gap(&self, k: usize) -> f64 {
        self.energies[k + 1] - self.energies[k]
    }
}

/// Cyclic Jacobi diagonalization of a real symmetric matrix.
///
/// Slower than tridiagonal QL but accurate to a few ulps in both the
/// residual and the orthogonality of the vectors, which the invariant
/// tolerances here rely on. Dimensions stay at n+1 <= 65.
pub(crate) fn jacobi_eigh(h: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale: f64 = h.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..200 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = arp - s * (arq + tau * arp);
                        a[(p, r)] = a[(r, p)];
                        a[(r, q)] = arq + s * (arp - tau * arq);
                        a[(q, r)] = a[(r, q)];
                    }
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// Eigendecompose a real symmetric matrix; `previous` enables sign
/// continuity along a path.
pub fn eigendecompose(
    h: &DMatrix<f64>,
    s: f64,
    previous: Option<&EigenSystem>,
) -> Result<EigenSystem> {
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite matrix entries".into()));
    }
    let n = h.nrows();
    let (evals, evecs) = jacobi_eigh(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());

    let mut energies = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        energies[k] = evals[src];
        let col = evecs.column(src);
        // phase convention: largest-magnitude component positive
        let mut imax = 0;
        let mut vmax = 0.0_f64;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > vmax {
                vmax = x.abs();
                imax = i;
            }
        }
        let mut sign = if col[imax] < 0.0 { -1.0 } else { 1.0 };
        if let Some(prev) = previous {
            let overlap: f64 = prev.vectors.column(k).dot(&col);
            sign = if overlap < 0.0 { -1.0 } else { 1.0 };
        }
        for i in 0..n {
            vectors[(i, k)] = sign * col[i];
        }
    }
    Ok(EigenSystem {
        s,
        energies,
        vectors,
    })
}

/// One jump channel: a group of (a, b) transitions sharing a Bohr
/// frequency. The omega = 0 group collects every diagonal pair (the
/// dephasing operator) plus any accidentally degenerate off-diagonal
/// pair.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub omega: f64,
    /// (a, b, A_ab): the operator is sum over members of A_ab |a><b|.
    pub members: Vec<(usize, usize, f64)>,
}

/// Jump matrix elements and grouped channels at one schedule point.
#[derive(Debug, Clone)]
pub struct JumpTable {
    pub s: f64,
    /// A_ab = <eps_a| sum_i sigma_z^i |eps_b>, real symmetric.
    pub elements: DMatrix<f64>,
    /// channels[0] is the omega = 0 group.
    pub channels: Vec<JumpChannel>,
}

/// Rotate the diagonal coupling into the eigenbasis and group channels.
pub fn build_jump_table(eig: &EigenSystem, coupling_diag: &[f64]) -> JumpTable {
    let n = eig.dim();
    debug_assert_eq!(coupling_diag.len(), n);
    // A = V^T diag(c) V
    let mut scaled = eig.vectors.clone();
    for w in 0..n {
        for k in 0..n {
            scaled[(w, k)] *= coupling_diag[w];
        }
    }
    let elements = eig.vectors.transpose() * &scaled;

    let span = eig.energies[n - 1] - eig.energies[0];
    let tol = DEGENERACY_REL_TOL * span.max(1e-300);

    // collect ordered pairs with their frequencies; group runs of equal omega
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let omega = eig.energies[b] - eig.energies[a];
            entries.push((omega, a, b));
        }
    }
    entries.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap()
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });

    let mut groups: Vec<JumpChannel> = Vec::new();
    for (omega, a, b) in entries {
        match groups.last_mut() {
            Some(g) if (omega - g.omega).abs() <= tol => {
                g.members.push((a, b, elements[(a, b)]));
            }
            _ => groups.push(JumpChannel {
                omega,
                members: vec![(a, b, elements[(a, b)])],
            }),
        }
    }
    // pin the dephasing group frequency to exactly zero and move it first
    let zero_idx = groups
        .iter()
        .position(|g| g.members.iter().any(|&(a, b, _)| a == b))
        .expect("diagonal pairs always exist");
    groups[zero_idx].omega = 0.0;
    groups.swap(0, zero_idx);
    // keep the non-zero groups in ascending frequency order
    groups[1..].sort_by(|x, y| x.omega.partial_cmp(&y.omega).unwrap());

    JumpTable {
        s: eig.s,
        elements,
        channels: groups,
    }
}

impl JumpTable {
    /// sum_alpha L_alpha^dagger L_alpha, for the completeness check: per
    /// eigenstate no coupling weight is lost, i.e. the diagonal equals
    /// that of the rotated coupling squared.
    pub fn channel_completeness(&self) -> DMatrix<f64> {
        let n = self.elements.nrows();
        let mut total = DMatrix::<f64>::zeros(n, n);
        for ch in &self.channels {
            for &(a, b, x) in &ch.members {
                for &(a2, b2, y) in &ch.members {
                    if a == a2 {
                        total[(b, b2)] += x * y;
                    }
                }
            }
        }
        total
    }
}

/// Locate the minimum of eps_2 - eps_1 for `assemble` over [s_lo, s_hi].
///
/// A coarse scan at 1e-3 resolution brackets the minimum and checks
/// unimodality; golden-section refinement then narrows the position to
/// `tol`. Multiple interior minima or an endpoint minimum are reported
/// as errors.
pub fn locate_min_gap(
    assemble: impl Fn(f64) -> Result<DMatrix<f64>>,
    s_lo: f64,
    s_hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    assert!(tol > 0.0 && s_hi > s_lo);
    let gap = |s: f64| -> Result<f64> {
        let h = assemble(s)?;
        let eig = eigendecompose(&h, s, None)?;
        Ok(eig.gap(0))
    };
    let steps = ((s_hi - s_lo) / 1e-3).ceil() as usize;
    let steps = steps.max(8);
    let mut gs = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let s = s_lo + (s_hi - s_lo) * i as f64 / steps as f64;
        gs.push((s, gap(s)?));
    }
    let mut minima = Vec::new();
    for i in 1..steps {
        if gs[i].1 < gs[i - 1].1 && gs[i].1 <= gs[i + 1].1 {
            minima.push(i);
        }
    }
    if minima.is_empty() {
        let end = if gs[0].1 < gs[steps].1 { gs[0].0 } else { gs[steps].0 };
        return Err(Error::EndpointMinimum(end));
    }
    if minima.len() > 1 {
        return Err(Error::NotUnimodal(
            minima.iter().map(|&i| gs[i].0).collect(),
        ));
    }
    let i = minima[0];
    let (mut lo, mut hi) = (gs[i - 1].0, gs[i + 1].0);
    // golden-section search
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = gap(x1)?;
    let mut f2 = gap(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = gap(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = gap(x2)?;
        }
    }
    let s_min = 0.5 * (lo + hi);
    Ok((s_min, gap(s_min)?))
}

/// Walk left from `s_from` until the lowest gap crosses `target`, then
/// bisect; returns the first crossing below `s_from`. Used for the
/// two-level model's gap-equals-temperature point.
pub fn gap_crossing_left(
    assemble: impl Fn(f64) -> Result<DMatrix<f64>>,
    s_from: f64,
    target: f64,
) -> Result<Option<f64>> {
    let gap = |s: f64| -> Result<f64> {
        let h = assemble(s)?;
        let eig = eigendecompose(&h, s, None)?;
        Ok(eig.gap(0))
    };
    let step = 5e-4;
    let mut hi = s_from;
    let mut lo = s_from - step;
    while lo > 0.0 {
        if gap(lo)? >= target {
            // bisect in [lo, hi]
            let mut a = lo;
            let mut b = hi;
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if gap(mid)? >= target {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a < 1e-12 {
                    break;
                }
            }
            return Ok(Some(0.5 * (a + b)));
        }
        hi = lo;
        lo -= step;
    }
    Ok(None)
}

/// max over the s-grid and all (a, b) of |<eps_a| d/ds H_Q |eps_b>|.
pub fn adiabatic_h(model: &Model, grid_points: usize) -> Result<f64> {
    let mut hmax = 0.0_f64;
    let mut prev: Option<EigenSystem> = None;
    for i in 0..grid_points {
        let s = i as f64 / (grid_points - 1) as f64;
        let h = model.assemble_hq(s)?;
        let eig = eigendecompose(&h, s, prev.as_ref())?;
        let dh = model.assemble_dhq(s)?;
        let rotated = eig.vectors.transpose() * &dh * &eig.vectors;
        for x in rotated.iter() {
            hmax = hmax.max(x.abs());
        }
        prev = Some(eig);
    }
    Ok(hmax)
}

/// Precomputed eigensystems and jump tables on a uniform s grid.
///
/// The grid is immutable after construction and shared read-only by all
/// trajectory workers; density is a convergence parameter.
#[derive(Debug)]
pub struct SpectralGrid {
    pub points: Vec<(EigenSystem, JumpTable)>,
}

impl SpectralGrid {
    pub fn build(model: &Model, grid_points: usize) -> Result<Self> {
        assert!(grid_points >= 2);
        let coupling = model.sector.ops().coupling_diag().to_vec();
        let mut points = Vec::with_capacity(grid_points);
        let mut prev: Option<EigenSystem> = None;
        for i in 0..grid_points {
            let s = i as f64 / (grid_points - 1) as f64;
            let h = model.assemble_hq(s)?;
            let eig = eigendecompose(&h, s, prev.as_ref())?;
            let jump = build_jump_table(&eig, &coupling);
            prev = Some(eig.clone());
            points.push((eig, jump));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the grid point nearest to s in [0, 1].
    pub fn nearest(&self, s: f64) -> usize {
        let m = self.points.len() - 1;
        let x = (s.clamp(0.0, 1.0) * m as f64).round() as usize;
        x.min(m)
    }

    pub fn eig(&self, idx: usize) -> &EigenSystem {
        &self.points[idx].0
    }

    pub fn jump(&self, idx: usize) -> &JumpTable {
        &self.points[idx].1
    }
}
