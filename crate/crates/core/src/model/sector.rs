use nalgebra::DMatrix;

use crate::{Error, Result};

/// Dimension guard for the sector constructor.
pub const MAX_QUBITS: usize = 64;

/// The maximum-total-spin sector of n qubits.
///
/// Basis states |w> are labelled by the Hamming weight w = 0..n (number
/// of down spins); |w> is the eigenstate of sum_i sigma_z^i with
/// eigenvalue n - 2w. The sector has total spin S = n/2 and dimension
/// n + 1.
#[derive(Debug, Clone)]
pub struct SpinSector {
    n: usize,
    ops: CollectiveOperators,
}

/// Collective spin operators restricted to the sector, in the |w> basis.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    sz: DMatrix<f64>,
    sx: DMatrix<f64>,
    coupling_diag: Vec<f64>,
}

impl SpinSector {
    /// Build the sector and its collective operators for n qubits.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::BadQubitCount(n));
        }
        let n1 = n + 1;
        let s = n as f64 / 2.0;

        let mut sz = DMatrix::<f64>::zeros(n1, n1);
        for w in 0..n1 {
            sz[(w, w)] = (n as f64 - 2.0 * w as f64) / 2.0;
        }

        // <w-1| Sx |w> = 1/2 sqrt(S(S+1) - m(m+1)) with m = S - w,
        // which simplifies to 1/2 sqrt(w (n - w + 1)).
        let mut sx = DMatrix::<f64>::zeros(n1, n1);
        for w in 1..n1 {
            let t = 0.5 * ((w as f64) * (n as f64 - w as f64 + 1.0)).sqrt();
            sx[(w - 1, w)] = t;
            sx[(w, w - 1)] = t;
        }
        debug_assert!((s * (s + 1.0)).is_finite());

        let coupling_diag = (0..n1).map(|w| n as f64 - 2.0 * w as f64).collect();

        Ok(Self {
            n,
            ops: CollectiveOperators {
                sz,
                sx,
                coupling_diag,
            },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Basis size n + 1.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// Total spin S = n/2.
    pub fn total_spin(&self) -> f64 {
        self.n as f64 / 2.0
    }

    pub fn ops(&self) -> &CollectiveOperators {
        &self.ops
    }
}

impl CollectiveOperators {
    /// Sz, diagonal with entries (n - 2w)/2.
    pub fn sz(&self) -> &DMatrix<f64> {
        &self.sz
    }

    /// Sx, symmetric tridiagonal.
    pub fn sx(&self) -> &DMatrix<f64> {
        &self.sx
    }

    /// Sy = -i [Sz, Sx]; returned as the real antisymmetric matrix C with
    /// Sy = -i C, so Sy^2 = -C^2 stays in real arithmetic.
    pub fn sy_commutator(&self) -> DMatrix<f64> {
        &self.sz * &self.sx - &self.sx * &self.sz
    }

    /// Diagonal of the bath coupling operator sum_i sigma_z^i = 2 Sz.
    pub fn coupling_diag(&self) -> &[f64] {
        &self.coupling_diag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_n() {
        assert!(SpinSector::new(0).is_err());
        assert!(SpinSector::new(65).is_err());
        assert!(SpinSector::new(64).is_ok());
    }

    #[test]
    fn n2_matrix_elements() {
        let sec = SpinSector::new(2).unwrap();
        let sz = sec.ops().sz();
        assert_eq!(sz[(0, 0)], 1.0);
        assert_eq!(sz[(1, 1)], 0.0);
        assert_eq!(sz[(2, 2)], -1.0);
        // sum sigma_z eigenvalues are n - 2w
        assert_eq!(sec.ops().coupling_diag(), &[2.0, 0.0, -2.0]);
        // <w=1| Sx |w=0> = sqrt(2)/2
        let expect = 2.0_f64.sqrt() / 2.0;
        assert!((sec.ops().sx()[(1, 0)] - expect).abs() < 1e-15);
    }

    #[test]
    fn casimir_identity_n20() {
        let sec = SpinSector::new(20).unwrap();
        let s = sec.total_spin();
        let ops = sec.ops();
        let c = ops.sy_commutator();
        // Sx^2 + Sy^2 + Sz^2 with Sy^2 = -C^2
        let casimir = ops.sx() * ops.sx() - &c * &c + ops.sz() * ops.sz();
        let expect = s * (s + 1.0);
        assert!((expect - 110.0).abs() < 1e-12);
        for i in 0..sec.dim() {
            for j in 0..sec.dim() {
                let want = if i == j { expect } else { 0.0 };
                assert!(
                    (casimir[(i, j)] - want).abs() < 1e-12,
                    "casimir[{i},{j}] = {}",
                    casimir[(i, j)]
                );
            }
        }
    }
}
