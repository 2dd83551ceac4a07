use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which classical problem the anneal targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Fully-connected ferromagnet, energy -(n/2) * (m)^p with
    /// m = (1/n) sum_i sigma_z^i.
    PSpin,
    /// Grover-like search: -(n/2) |w=0><w=0|.
    Search,
}

/// Diagonal problem Hamiltonian in the |w> basis (dimensionless, hbar = 1).
#[derive(Debug, Clone)]
pub struct ProblemHamiltonian {
    kind: ProblemKind,
    p: Option<u32>,
    diagonal: Vec<f64>,
}

/// Energy of the p-spin model at Hamming weight w: -(n/2) (1 - 2w/n)^p.
///
/// Computed as ((n - 2w)/n)^p with an exact integer numerator, so the
/// antisymmetry under w -> n - w (odd p) holds bit-exactly.
pub fn pspin_energy(n: usize, p: u32, w: usize) -> Result<f64> {
    if w > n {
        return Err(Error::BadHammingWeight { w, n });
    }
    if p < 1 {
        return Err(Error::BadExponent(p));
    }
    let m = (n as f64 - 2.0 * w as f64) / n as f64;
    Ok(-(n as f64 / 2.0) * m.powi(p as i32))
}

impl ProblemHamiltonian {
    pub fn new(kind: ProblemKind, n: usize, p: Option<u32>) -> Result<Self> {
        let diagonal = match kind {
            ProblemKind::PSpin => {
                let p = p.ok_or(Error::MissingExponent)?;
                if p < 1 {
                    return Err(Error::BadExponent(p));
                }
                (0..=n).map(|w| pspin_energy(n, p, w)).collect::<Result<_>>()?
            }
            ProblemKind::Search => {
                let mut d = vec![0.0; n + 1];
                d[0] = -(n as f64) / 2.0;
                d
            }
        };
        Ok(Self { kind, p, diagonal })
    }

    /// A problem with an explicitly supplied diagonal (test instrumentation
    /// and custom symmetric-sector problems).
    pub fn from_diagonal(diagonal: Vec<f64>) -> Self {
        Self {
            kind: ProblemKind::Search,
            p: None,
            diagonal,
        }
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn p(&self) -> Option<u32> {
        self.p
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }
}
