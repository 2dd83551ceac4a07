//! Shared test fixtures: brute-force full-space constructions projected
//! onto the symmetric (Dicke) subspace, and model builders.
//!
//! The brute-force route never touches the sector code paths: operators
//! are built on the full 2^n space from bit operations and projected
//! with explicitly normalized Dicke states.

#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use spinpause_core::model::{AnnealSchedule, Model, ProblemHamiltonian, ProblemKind, SpinSector};

/// Path to the bundled schedule table.
pub fn bundled_schedule_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/dw2000q_like_schedule.csv")
}

pub fn bundled_schedule() -> AnnealSchedule {
    AnnealSchedule::load(bundled_schedule_path()).unwrap()
}

pub fn linear_schedule() -> AnnealSchedule {
    let samples: Vec<(f64, f64, f64)> = (0..=400)
        .map(|i| {
            let s = i as f64 / 400.0;
            (s, 1.0 - s, s)
        })
        .collect();
    AnnealSchedule::from_samples(samples, "<linear>").unwrap()
}

pub fn model_with(n: usize, kind: ProblemKind, p: Option<u32>, schedule: AnnealSchedule) -> Model {
    Model::new(
        SpinSector::new(n).unwrap(),
        ProblemHamiltonian::new(kind, n, p).unwrap(),
        schedule,
    )
    .unwrap()
}

pub fn paper_model() -> Model {
    model_with(20, ProblemKind::PSpin, Some(19), bundled_schedule())
}

pub fn search_model() -> Model {
    model_with(20, ProblemKind::Search, None, bundled_schedule())
}

/// Dicke projector: rows are the 2^n full-space amplitudes of |w>,
/// i.e. equal weights on all bitstrings of Hamming weight w.
pub fn dicke_states(n: usize) -> DMatrix<f64> {
    let dim_full = 1usize << n;
    let mut binom = vec![0.0_f64; n + 1];
    for w in 0..=n {
        binom[w] = binomial(n, w);
    }
    let mut proj = DMatrix::<f64>::zeros(n + 1, dim_full);
    for state in 0..dim_full {
        let w = (state as u64).count_ones() as usize;
        proj[(w, state)] = 1.0 / binom[w].sqrt();
    }
    proj
}

pub fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Full-space sum_i sigma_x^i / 2 (the collective Sx) as a dense matrix.
/// Convention: bit value 0 is spin up (+1 under sigma_z).
pub fn full_sx(n: usize) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for state in 0..dim {
        for bit in 0..n {
            let flipped = state ^ (1usize << bit);
            m[(flipped, state)] += 0.5;
        }
    }
    m
}

/// Full-space sum_i sigma_z^i (diagonal, eigenvalue n - 2 * popcount).
pub fn full_sigma_z_sum(n: usize) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for state in 0..dim {
        m[(state, state)] = n as f64 - 2.0 * (state as u64).count_ones() as f64;
    }
    m
}

/// Full-space p-spin Hamiltonian -(n/2) ((1/n) sum sigma_z)^p (diagonal).
pub fn full_pspin(n: usize, p: u32) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for state in 0..dim {
        let mz = (n as f64 - 2.0 * (state as u64).count_ones() as f64) / n as f64;
        m[(state, state)] = -(n as f64 / 2.0) * mz.powi(p as i32);
    }
    m
}

/// Project a full-space operator onto the Dicke subspace.
pub fn project(proj: &DMatrix<f64>, op: &DMatrix<f64>) -> DMatrix<f64> {
    proj * op * proj.transpose()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst
}
