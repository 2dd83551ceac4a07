//! Sector operators against brute-force 2^n constructions projected with
//! Dicke states.

mod common;

use common::*;
use spinpause_core::model::{pspin_energy, SpinSector};

#[test]
fn sector_operators_match_projected_full_space() {
    for n in 1..=10 {
        let proj = dicke_states(n);
        let sec = SpinSector::new(n).unwrap();

        let sx_full = project(&proj, &full_sx(n));
        let diff = max_abs_diff(&sx_full, sec.ops().sx());
        assert!(diff < 1e-10, "n={n}: Sx mismatch {diff:.3e}");

        let sz_full = project(&proj, &full_sigma_z_sum(n));
        let coupling = sec.ops().coupling_diag();
        for w in 0..=n {
            for w2 in 0..=n {
                let want = if w == w2 { coupling[w] } else { 0.0 };
                assert!((sz_full[(w, w2)] - want).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn pspin_spectrum_matches_projected_full_space() {
    for n in 1..=10 {
        let proj = dicke_states(n);
        for &p in &[2u32, 3, 7] {
            let hp_full = project(&proj, &full_pspin(n, p));
            for w in 0..=n {
                let want = pspin_energy(n, p, w).unwrap();
                for w2 in 0..=n {
                    let got = hp_full[(w, w2)];
                    let expect = if w == w2 { want } else { 0.0 };
                    assert!(
                        (got - expect).abs() < 1e-10,
                        "n={n} p={p} ({w},{w2}): {got} vs {expect}"
                    );
                }
            }
        }
    }
}

#[test]
fn triplet_sector_element_n2() {
    // brute-force 4x4 two-qubit sum sigma_x / 2 projected on the triplet
    let proj = dicke_states(2);
    let sx = project(&proj, &full_sx(2));
    let expect = 2.0_f64.sqrt() / 2.0;
    assert!((sx[(1, 0)] - expect).abs() < 1e-12);
    assert!((sx[(0, 1)] - expect).abs() < 1e-12);
}

#[test]
fn binomial_ground_state_profile() {
    // the sector ground state of -Sx carries sqrt(C(n,w)/2^n) amplitudes
    let n = 12;
    let m = model_with(
        n,
        spinpause_core::model::ProblemKind::PSpin,
        Some(3),
        linear_schedule(),
    );
    let h = m.assemble_hq(0.0).unwrap();
    let eig = spinpause_core::spectral::eigendecompose(&h, 0.0, None).unwrap();
    let mut overlap = 0.0;
    for w in 0..=n {
        let amp = (binomial(n, w) / (1u64 << n) as f64).sqrt();
        overlap += amp * eig.vectors[(w, 0)];
    }
    assert!(overlap.abs() >= 1.0 - 1e-10, "overlap {overlap}");
}
