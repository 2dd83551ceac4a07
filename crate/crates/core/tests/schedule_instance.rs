//! The bundled schedule against the reference instance: gap structure,
//! adiabaticity scale and unitary fidelities. These mirror parts of the
//! acceptance suite at developer-iteration speed.

mod common;

use common::*;
use spinpause_core::bath::{BathParams, LambShiftConfig};
use spinpause_core::mcwf::{run_ensemble, EffectiveTables, StepPlan};
use spinpause_core::spectral::{adiabatic_h, gap_crossing_left, locate_min_gap};

fn bath0() -> BathParams {
    let mut b = BathParams::new(1.0, 1.57, 1000.0).unwrap();
    b.eta = 0.0;
    b
}

#[test]
fn bundled_schedule_endpoints() {
    let sch = bundled_schedule();
    let (a0, b0) = sch.eval(0.0);
    let (a1, b1) = sch.eval(1.0);
    assert!(a0 > 30.0, "A(0) = {a0}");
    assert!(b0 < 0.3, "B(0) = {b0}");
    assert!(a1 / b1 < 1e-2);
    assert!(b0 / a0 < 1e-2);
}

#[test]
fn gap_locations_both_models() {
    let m = paper_model();
    let (sd, gap) = locate_min_gap(|s| m.assemble_hq(s), 0.05, 0.95, 1e-6).unwrap();
    println!("pspin: s_delta = {sd:.5}, gap = {gap:.5}");
    assert!((sd - 0.334).abs() < 0.01, "s_delta = {sd}");
    assert!((gap - 0.14).abs() < 0.03, "gap = {gap}");

    let ms = search_model();
    let (sds, gaps) = locate_min_gap(|s| ms.assemble_hq(s), 0.05, 0.95, 1e-6).unwrap();
    println!("search: s_delta = {sds:.5}, gap = {gaps:.5}");
    assert!((sds - 0.335).abs() < 0.01, "search s_delta = {sds}");
    assert!((gaps - 0.12).abs() < 0.03, "search gap = {gaps}");
    assert!(sds > sd, "search crossing should sit slightly later");
}

#[test]
fn gap_temperature_crossing_offset() {
    let m = paper_model();
    let (sd, _) = locate_min_gap(|s| m.assemble_hq(s), 0.05, 0.95, 1e-6).unwrap();
    let st = gap_crossing_left(|s| m.assemble_hq(s), sd, 1.57)
        .unwrap()
        .expect("gap reaches the temperature before the crossing");
    let offset = sd - st;
    println!("s_T offset = {offset:.6}");
    assert!(offset > 5e-4 && offset < 5e-3, "offset {offset}");
}

#[test]
fn adiabaticity_scale() {
    let m = paper_model();
    let h = adiabatic_h(&m, 401).unwrap();
    println!("h = {h:.1}");
    // order 1e3 angular GHz for this schedule
    assert!(h > 500.0 && h < 3000.0, "h = {h}");
}

#[test]
fn unitary_fidelities_track_reference_values() {
    let m = paper_model();
    let tables =
        EffectiveTables::build(&m, &bath0(), &LambShiftConfig::default(), 2001, 0.01).unwrap();
    let t0 = std::time::Instant::now();
    let plan100 = StepPlan::new(&tables, 100.0, None, 0.0, 0.01, 501);
    let r100 = run_ensemble(&tables, &plan100, 0, 1).unwrap();
    println!(
        "Phi_u(100) = {:.4e}  [{:.2?} for 1e4 steps]",
        r100.fidelity,
        t0.elapsed()
    );
    let plan1000 = StepPlan::new(&tables, 1000.0, None, 0.0, 0.01, 501);
    let r1000 = run_ensemble(&tables, &plan1000, 0, 1).unwrap();
    println!("Phi_u(1000) = {:.4e}", r1000.fidelity);
    // within a factor two of 5.51e-3 and 5.39e-2
    assert!(r100.fidelity > 5.51e-3 / 2.0 && r100.fidelity < 5.51e-3 * 2.0);
    assert!(r1000.fidelity > 5.39e-2 / 2.0 && r1000.fidelity < 5.39e-2 * 2.0);
    assert!(r1000.fidelity > r100.fidelity);
}
