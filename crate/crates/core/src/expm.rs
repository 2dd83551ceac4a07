//! Dense matrix exponential by scaling and squaring with Padé approximants.
//!
//! Follows the Higham (2005) order selection: the [m/m] diagonal Padé
//! approximant is chosen from m in {3, 5, 7, 9, 13} by the 1-norm of the
//! argument, scaling by powers of two only when the norm exceeds the
//! m = 13 threshold. Dimensions here are tiny (n+1 <= 65), so no
//! norm-estimation tricks are needed.

use nalgebra::DMatrix;
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_230e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068e0;
const THETA_13: f64 = 5.371_920_351_148_152e0;

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade_uv(a: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let id = CMat::identity(n, n);
    let a2 = a * a;
    match b.len() {
        4 => {
            // m = 3
            let u = a * (&a2 * cr(b[3]) + &id * cr(b[1]));
            let v = &a2 * cr(b[2]) + &id * cr(b[0]);
            (u, v)
        }
        6 => {
            let a4 = &a2 * &a2;
            let u = a * (&a4 * cr(b[5]) + &a2 * cr(b[3]) + &id * cr(b[1]));
            let v = &a4 * cr(b[4]) + &a2 * cr(b[2]) + &id * cr(b[0]);
            (u, v)
        }
        8 => {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let u = a * (&a6 * cr(b[7]) + &a4 * cr(b[5]) + &a2 * cr(b[3]) + &id * cr(b[1]));
            let v = &a6 * cr(b[6]) + &a4 * cr(b[4]) + &a2 * cr(b[2]) + &id * cr(b[0]);
            (u, v)
        }
        10 => {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let a8 = &a6 * &a2;
            let u = a * (&a8 * cr(b[9]) + &a6 * cr(b[7]) + &a4 * cr(b[5]) + &a2 * cr(b[3]) + &id * cr(b[1]));
            let v = &a8 * cr(b[8]) + &a6 * cr(b[6]) + &a4 * cr(b[4]) + &a2 * cr(b[2]) + &id * cr(b[0]);
            (u, v)
        }
        14 => {
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let w1 = &a6 * cr(b[13]) + &a4 * cr(b[11]) + &a2 * cr(b[9]);
            let w2 = &a6 * cr(b[7]) + &a4 * cr(b[5]) + &a2 * cr(b[3]) + &id * cr(b[1]);
            let u = a * (&a6 * &w1 + w2);
            let z1 = &a6 * cr(b[12]) + &a4 * cr(b[10]) + &a2 * cr(b[8]);
            let z2 = &a6 * cr(b[6]) + &a4 * cr(b[4]) + &a2 * cr(b[2]) + &id * cr(b[0]);
            let v = &a6 * &z1 + z2;
            (u, v)
        }
        _ => unreachable!(),
    }
}

fn pade_solve(a: &CMat, b: &[f64]) -> CMat {
    let (u, v) = pade_uv(a, b);
    let lhs = &v - &u;
    let rhs = &v + &u;
    nalgebra::LU::new(lhs)
        .solve(&rhs)
        .expect("Padé denominator singular: non-finite input?")
}

/// exp(A) for a dense complex matrix.
pub fn expm(a: &CMat) -> CMat {
    const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
    const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
    const B7: [f64; 8] = [
        17_297_280.0,
        8_648_640.0,
        1_995_840.0,
        277_200.0,
        25_200.0,
        1_512.0,
        56.0,
        1.0,
    ];
    const B9: [f64; 10] = [
        17_643_225_600.0,
        8_821_612_800.0,
        2_075_673_600.0,
        302_702_400.0,
        30_270_240.0,
        2_162_160.0,
        110_880.0,
        3_960.0,
        90.0,
        1.0,
    ];
    const B13: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];

    let norm = one_norm(a);
    if norm <= THETA_3 {
        return pade_solve(a, &B3);
    }
    if norm <= THETA_5 {
        return pade_solve(a, &B5);
    }
    if norm <= THETA_7 {
        return pade_solve(a, &B7);
    }
    if norm <= THETA_9 {
        return pade_solve(a, &B9);
    }
    if norm <= THETA_13 {
        return pade_solve(a, &B13);
    }
    let s = ((norm / THETA_13).log2().ceil() as i32).max(0);
    let scaled = a * Complex64::new(0.5_f64.powi(s), 0.0);
    let mut result = pade_solve(&scaled, &B13);
    for _ in 0..s {
        result = &result * &result;
    }
    result
}
