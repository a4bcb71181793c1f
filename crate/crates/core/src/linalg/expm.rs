//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! of degree 3, 5, 7, 9 or 13 (Higham 2005, "The scaling and squaring method
//! for the matrix exponential revisited").

use nalgebra::DMatrix;

use super::{r, ComplexMatrix, C64};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

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

/// Returns `exp(scale * a)`.
pub fn expm(a: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    let n = a.require_square("expm")?;
    let x: DMatrix<C64> = a.as_nalgebra() * scale;
    if n == 1 {
        return Ok(ComplexMatrix::from_nalgebra(x.map(|z| z.exp())));
    }
    let norm = ComplexMatrix::from_nalgebra(x.clone()).norm_1();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    for (m, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(&x, coeffs);
            return solve_pade(u, v).map(ComplexMatrix::from_nalgebra);
        }
    }

    let squarings = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let xs = &x * r(0.5f64.powi(squarings));
    let (u, v) = pade13(&xs);
    let mut out = solve_pade(u, v)?;
    for _ in 0..squarings {
        out = &out * &out;
    }
    Ok(ComplexMatrix::from_nalgebra(out))
}

fn pade_low(x: &DMatrix<C64>, b: &[f64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = x.nrows();
    let x2 = x * x;
    let mut even = DMatrix::<C64>::identity(n, n) * r(b[0]);
    let mut odd = DMatrix::<C64>::identity(n, n) * r(b[1]);
    let mut power = DMatrix::<C64>::identity(n, n);
    let mut k = 2;
    while k < b.len() {
        power = &power * &x2;
        even += &power * r(b[k]);
        if k + 1 < b.len() {
            odd += &power * r(b[k + 1]);
        }
        k += 2;
    }
    (x * odd, even)
}

fn pade13(x: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = x.nrows();
    let b = B13.map(r);
    let id = DMatrix::<C64>::identity(n, n);
    let x2 = x * x;
    let x4 = &x2 * &x2;
    let x6 = &x2 * &x4;
    let inner_u = &x6 * (&x6 * b[13] + &x4 * b[11] + &x2 * b[9]);
    let u = x * (inner_u + &x6 * b[7] + &x4 * b[5] + &x2 * b[3] + &id * b[1]);
    let inner_v = &x6 * (&x6 * b[12] + &x4 * b[10] + &x2 * b[8]);
    let v = inner_v + &x6 * b[6] + &x4 * b[4] + &x2 * b[2] + &id * b[0];
    (u, v)
}

fn solve_pade(u: DMatrix<C64>, v: DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = u.nrows();
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Stability(format!("singular Padé denominator in expm ({n}x{n})")))
}
