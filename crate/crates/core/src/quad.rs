//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and estimated absolute error of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`, bisecting the
/// interval with the largest error estimate at most `max_intervals` times.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_intervals: usize) -> Result<Integral> {
    let mut pieces = vec![(a, b, gk15(f, a, b))];
    let mut evaluations = 15;
    loop {
        let value: f64 = pieces.iter().map(|p| p.2 .0).sum();
        let error: f64 = pieces.iter().map(|p| p.2 .1).sum();
        if !value.is_finite() {
            return Err(Error::Domain(format!("integrand not finite on [{a}, {b}]")));
        }
        if error <= tol {
            return Ok(Integral { value, abs_error: error, evaluations });
        }
        if pieces.len() >= max_intervals {
            return Err(Error::Domain(format!(
                "quadrature did not converge: estimate {value}, error {error:e} after {evaluations} evaluations"
            )));
        }
        let (i, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("nonempty");
        let (lo, hi, _) = pieces.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        pieces.push((lo, mid, gk15(f, lo, mid)));
        pieces.push((mid, hi, gk15(f, mid, hi)));
        evaluations += 30;
    }
}
