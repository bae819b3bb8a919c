//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! A 15-point Kronrod rule with its embedded 7-point Gauss rule supplies the
//! local error estimate. Refinement is global: the interval with the largest
//! estimated error is bisected until the total estimate drops below the
//! absolute tolerance, which also handles integrable endpoint singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::Error;

// QUADPACK dqk15 abscissae and weights on [-1, 1].
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

const MAX_CELLS: usize = 50_000;

struct Cell {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<F>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<Complex64, Error>
where
    F: Fn(f64) -> Complex64,
{
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {abs_tol}"
        )));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }

    let mut heap = BinaryHeap::new();
    heap.push(eval_cell(f, a, b));
    let mut total_error: f64 = heap.peek().unwrap().error;

    while total_error > abs_tol {
        if heap.len() >= MAX_CELLS {
            return Err(Error::Quadrature(format!(
                "error {total_error:.3e} above tolerance {abs_tol:.3e} after {MAX_CELLS} cells"
            )));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature(format!(
                "interval [{}, {}] cannot be subdivided further (error {:.3e})",
                worst.a, worst.b, worst.error
            )));
        }
        let left = eval_cell(f, worst.a, mid);
        let right = eval_cell(f, mid, worst.b);
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    let mut re = crate::sum::CompensatedSum::new();
    let mut im = crate::sum::CompensatedSum::new();
    for cell in heap {
        re.add(cell.value.re);
        im.add(cell.value.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

fn eval_cell<F>(f: &F, a: f64, b: f64) -> Cell
where
    F: Fn(f64) -> Complex64,
{
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            // Odd Kronrod indices are the embedded Gauss nodes.
            gauss += WG[i / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    Cell {
        a,
        b,
        value: kronrod,
        error: (kronrod - gauss).norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_against_erf() {
        // ∫_{-3}^{3} e^{-x²} dx = √π erf(3)
        let f = |x: f64| Complex64::new((-x * x).exp(), 0.0);
        let got = integrate(&f, -3.0, 3.0, 1e-13).unwrap();
        let expect = PI.sqrt() * libm::erf(3.0);
        assert!((got.re - expect).abs() < 1e-12);
        assert!(got.im.abs() < 1e-14);
    }

    #[test]
    fn oscillatory_complex() {
        // ∫_0^{2π} e^{i5x} dx = 0
        let f = |x: f64| Complex64::from_polar(1.0, 5.0 * x);
        let got = integrate(&f, 0.0, 2.0 * PI, 1e-12).unwrap();
        assert!(got.norm() < 1e-11);
    }

    #[test]
    fn integrable_log_singularity() {
        // ∫_0^1 ln x dx = -1, singular at the left endpoint.
        let f = |x: f64| Complex64::new(if x > 0.0 { x.ln() } else { 0.0 }, 0.0);
        let got = integrate(&f, 0.0, 1.0, 1e-11).unwrap();
        assert!((got.re + 1.0).abs() < 1e-10, "got {}", got.re);
    }

    #[test]
    fn narrow_feature() {
        // A Gaussian much narrower than the interval still converges.
        let f = |x: f64| Complex64::new((-(x * x) / (2.0 * 1e-4)).exp(), 0.0);
        let got = integrate(&f, -1.0, 1.0, 1e-13).unwrap();
        let expect = (2.0 * PI * 1e-4).sqrt();
        assert!((got.re - expect).abs() < 1e-11);
    }

    #[test]
    fn zero_width_interval() {
        let f = |_: f64| Complex64::new(1.0, 1.0);
        assert_eq!(integrate(&f, 2.0, 2.0, 1e-12).unwrap().norm(), 0.0);
    }
}
