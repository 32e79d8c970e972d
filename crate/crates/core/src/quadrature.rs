//! Adaptive quadrature used by the validation oracles.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
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
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    /// Integral of the absolute value, a cancellation-aware scale.
    pub abs_value: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
        abs_value: abs * half.abs(),
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol * integral of |f|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    // Start from a handful of panels so narrow features are not missed.
    let initial = 8;
    for i in 0..initial {
        let lo = a + (b - a) * i as f64 / initial as f64;
        let hi = a + (b - a) * (i + 1) as f64 / initial as f64;
        heap.push(kronrod(&mut f, lo, hi));
    }
    loop {
        let (value, error, abs_value) = heap.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
        });
        if error <= abs_tol.max(rel_tol * abs_value) {
            return Ok(QuadratureResult {
                value,
                error,
                abs_value,
            });
        }
        if heap.len() >= max_segments {
            return Err(Error::ConvergenceFailure(format!(
                "{} segments on [{a}, {b}], error {error:.3e} vs scale {abs_value:.3e}",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod(&mut f, worst.a, mid));
        heap.push(kronrod(&mut f, mid, worst.b));
    }
}

/// Trapezoidal rule for a 2pi-periodic integrand, doubling the node count
/// until two successive estimates agree. Exponentially convergent for
/// analytic integrands.
pub fn integrate_periodic<F: FnMut(f64) -> f64>(
    mut g: F,
    min_nodes: usize,
    rel_tol: f64,
    max_nodes: usize,
) -> Result<f64> {
    integrate_periodic_complex(|t| Complex64::new(g(t), 0.0), min_nodes, rel_tol, max_nodes).map(|r| r.value.re)
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodicResult {
    pub value: Complex64,
    /// Trapezoidal sum of `|g|`.
    pub abs_value: f64,
}

/// [`integrate_periodic`] for complex integrands. Agreement is measured
/// against the integral of `|g|`.
pub fn integrate_periodic_complex<F: FnMut(f64) -> Complex64>(
    mut g: F,
    min_nodes: usize,
    rel_tol: f64,
    max_nodes: usize,
) -> Result<PeriodicResult> {
    let mut nodes = min_nodes.max(4).next_power_of_two();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for k in 0..nodes {
        let v = g(2.0 * PI * k as f64 / nodes as f64);
        sum += v;
        abs += v.norm();
    }
    let mut estimate = sum * (2.0 * PI / nodes as f64);
    loop {
        // Midpoints of the current grid.
        for k in 0..nodes {
            let v = g(2.0 * PI * (k as f64 + 0.5) / nodes as f64);
            sum += v;
            abs += v.norm();
        }
        nodes *= 2;
        let refined = sum * (2.0 * PI / nodes as f64);
        let scale = 2.0 * PI * abs / nodes as f64;
        if (refined - estimate).norm() <= rel_tol * scale {
            return Ok(PeriodicResult {
                value: refined,
                abs_value: scale,
            });
        }
        if nodes >= max_nodes {
            return Err(Error::ConvergenceFailure(format!(
                "periodic rule with {nodes} nodes: {refined:.6e} vs {estimate:.6e}"
            )));
        }
        estimate = refined;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_gaussian() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 3.0, 1e-14, 0.0, 100).unwrap();
        assert!((r.value - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
        let r = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-13, 0.0, 200).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x: f64| (40.0 * x).cos(), 0.0, 1.0, 1e-12, 0.0, 500).unwrap();
        assert!((r.value - 40f64.sin() / 40.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_rule_bessel_generating_function() {
        // (1/2pi) int exp(a cos t) cos(3t) dt = I_3(a); check against series.
        let a: f64 = 2.5;
        let got = integrate_periodic(|t| (a * t.cos()).exp() * (3.0 * t).cos(), 8, 1e-14, 1 << 16)
            .unwrap()
            / (2.0 * PI);
        let mut series = 0.0;
        let mut term = (a / 2.0).powi(3) / 6.0;
        for k in 0..40 {
            series += term;
            term *= (a / 2.0).powi(2) / ((k + 1) as f64 * (k + 4) as f64);
        }
        assert!((got - series).abs() < 1e-13 * series);
    }

    #[test]
    fn segment_budget_is_enforced() {
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, 1e-15, 0.0, 16);
        assert!(matches!(r, Err(Error::ConvergenceFailure(_))));
    }
}
