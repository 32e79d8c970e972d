//! Hermite-Gauss machinery behind the off-axis overlaps.
//!
//! Coordinates are scaled by the acoustic waist, `X = sqrt2 x / w`, so a mode
//! envelope `exp(-r^2/w^2)` becomes `exp(-(X^2 + Y^2)/2)` and the normalized
//! Hermite-Gauss functions `psi_j(X) = H_j(X) exp(-X^2/2) / sqrt(2^j j! sqrt(pi))`
//! form an orthonormal basis of each transverse axis.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Projections `A_j = \int psi_j(X) exp(-gamma (X - delta)^2) dX` of a
/// displaced Gaussian onto the normalized Hermite-Gauss functions.
///
/// Completing the square gives `exp(-s (X - mu)^2)` with `s = 1/2 + gamma`,
/// `mu = gamma delta / s`, and integrating `H_{j+1} = 2X H_j - 2j H_{j-1}` by
/// parts yields the recurrence
///
/// ```text
/// A_{j+1} = (2 mu A_j - sqrt(2j) (1 - 1/s) A_{j-1}) / sqrt(2(j+1))
/// ```
#[derive(Debug, Clone)]
pub struct GaussianProjections {
    mu: f64,
    shrink: f64,
    /// Stored values are `A_j / exp(ln_scale)`; far-displaced Gaussians have
    /// `A_0` below the `f64` range while the orders near `delta^2/2` are O(1).
    ln_scale: f64,
    scaled: Vec<f64>,
}

const RESCALE: f64 = 1e150;

impl GaussianProjections {
    pub fn new(gamma: f64, delta: f64) -> Self {
        let s = 0.5 + gamma;
        let mu = gamma * delta / s;
        let ln_a0 = 0.5 * (std::f64::consts::PI / s).ln()
            - gamma * delta * delta / (2.0 * s)
            - 0.25 * std::f64::consts::PI.ln();
        Self {
            mu,
            shrink: 1.0 - 1.0 / s,
            ln_scale: ln_a0,
            scaled: vec![1.0],
        }
    }

    /// Makes orders `0..=order` available.
    pub fn extend_to(&mut self, order: usize) -> Result<()> {
        while self.scaled.len() <= order {
            let j = self.scaled.len() - 1;
            let prev = if j == 0 { 0.0 } else { self.scaled[j - 1] };
            let next = (2.0 * self.mu * self.scaled[j] - (2.0 * j as f64).sqrt() * self.shrink * prev)
                / (2.0 * (j + 1) as f64).sqrt();
            if !next.is_finite() {
                return Err(Error::RecurrenceOverflow { order: j + 1 });
            }
            self.scaled.push(next);
            if next.abs() > RESCALE {
                for v in &mut self.scaled {
                    *v /= RESCALE;
                }
                self.ln_scale += RESCALE.ln();
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    pub fn get(&self, order: usize) -> f64 {
        let v = self.scaled[order];
        if v == 0.0 {
            return 0.0;
        }
        let magnitude = (v.abs().ln() + self.ln_scale).exp();
        magnitude.copysign(v)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.scaled.len()).map(|j| self.get(j)).collect()
    }
}

pub fn gaussian_projections(order: usize, gamma: f64, delta: f64) -> Result<Vec<f64>> {
    let mut proj = GaussianProjections::new(gamma, delta);
    proj.extend_to(order)?;
    Ok(proj.to_vec())
}

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `ln |x|` for an arbitrarily large integer.
fn ln_abs(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Coefficients `b_k` of the Laguerre-to-Hermite expansion
///
/// ```text
/// e^{-rho^2/2} (X + iY)^l L_p^l(rho^2) / sqrt(pi (p+l)!/p!)
///     = sum_k i^k b_k psi_{N-k}(X) psi_k(Y),      N = 2p + l
/// ```
///
/// The `b_k` are real, `sum b_k^2 = 1`, and are proportional to symmetric
/// Krawtchouk polynomials. Those are generated exactly in integer arithmetic
/// by their three-term recurrence in `k`, which avoids the catastrophic
/// cancellation of the alternating binomial sum in floating point.
pub fn laguerre_to_hermite(p: u32, l: u32) -> Vec<f64> {
    let n_total = (2 * p + l) as u64;
    let m = (p + l) as u64;
    let mut kraw: Vec<BigInt> = Vec::with_capacity(n_total as usize + 1);
    kraw.push(binomial(n_total, m));
    if n_total >= 1 {
        let first = if m >= 1 {
            binomial(n_total - 1, m) - binomial(n_total - 1, m - 1)
        } else {
            binomial(n_total - 1, 0)
        };
        kraw.push(first);
    }
    let slope = BigInt::from(n_total as i64 - 2 * m as i64);
    for x in 1..n_total {
        let next = (&slope * &kraw[x as usize] - BigInt::from(x) * &kraw[x as usize - 1])
            / BigInt::from(n_total - x);
        kraw.push(next);
    }

    let lnf = ln_factorials(n_total as usize);
    let pu = p as usize;
    let lu = l as usize;
    let common = 0.5 * (lnf[pu + lu] + lnf[pu]) - 0.5 * n_total as f64 * std::f64::consts::LN_2;
    kraw.iter()
        .enumerate()
        .map(|(k, kr)| {
            if kr.is_zero() {
                return 0.0;
            }
            let nk = n_total as usize - k;
            let magnitude = (ln_abs(kr) + common - 0.5 * (lnf[nk] + lnf[k])).exp();
            // (-1)^p from the complex-Hermite identity, (-1)^k from the
            // Krawtchouk convention.
            let negative = kr.is_negative() ^ (p % 2 == 1) ^ (k % 2 == 1);
            if negative {
                -magnitude
            } else {
                magnitude
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;
    use std::f64::consts::PI;

    /// Normalized Hermite function by direct three-term recurrence.
    fn psi(j: usize, x: f64) -> f64 {
        let mut prev = 0.0;
        let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
        for k in 0..j {
            let next = (2.0f64).sqrt() * x * cur / ((k + 1) as f64).sqrt()
                - (k as f64 / (k + 1) as f64).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn projections_match_quadrature() {
        for &(gamma, delta) in &[(23.0, 0.0), (23.0, 1.7), (0.2, 2.5), (0.5, -1.0), (3.0, 4.0)] {
            let a = gaussian_projections(30, gamma, delta).unwrap();
            for j in [0usize, 1, 2, 7, 15, 30] {
                let r = quadrature::integrate(
                    |x| psi(j, x) * (-gamma * (x - delta) * (x - delta)).exp(),
                    -30.0,
                    30.0,
                    1e-13,
                    1e-15,
                    2000,
                )
                .unwrap();
                assert!(
                    (a[j] - r.value).abs() <= 1e-11 * r.abs_value.max(1e-3),
                    "gamma={gamma} delta={delta} j={j}: {} vs {}",
                    a[j],
                    r.value
                );
            }
        }
    }

    #[test]
    fn projections_complete() {
        // sum_j A_j^2 = \int exp(-2 gamma X^2) = sqrt(pi / (2 gamma))
        let gamma = 0.7;
        let a = gaussian_projections(400, gamma, 3.0).unwrap();
        let total: f64 = a.iter().map(|v| v * v).sum();
        assert!((total - (PI / (2.0 * gamma)).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn coefficients_are_unit_norm() {
        for &(p, l) in &[(0u32, 0u32), (2, 3), (10, 0), (0, 25), (50, 50), (120, 60)] {
            let b = laguerre_to_hermite(p, l);
            assert_eq!(b.len(), (2 * p + l + 1) as usize);
            let norm: f64 = b.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12, "p={p} l={l}: {norm}");
        }
    }

    #[test]
    fn expansion_reproduces_laguerre_gauss() {
        use crate::modes::laguerre;
        for &(p, l) in &[(2u32, 3u32), (0, 4), (5, 0), (7, 6)] {
            let b = laguerre_to_hermite(p, l);
            let n = (2 * p + l) as usize;
            let ratio: f64 = ((p + 1)..=(p + l)).map(|i| i as f64).product();
            for &(x, y) in &[(0.37, -0.81), (1.2, 0.4), (-2.0, 1.5)] {
                let rho2: f64 = x * x + y * y;
                let (re, im) = {
                    // (x + iy)^l
                    let mut z = (1.0f64, 0.0f64);
                    for _ in 0..l {
                        z = (z.0 * x - z.1 * y, z.0 * y + z.1 * x);
                    }
                    let lag = laguerre(p, l as f64, rho2) * (-0.5 * rho2).exp();
                    (z.0 * lag, z.1 * lag)
                };
                let mut sre = 0.0;
                let mut sim = 0.0;
                for (k, bk) in b.iter().enumerate() {
                    let t = bk * psi(n - k, x) * psi(k, y);
                    match k % 4 {
                        0 => sre += t,
                        1 => sim += t,
                        2 => sre -= t,
                        _ => sim -= t,
                    }
                }
                let norm = (PI * ratio).sqrt();
                assert!((sre * norm - re).abs() < 1e-11 * (1.0 + re.abs()), "p={p} l={l}");
                assert!((sim * norm - im).abs() < 1e-11 * (1.0 + im.abs()), "p={p} l={l}");
            }
        }
    }

    #[test]
    fn far_displaced_gaussian_keeps_its_weight() {
        // A_0 ~ exp(-810) underflows, the weight sits near order 1000.
        let gamma = 2.0;
        let delta = 45.0;
        let a = gaussian_projections(3000, gamma, delta).unwrap();
        assert_eq!(a[0], 0.0);
        let total: f64 = a.iter().map(|v| v * v).sum();
        assert!((total / (PI / (2.0 * gamma)).sqrt() - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn non_finite_input_reports_overflow() {
        let mut proj = GaussianProjections::new(1.0, f64::INFINITY);
        assert!(matches!(proj.extend_to(3), Err(Error::RecurrenceOverflow { .. })));
    }
}
