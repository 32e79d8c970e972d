//! Overlap between acoustic surface displacements and the readout beam.
//!
//! The beam reads the surface displacement weighted by its normalized
//! intensity profile `v(x, y) = (2 / (pi w0^2)) exp(-2 ((x - d)^2 + y^2) / w0^2)`.
//! Offsets are taken along `x`; the mirror is axisymmetric so any other
//! direction is a rotation of this one.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::PlanoConvexGeometry;
use crate::hermite::{gaussian_projections, laguerre_to_hermite};
use crate::modes::{radial_profile, FactorialRatio, ModeData, ModeIndex, Parity};
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    waist: f64,
    offset: f64,
}

impl BeamSpec {
    pub fn new(waist: f64, offset: f64) -> Result<Self> {
        if !(waist > 0.0) || !waist.is_finite() {
            return Err(Error::param("waist", waist, "must be positive"));
        }
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(Error::param("offset", offset, "must be non-negative"));
        }
        Ok(Self { waist, offset })
    }

    pub fn centered(waist: f64) -> Result<Self> {
        Self::new(waist, 0.0)
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_centered(&self) -> bool {
        self.offset == 0.0
    }

    /// Requires `d + w0 < D/2` so the beam sits on the mirror face.
    pub fn check_fits(&self, geometry: &PlanoConvexGeometry) -> Result<()> {
        let radius = 0.5 * geometry.diameter();
        if self.offset + self.waist < radius {
            Ok(())
        } else {
            Err(Error::BeamOffMirror {
                offset: self.offset,
                waist: self.waist,
                radius,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapWeight {
    pub index: ModeIndex,
    pub value: f64,
}

/// Normalized intensity of the beam at `(x, y)` (1/m²).
pub fn beam_profile(beam: &BeamSpec, x: f64, y: f64) -> f64 {
    let w2 = beam.waist * beam.waist;
    let dx = x - beam.offset;
    2.0 / (PI * w2) * (-2.0 * (dx * dx + y * y) / w2).exp()
}

/// Closed-form overlap of an axisymmetric mode with a centered beam:
/// `[2w^2 / (2w^2 + w0^2)] [(2w^2 - w0^2) / (2w^2 + w0^2)]^p`.
/// Modes with `l >= 1` integrate to zero against a centered beam.
pub fn overlap_centered(mode: &ModeData, beam: &BeamSpec) -> Result<OverlapWeight> {
    if !beam.is_centered() {
        return Err(Error::param("offset", beam.offset, "closed form needs a centered beam"));
    }
    let value = if mode.index.l() != 0 {
        0.0
    } else {
        let (lead, ratio) = centered_overlap_terms(mode.waist * mode.waist, beam.waist);
        lead * ratio.powi(mode.index.p() as i32)
    };
    Ok(OverlapWeight {
        index: mode.index,
        value,
    })
}

/// `(2w^2 / (2w^2 + w0^2), (2w^2 - w0^2) / (2w^2 + w0^2))`.
pub(crate) fn centered_overlap_terms(waist_sq: f64, beam_waist: f64) -> (f64, f64) {
    let a = 2.0 * waist_sq;
    let b = beam_waist * beam_waist;
    (a / (a + b), (a - b) / (a + b))
}

/// Scaled beam parameters in Hermite coordinates `X = sqrt2 x / w`:
/// the beam becomes `exp(-gamma (X - delta)^2 - gamma Y^2)`.
pub(crate) fn hermite_beam_parameters(waist_sq: f64, beam: &BeamSpec) -> (f64, f64) {
    let gamma = waist_sq / (beam.waist * beam.waist);
    let delta = SQRT_2 * beam.offset / waist_sq.sqrt();
    (gamma, delta)
}

/// Overlap of any mode with a possibly displaced beam.
///
/// The angular integral of the displaced beam against `cos(l phi)` is a
/// modified Bessel function of the radius, and the remaining radial integral
/// of `r^(l+1) exp(-beta r^2) L_p^l(alpha r^2) I_l(c r)` has a closed form in
/// a single Laguerre polynomial. That polynomial is run through a scaled
/// three-term recurrence, so every step stays well conditioned for any order.
pub fn overlap_offaxis(mode: &ModeData, beam: &BeamSpec) -> Result<OverlapWeight> {
    let index = mode.index;
    let (p, l) = (index.p(), index.l());
    let zero = OverlapWeight { index, value: 0.0 };
    if index.parity() == Parity::Sine || (l > 0 && beam.is_centered()) {
        return Ok(zero);
    }
    let w2 = mode.waist * mode.waist;
    let b2 = beam.waist * beam.waist;
    let d = beam.offset;
    let (lead, ratio) = centered_overlap_terms(w2, beam.waist);
    // Radial Gaussian rate, Laguerre argument rate and Bessel argument rate.
    let beta = 1.0 / w2 + 2.0 / b2;
    let alpha = 2.0 / w2;
    let c = 4.0 * d / b2;
    let shift = alpha * c * c / (4.0 * beta * beta);

    // q_k = s^k L_k^l(K / s) with s the centered ratio; finite as s -> 0.
    let l_f = l as f64;
    let mut prev = 1.0;
    let mut cur = if p == 0 { 1.0 } else { (1.0 + l_f) * ratio - shift };
    let mut ln_scale = 0.0;
    for k in 1..p {
        let k_f = k as f64;
        let next = (((2.0 * k_f + 1.0 + l_f) * ratio - shift) * cur - (k_f + l_f) * ratio * ratio * prev) / (k_f + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > 1e200 {
            prev *= 1e-200;
            cur *= 1e-200;
            ln_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    if cur == 0.0 {
        return Ok(zero);
    }
    let mut ln_value = lead.ln() - 2.0 * d * d / (2.0 * w2 + b2) + cur.abs().ln() + ln_scale;
    if l > 0 {
        ln_value += l_f * (c / (beta * (2.0 * w2).sqrt())).ln();
    }
    let value = ln_value.exp().copysign(cur);
    if !value.is_finite() {
        return Err(Error::RecurrenceOverflow {
            order: index.shell() as usize,
        });
    }
    Ok(OverlapWeight { index, value })
}

/// Overlap by expanding the Laguerre-Gauss surface profile on products of
/// Hermite-Gauss functions in `x` and `y`; each factor integrates against the
/// displaced Gaussian through a recurrence in the Hermite order.
///
/// The expansion coefficients alternate in sign, so the absolute error is a
/// few ulps of `||u|| ||v||` (see [`cauchy_schwarz_scale`]). High angular
/// orders near the axis can lose all significant digits; prefer
/// [`overlap_offaxis`] for single modes.
pub fn overlap_hermite(mode: &ModeData, beam: &BeamSpec) -> Result<OverlapWeight> {
    let index = mode.index;
    let (p, l) = (index.p(), index.l());
    let order = index.shell() as usize;
    let w2 = mode.waist * mode.waist;
    let (gamma, delta) = hermite_beam_parameters(w2, beam);

    let along = gaussian_projections(order, gamma, delta)?;
    let across = gaussian_projections(order, gamma, 0.0)?;
    let coefficients = laguerre_to_hermite(p, l);

    // Re(i^k) selects even k for cosine parity, Im(i^k) odd k for sine.
    let mut sum = 0.0;
    for (k, b) in coefficients.iter().enumerate() {
        let phase = match (index.parity(), k % 4) {
            (Parity::Cosine, 0) | (Parity::Sine, 1) => 1.0,
            (Parity::Cosine, 2) | (Parity::Sine, 3) => -1.0,
            _ => continue,
        };
        sum += phase * b * along[order - k] * across[k];
    }
    // Undo the unit normalization of the Laguerre-Gauss function and map
    // dX dY back to dx dy.
    let ln_norm = 0.5 * (PI.ln() + FactorialRatio::new(p, l).ln());
    let prefactor = 2.0 / (PI * beam.waist * beam.waist) * 0.5 * w2;
    let value = if sum == 0.0 {
        0.0
    } else {
        prefactor * (sum.abs().ln() + ln_norm).exp().copysign(sum)
    };
    if !value.is_finite() {
        return Err(Error::RecurrenceOverflow { order });
    }
    Ok(OverlapWeight { index, value })
}

/// `||u|| ||v||` over the plane, an upper bound on `|<u, v>|`.
pub fn cauchy_schwarz_scale(mode: &ModeData, beam: &BeamSpec) -> f64 {
    let index = mode.index;
    let angular = if index.l() == 0 { 2.0 * PI } else { PI };
    let ln_u2 = (0.25 * mode.waist * mode.waist * angular).ln() + FactorialRatio::new(index.p(), index.l()).ln();
    let ln_v2 = -(PI * beam.waist * beam.waist).ln();
    (0.5 * (ln_u2 + ln_v2)).exp()
}

/// Reference overlap by direct two-dimensional quadrature in polar
/// coordinates about the mirror center. Shares nothing with the fast routes
/// beyond the surface profile definition.
///
/// At radius `r` the angular integrand `exp(i l phi + kappa cos phi)` is
/// entire and periodic, so the trapezoidal rule may run along
/// `phi = t + i eta` without changing the integral. Taking
/// `sinh eta = l / kappa` puts the contour through the saddle point, where
/// the integrand no longer oscillates around a result that is exponentially
/// smaller than its peak.
pub fn overlap_quadrature_oracle(
    geometry: &PlanoConvexGeometry,
    mode: &ModeData,
    beam: &BeamSpec,
) -> Result<OverlapWeight> {
    let index = mode.index;
    let w = mode.waist;
    let extent = beam.offset + 8.0 * beam.waist + 4.0 * w * (index.shell() as f64 + 1.0).sqrt();
    let edge = extent.min(0.5 * geometry.diameter());
    let l = index.l() as f64;
    let w0sq = beam.waist * beam.waist;
    let peak = 2.0 / (PI * w0sq);
    let d = beam.offset;

    let mut failure = None;
    // Returns the signed radial integrand and its cancellation-free scale.
    let mut radial = |r: f64| -> (f64, f64) {
        let shape = radial_profile(w, index.p(), index.l(), r);
        if shape == 0.0 {
            return (0.0, 0.0);
        }
        // v(r cos phi, r sin phi) = peak exp(base + kappa cos phi)
        let base = -2.0 * (r * r + d * d) / w0sq;
        let kappa = 4.0 * r * d / w0sq;
        let eta = if kappa > 0.0 && l > 0.0 { (l / kappa).asinh() } else { 0.0 };
        let (ch, sh) = (eta.cosh(), eta.sinh());
        let bandwidth = (l + kappa * ch + 8.0) as usize;
        let angular = quadrature::integrate_periodic_complex(
            |t| {
                let modulus = base - l * eta + kappa * ch * t.cos();
                let phase = l * t - kappa * sh * t.sin();
                Complex64::from_polar(modulus.exp(), phase)
            },
            2 * bandwidth,
            1e-14,
            1 << 22,
        );
        match angular {
            Ok(a) => {
                let part = match index.parity() {
                    Parity::Cosine => a.value.re,
                    Parity::Sine => a.value.im,
                };
                let weight = r * shape * peak;
                (weight * part, (weight * a.abs_value).abs())
            }
            Err(e) => {
                failure.get_or_insert(e);
                (f64::NAN, f64::NAN)
            }
        }
    };
    let scale = quadrature::integrate(|r| radial(r).1, 0.0, edge, 1e-6, 0.0, 20_000)?.value;
    let value = quadrature::integrate(|r| radial(r).0, 0.0, edge, 1e-13, 1e-15 * scale, 20_000);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(OverlapWeight {
        index,
        value: value?.value,
    })
}
