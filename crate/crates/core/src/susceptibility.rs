//! Effective susceptibility of the beam-averaged displacement and the
//! thermal noise spectra that follow from it.
//!
//! Each mode is a damped oscillator `chi_n = 1 / (M_n (Omega_n^2 - Omega^2 - i Omega_n^2 Phi))`
//! and the beam sees `chi_eff = sum_n <u_n, v>^2 chi_n`.
//!
//! # Enumeration
//!
//! Families `n = 1, 2, ...` are visited in order. Inside a family the modes
//! are grouped in shells of equal `2p + l`, which share one eigenfrequency.
//! A centered beam only couples to the `l = 0` modes and the closed-form
//! overlap is used directly. An offset beam is summed shell by shell in the
//! Hermite-Gauss basis: within a degenerate shell the sum of
//! `<u, v>^2 / M` is basis independent, and the Hermite-Gauss overlaps factor
//! into two one-dimensional recurrences.
//!
//! # Truncation
//!
//! Completeness of the transverse modes gives, for every family, the total
//! weight `sum <u, v>^2 / M = 2 / (pi rho h0 w0^2)`. The weight not yet
//! visited, divided by the smallest remaining `Omega_n^2`, bounds the tail of
//! a family. Across families the terms fall off like `1/n^2`, too slowly to
//! truncate, so the families beyond the last one visited are summed in closed
//! form. With `x = alpha (N + 1) / n` the static family sum is
//! `W / (Omega_M^2 n^2) E[1 / (1 + x)]`, where the expectation runs over the
//! beam's weights on the shell orders `N`. The mean and variance of `N` follow
//! from treating the beam, in mode coordinates, as a displaced squeezed
//! Gaussian state, and convexity brackets the expectation:
//!
//! ```text
//! 1 / (1 + m)  <=  E[1 / (1 + x)]  <=  1 / (1 + m) + Var(x) / (1 + m)^2,     m = E[x]
//! ```

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{LossAngle, PlanoConvexGeometry};
use crate::hermite::GaussianProjections;
use crate::modes::{acoustic_waist_sq, axial_effective_mass, eigenvalue_ratio, transverse_splitting, ModeData};
use crate::overlap::{centered_overlap_terms, hermite_beam_parameters, BeamSpec};

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Total number of modes that may be visited.
    pub max_modes: u64,
    /// Relative tolerance on the omitted contribution.
    pub epsilon: f64,
    pub n_max: u32,
    /// Radial order cap. Offset beams are summed in whole shells, capped at
    /// shell order `2 p_max + l_max`.
    pub p_max: u32,
    pub l_max: u32,
    /// Add the closed-form estimate of the families beyond the last one
    /// visited. Without it the reported value is the bare partial sum.
    pub analytic_remainder: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            max_modes: 1_000_000,
            epsilon: 1e-4,
            n_max: 200,
            p_max: 100_000,
            l_max: 200_000,
            analytic_remainder: true,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_modes < 1 {
            return Err(Error::param("max_modes", 0.0, "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param("epsilon", self.epsilon, "must lie in (0, 1)"));
        }
        if self.n_max < 1 {
            return Err(Error::param("n_max", 0.0, "must be at least 1"));
        }
        Ok(())
    }

    fn max_shell(&self, centered: bool) -> u64 {
        if centered {
            2 * self.p_max as u64
        } else {
            2 * self.p_max as u64 + self.l_max as u64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityResult {
    /// `modal_sum + remainder` (m/N).
    pub value: Complex64,
    /// Sum over the visited modes only.
    pub modal_sum: Complex64,
    /// Closed-form estimate for the families after `families`.
    pub remainder: Complex64,
    pub modes_used: u64,
    /// Relative size of what is still uncertain: family tails plus the
    /// uncertainty of the remainder.
    pub tail_bound: f64,
    /// Whether `tail_bound` is a strict bound rather than an estimate.
    pub tail_is_rigorous: bool,
    /// Last longitudinal order visited.
    pub families: u32,
    /// Partial sum of each visited family, `family_sums[n - 1]`.
    pub family_sums: Vec<Complex64>,
}

impl SusceptibilityResult {
    pub fn converged(&self, epsilon: f64) -> bool {
        self.tail_bound <= epsilon
    }
}

/// Lorentzian susceptibility of one mode with structural damping.
pub fn chi_mode(mode: &ModeData, omega: f64, loss_angle: f64) -> Complex64 {
    let w2 = mode.eigenfrequency * mode.eigenfrequency;
    let denom = Complex64::new(w2 - omega * omega, -w2 * loss_angle);
    1.0 / (mode.effective_mass * denom)
}

/// One shell of a family: total `<u, v>^2 / M` and the number of modes.
#[derive(Debug, Clone, Copy)]
struct Shell {
    order: u64,
    weight: f64,
    count: u64,
}

enum FamilyModes {
    Centered {
        ratio_sq: f64,
        mass: f64,
        next_p: u64,
        current: f64,
    },
    Offset {
        along: GaussianProjections,
        across: GaussianProjections,
        along_sq: Vec<f64>,
        across_sq: Vec<f64>,
        scale: f64,
        next_order: u64,
        visited: f64,
    },
}

impl FamilyModes {
    fn new(geometry: &PlanoConvexGeometry, beam: &BeamSpec, n: u32) -> Self {
        let w2 = acoustic_waist_sq(geometry, n);
        if beam.is_centered() {
            let (lead, ratio) = centered_overlap_terms(w2, beam.waist());
            FamilyModes::Centered {
                ratio_sq: ratio * ratio,
                mass: axial_effective_mass(geometry, n),
                next_p: 0,
                current: lead * lead,
            }
        } else {
            let (gamma, delta) = hermite_beam_parameters(w2, beam);
            let w0sq = beam.waist() * beam.waist();
            let rho_h0 = geometry.material().density() * geometry.thickness();
            // <u, v>^2 / M for a Hermite-Gauss mode is scale * A_j^2 A_k^2.
            let scale = (2.0 / (PI * w0sq)).powi(2) * 0.5 * w2 * 2.0 / rho_h0;
            FamilyModes::Offset {
                along: GaussianProjections::new(gamma, delta),
                across: GaussianProjections::new(gamma, 0.0),
                along_sq: Vec::new(),
                across_sq: Vec::new(),
                scale,
                next_order: 0,
                visited: 0.0,
            }
        }
    }

    fn next_order(&self) -> u64 {
        match self {
            FamilyModes::Centered { next_p, .. } => 2 * next_p,
            FamilyModes::Offset { next_order, .. } => *next_order,
        }
    }

    fn next_shell(&mut self) -> Result<Shell> {
        match self {
            FamilyModes::Centered {
                ratio_sq,
                mass,
                next_p,
                current,
                ..
            } => {
                let shell = Shell {
                    order: 2 * *next_p,
                    weight: *current / *mass,
                    count: 1,
                };
                *current *= *ratio_sq;
                *next_p += 1;
                Ok(shell)
            }
            FamilyModes::Offset {
                along,
                across,
                along_sq,
                across_sq,
                scale,
                next_order,
                visited,
            } => {
                let order = *next_order as usize;
                along.extend_to(order)?;
                across.extend_to(order)?;
                while along_sq.len() <= order {
                    let j = along_sq.len();
                    along_sq.push(along.get(j).powi(2));
                    across_sq.push(across.get(j).powi(2));
                }
                // The beam is even in y, so only even k contribute.
                let mut sum = 0.0;
                for k in (0..=order).step_by(2) {
                    sum += along_sq[order - k] * across_sq[k];
                }
                let weight = *scale * sum;
                *visited += weight;
                *next_order += 1;
                Ok(Shell {
                    order: order as u64,
                    weight,
                    count: order as u64 / 2 + 1,
                })
            }
        }
    }

    /// `<u, v>^2 / M` summed over the shells not yet visited.
    fn remaining_weight(&self, total: f64) -> f64 {
        match self {
            FamilyModes::Centered {
                ratio_sq,
                mass,
                current,
                ..
            } => {
                if *ratio_sq >= 1.0 {
                    f64::INFINITY
                } else {
                    *current / ((1.0 - *ratio_sq) * *mass)
                }
            }
            FamilyModes::Offset { visited, .. } => (total - *visited).max(0.0),
        }
    }
}

/// `sum_{m >= first} 1 / (m^2 + z)`: explicit terms until `m^2` dominates
/// `|z|`, then Euler-Maclaurin from there.
fn tail_sum(first: u64, z: Complex64) -> Complex64 {
    let mut m = first.max(1);
    let mut sum = Complex64::new(0.0, 0.0);
    let explicit_end = m + 64;
    while m < explicit_end || ((m * m) as f64) < 4.0 * z.norm() {
        sum += 1.0 / ((m * m) as f64 + z);
        m += 1;
    }
    let a = m as f64;
    let c = z.sqrt();
    // \int_a^\infty dx / (x^2 + z) = atan(c / a) / c
    let integral = if c.norm() < 1e-6 * a {
        1.0 / a - z / (3.0 * a * a * a)
    } else {
        (c / a).atan() / c
    };
    let d = a * a + z;
    let f = 1.0 / d;
    let f1 = -2.0 * a / (d * d);
    let f3 = -24.0 * a * (a * a - z) / (d * d * d * d);
    sum + integral + 0.5 * f - f1 / 12.0 + f3 / 720.0
}

/// Mean and variance of `x = alpha (N + 1) / n` over the beam's shell weights in
/// family `n`, taken as a continuous variable.
///
/// In the Hermite coordinates of the family the beam is `exp(-gamma (X - delta)^2)`
/// along the offset and `exp(-gamma Y^2)` across it. Each factor is a Gaussian
/// state with position variance `1/(4 gamma)` and momentum variance `gamma`,
/// whose number operator has mean `(delta^2 + s_x + s_p - 1)/2` and variance
/// `delta^2 s_x + (s_x^2 + s_p^2)/2 - 1/4`.
fn shell_moments(first_waist_sq: f64, splitting: f64, beam: &BeamSpec, n: f64) -> (f64, f64) {
    let w2 = first_waist_sq / n;
    let gamma = w2 / (beam.waist() * beam.waist());
    let delta_sq = 2.0 * beam.offset() * beam.offset() / w2;
    let s_x = 0.25 / gamma;
    let s_p = gamma;
    let mean_across = 0.5 * (s_x + s_p - 1.0);
    let var_across = 0.5 * (s_x * s_x + s_p * s_p) - 0.25;
    let mean = 2.0 * mean_across + 0.5 * delta_sq;
    let var = 2.0 * var_across + delta_sq * s_x;
    let scale = splitting / n;
    (scale * (mean + 1.0), scale * scale * var.max(0.0))
}

/// `sum_{m >= first} f(m)` for a smooth `f` decaying like `1/m^2`: explicit
/// terms, then Euler-Maclaurin with the integral mapped onto `(0, 1]`.
fn smooth_tail(first: u64, f: impl Fn(f64) -> Complex64) -> Result<Complex64> {
    const EXPLICIT: u64 = 64;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in first..first + EXPLICIT {
        sum += f(m as f64);
    }
    let a = (first + EXPLICIT) as f64;
    let mapped = |t: f64| f(a / t) * (a / (t * t));
    let re = crate::quadrature::integrate(|t| mapped(t).re, 0.0, 1.0, 1e-11, 1e-300, 2000)?;
    let im = crate::quadrature::integrate(|t| mapped(t).im, 0.0, 1.0, 1e-11, 1e-300, 2000)?;
    let h = 0.05 * a;
    let (fm2, fm1, f0, fp1, fp2) = (f(a - 2.0 * h), f(a - h), f(a), f(a + h), f(a + 2.0 * h));
    let d1 = (fp1 - fm1) / (2.0 * h);
    let d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h);
    Ok(sum + Complex64::new(re.value, im.value) + 0.5 * f0 - d1 / 12.0 + d3 / 720.0)
}

/// Closed-form sum of the families after `last`, with the half-width of the
/// convexity bracket. The bracket is strict at zero frequency.
fn family_remainder(
    geometry: &PlanoConvexGeometry,
    beam: &BeamSpec,
    last: u32,
    omega: f64,
    loss_angle: f64,
) -> Result<(Complex64, f64)> {
    let first_waist_sq = acoustic_waist_sq(geometry, 1);
    let splitting = transverse_splitting(geometry);
    let omega_m_sq = geometry.fundamental_frequency().powi(2);
    let rho_h0 = geometry.material().density() * geometry.thickness();
    let weight = 2.0 / (PI * rho_h0 * beam.waist() * beam.waist());
    let damping = Complex64::new(1.0, -loss_angle);
    let omega_sq = omega * omega;
    // Per family: the mean model g, and the bracket width h.
    let pieces = |n: f64| {
        let (mean, var) = shell_moments(first_waist_sq, splitting, beam, n);
        let stiffness = omega_m_sq * n * n * damping;
        let denom = stiffness * (1.0 + mean) - omega_sq;
        let g = weight / denom;
        let h = weight * var * stiffness.norm() / denom.norm_sqr();
        (g, h)
    };
    let centre = smooth_tail(last as u64 + 1, |n| {
        let (g, h) = pieces(n);
        g + 0.5 * h * g / g.norm()
    })?;
    let width = smooth_tail(last as u64 + 1, |n| Complex64::new(0.5 * pieces(n).1, 0.0))?;
    Ok((centre, width.re))
}

struct Response {
    omega_sq: f64,
    loss_angle: f64,
    omega_m_sq: f64,
    splitting: f64,
}

impl Response {
    /// `1 / (Omega_{n,N}^2 (1 - i Phi) - Omega^2)`.
    fn term(&self, n: u32, order: u64) -> Complex64 {
        let k = self.omega_m_sq * eigenvalue_ratio(self.splitting, n, order);
        1.0 / Complex64::new(k - self.omega_sq, -k * self.loss_angle)
    }

    fn static_term(&self, n: u32, order: u64) -> f64 {
        1.0 / (self.omega_m_sq * eigenvalue_ratio(self.splitting, n, order))
    }

    /// Lower bound of `|Omega_{n,N}^2 (1 - i Phi) - Omega^2|` for every shell
    /// from `order` on, or `None` while resonances may still lie ahead.
    fn min_gap(&self, n: u32, order: u64) -> Option<f64> {
        let gap = self.omega_m_sq * eigenvalue_ratio(self.splitting, n, order) - self.omega_sq;
        (gap > 0.0).then_some(gap)
    }
}

struct Walk<'a> {
    geometry: &'a PlanoConvexGeometry,
    beam: &'a BeamSpec,
    policy: &'a TruncationPolicy,
    response: Response,
    total_weight: f64,
    modes_used: u64,
}

struct FamilyOutcome {
    sum: Complex64,
    static_sum: f64,
    /// Absolute bound on the unvisited shells of the family.
    tail: f64,
    budget_hit: bool,
    /// Stopped at the shell-order cap rather than on its tail.
    capped: bool,
}

impl<'a> Walk<'a> {
    fn new(
        geometry: &'a PlanoConvexGeometry,
        beam: &'a BeamSpec,
        omega: f64,
        loss_angle: f64,
        policy: &'a TruncationPolicy,
    ) -> Self {
        let w0sq = beam.waist() * beam.waist();
        let rho_h0 = geometry.material().density() * geometry.thickness();
        Self {
            geometry,
            beam,
            policy,
            response: Response {
                omega_sq: omega * omega,
                loss_angle,
                omega_m_sq: geometry.fundamental_frequency().powi(2),
                splitting: transverse_splitting(geometry),
            },
            total_weight: 2.0 / (PI * rho_h0 * w0sq),
            modes_used: 0,
        }
    }

    /// Visits family `n` until its tail is below `eps_family` of its sum,
    /// the shell cap, or the mode budget. `on_shell` sees the running static
    /// total after every shell.
    fn family(
        &mut self,
        n: u32,
        eps_family: f64,
        mut on_shell: impl FnMut(u64, f64) -> bool,
    ) -> Result<FamilyOutcome> {
        let mut modes = FamilyModes::new(self.geometry, self.beam, n);
        let max_shell = self.policy.max_shell(self.beam.is_centered());
        let mut sum = Complex64::new(0.0, 0.0);
        let mut static_sum = 0.0;
        let mut budget_hit = false;
        let mut capped = false;
        loop {
            if modes.next_order() > max_shell {
                capped = true;
                break;
            }
            let shell = modes.next_shell()?;
            sum += shell.weight * self.response.term(n, shell.order);
            static_sum += shell.weight * self.response.static_term(n, shell.order);
            self.modes_used += shell.count;
            if !on_shell(self.modes_used, static_sum) {
                budget_hit = true;
                break;
            }
            if self.modes_used >= self.policy.max_modes {
                budget_hit = true;
                break;
            }
            let remaining = modes.remaining_weight(self.total_weight);
            let next = modes.next_order();
            if let Some(gap) = self.response.min_gap(n, next) {
                let tail = remaining / gap;
                if tail <= eps_family * sum.norm() {
                    break;
                }
            }
        }
        let remaining = modes.remaining_weight(self.total_weight);
        let next = modes.next_order();
        let tail = match self.response.min_gap(n, next) {
            Some(gap) => remaining / gap,
            None => f64::INFINITY,
        };
        Ok(FamilyOutcome {
            sum,
            static_sum,
            tail: if remaining == 0.0 { 0.0 } else { tail },
            budget_hit,
            capped,
        })
    }
}

/// Effective susceptibility at angular frequency `omega` with loss angle
/// `loss_angle` (the value of the loss angle at that frequency).
///
/// Returns [`Error::BudgetExceeded`] with the partial result when the
/// policy's caps are reached before the relative tail drops below `epsilon`.
pub fn chi_eff(
    geometry: &PlanoConvexGeometry,
    beam: &BeamSpec,
    omega: f64,
    loss_angle: f64,
    policy: &TruncationPolicy,
) -> Result<SusceptibilityResult> {
    policy.validate()?;
    beam.check_fits(geometry)?;
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::param("omega", omega, "must be non-negative"));
    }
    if !(0.0..1.0).contains(&loss_angle) {
        return Err(Error::param("loss_angle", loss_angle, "must lie in [0, 1)"));
    }

    // Families above resonance can cancel each other, so the per-family
    // tolerance is tightened until their tails fit in the total.
    let mut eps_family = 0.5 * policy.epsilon;
    for attempt in 0..6 {
        match family_pass(geometry, beam, omega, loss_angle, policy, eps_family, attempt < 5)? {
            Pass::Done(result) => return result,
            Pass::Tighten(scale) => eps_family *= scale,
        }
    }
    unreachable!("the last pass never asks to tighten")
}

enum Pass {
    Done(Result<SusceptibilityResult>),
    Tighten(f64),
}

fn family_pass(
    geometry: &PlanoConvexGeometry,
    beam: &BeamSpec,
    omega: f64,
    loss_angle: f64,
    policy: &TruncationPolicy,
    eps_family: f64,
    may_tighten: bool,
) -> Result<Pass> {
    let mut walk = Walk::new(geometry, beam, omega, loss_angle, policy);
    let omega_m_sq = walk.response.omega_m_sq;
    let weight = walk.total_weight;
    let z_bound = Complex64::new(-(omega * omega) / omega_m_sq, 0.0);
    let rigorous = !policy.analytic_remainder || omega == 0.0;

    let mut modal_sum = Complex64::new(0.0, 0.0);
    let mut family_tails = 0.0;
    let mut family_sums = Vec::new();
    let mut family_abs = 0.0;
    let mut capped = false;

    for n in 1..=policy.n_max {
        let outcome = walk.family(n, eps_family, |_, _| true)?;
        modal_sum += outcome.sum;
        family_tails += outcome.tail;
        family_sums.push(outcome.sum);
        family_abs += outcome.sum.norm();
        capped |= outcome.capped;

        let nf = n as f64;
        let next_above = omega_m_sq * (nf + 1.0).powi(2) > 2.0 * omega * omega;
        let (remainder, remainder_uncertainty) = if policy.analytic_remainder {
            if next_above {
                family_remainder(geometry, beam, n, omega, loss_angle)?
            } else {
                (Complex64::new(0.0, 0.0), f64::INFINITY)
            }
        } else {
            let bound = if next_above {
                weight / omega_m_sq * tail_sum(n as u64 + 1, z_bound).re
            } else {
                f64::INFINITY
            };
            (Complex64::new(0.0, 0.0), bound)
        };

        let value = modal_sum + remainder;
        let tail_bound = (family_tails + remainder_uncertainty) / value.norm();
        let snapshot = || SusceptibilityResult {
            value,
            modal_sum,
            remainder,
            modes_used: walk.modes_used,
            tail_bound,
            tail_is_rigorous: rigorous,
            families: n,
            family_sums: family_sums.clone(),
        };
        if next_above && tail_bound <= policy.epsilon {
            return Ok(Pass::Done(Ok(snapshot())));
        }
        if may_tighten && !capped && !outcome.budget_hit && next_above && family_tails > 0.75 * policy.epsilon * value.norm() {
            let scale = (0.5 * value.norm() / family_abs).min(0.5);
            if scale * eps_family > 1e-15 {
                return Ok(Pass::Tighten(scale));
            }
        }
        if outcome.budget_hit || n == policy.n_max {
            return Ok(Pass::Done(Err(Error::BudgetExceeded {
                partial: Box::new(snapshot()),
            })));
        }
    }
    unreachable!("n_max >= 1 always reaches the last family")
}


/// Zero-frequency susceptibility without damping, `sum <u_n, v>^2 / (M_n Omega_n^2)`.
pub fn chi_eff_static(
    geometry: &PlanoConvexGeometry,
    beam: &BeamSpec,
    policy: &TruncationPolicy,
) -> Result<SusceptibilityResult> {
    chi_eff(geometry, beam, 0.0, 0.0, policy)
}

/// Single-sided thermal force spectrum from the fluctuation-dissipation
/// theorem, `S_T = -(2 k_B T / Omega) Im(1 / chi)`.
pub fn thermal_force_spectrum(chi: Complex64, omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::param("omega", omega, "spectra need a positive frequency"));
    }
    if !(temperature >= 0.0) {
        return Err(Error::param("temperature", temperature, "must be non-negative"));
    }
    Ok(-2.0 * BOLTZMANN * temperature / omega * (1.0 / chi).im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    /// Angular frequency (rad/s).
    pub omega: f64,
    pub temperature: f64,
    pub loss_angle: f64,
    pub chi: Complex64,
    /// Thermal force spectrum (N² s).
    pub force: f64,
    /// `(2 k_B T / Omega) Im chi_eff[Omega]` (m² s).
    pub displacement: f64,
    /// Low-frequency form `2 k_B T (Phi / Omega) chi_eff[0]` (m² s).
    pub displacement_approx: f64,
    pub tail_bound: f64,
}

pub fn displacement_noise_spectrum(
    geometry: &PlanoConvexGeometry,
    beam: &BeamSpec,
    omega: f64,
    temperature: f64,
    loss: &LossAngle,
    policy: &TruncationPolicy,
) -> Result<SpectrumPoint> {
    if !(omega > 0.0) {
        return Err(Error::param("omega", omega, "spectra need a positive frequency"));
    }
    if !(temperature >= 0.0) {
        return Err(Error::param("temperature", temperature, "must be non-negative"));
    }
    let phi = loss.at(omega);
    let dynamic = chi_eff(geometry, beam, omega, phi, policy)?;
    let stat = chi_eff_static(geometry, beam, policy)?;
    let kt2 = 2.0 * BOLTZMANN * temperature;
    Ok(SpectrumPoint {
        omega,
        temperature,
        loss_angle: phi,
        chi: dynamic.value,
        force: thermal_force_spectrum(dynamic.value, omega, temperature)?,
        displacement: kt2 / omega * dynamic.value.im,
        displacement_approx: kt2 * phi / omega * stat.value.re,
        tail_bound: dynamic.tail_bound.max(stat.tail_bound),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalMassApprox {
    /// `(12 / pi^2) (pi/4) rho h0 w0^2` (kg).
    pub optical_mass: f64,
    pub fundamental_frequency: f64,
    /// `1 / (M_opt Omega_M^2)` (m/N).
    pub chi_approx: f64,
}

/// Single-oscillator estimate obtained by treating all transverse modes of a
/// family as degenerate; always above the full sum.
pub fn optical_mass_approx(geometry: &PlanoConvexGeometry, beam: &BeamSpec) -> Result<OpticalMassApprox> {
    if !beam.is_centered() {
        return Err(Error::param("offset", beam.offset(), "optical mass needs a centered beam"));
    }
    let optical_mass = 12.0 / (PI * PI)
        * (PI / 4.0)
        * geometry.material().density()
        * geometry.thickness()
        * beam.waist()
        * beam.waist();
    let omega_m = geometry.fundamental_frequency();
    Ok(OpticalMassApprox {
        optical_mass,
        fundamental_frequency: omega_m,
        chi_approx: 1.0 / (optical_mass * omega_m * omega_m),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub checkpoint: u64,
    /// Modes actually summed; exceeds `checkpoint` only when the checkpoint
    /// falls inside a degenerate shell of an offset beam.
    pub modes_used: u64,
    pub value: f64,
}

/// Bare zero-frequency partial sums in the canonical enumeration order,
/// recorded at each mode-count checkpoint.
pub fn convergence_study(
    geometry: &PlanoConvexGeometry,
    beam: &BeamSpec,
    checkpoints: &[u64],
    policy: &TruncationPolicy,
) -> Result<Vec<ConvergencePoint>> {
    policy.validate()?;
    beam.check_fits(geometry)?;
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 {
        return Err(Error::InvalidSpec("checkpoints must be positive and increasing".into()));
    }
    let last = *checkpoints.last().expect("non-empty");
    let capped = TruncationPolicy {
        max_modes: u64::MAX,
        ..*policy
    };
    let mut walk = Walk::new(geometry, beam, 0.0, 0.0, &capped);
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut pending = checkpoints.iter().copied().peekable();
    let mut total = 0.0;
    let mut n = 1;
    while pending.peek().is_some() {
        let base = total;
        let outcome = walk.family(n, 0.5 * policy.epsilon, |used, family_sum| {
            while let Some(&c) = pending.peek() {
                if used >= c {
                    points.push(ConvergencePoint {
                        checkpoint: c,
                        modes_used: used,
                        value: base + family_sum,
                    });
                    pending.next();
                } else {
                    break;
                }
            }
            used < last
        })?;
        total += outcome.static_sum;
        n += 1;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{solve_geometry, Material};
    use crate::modes::{mode_data, ModeIndex};
    use crate::overlap::overlap_centered;

    fn reference_mirror() -> PlanoConvexGeometry {
        solve_geometry(20.0, 0.07, Material::fused_silica()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn partial(err: Error) -> SusceptibilityResult {
        match err {
            Error::BudgetExceeded { partial } => *partial,
            other => panic!("expected budget error, got {other}"),
        }
    }

    #[test]
    fn static_and_resonant_limits() {
        let g = reference_mirror();
        let m = mode_data(&g, ModeIndex::axial(1, 0).unwrap());
        let k = m.effective_mass * m.eigenfrequency.powi(2);
        let c = chi_mode(&m, 0.0, 0.0);
        assert_eq!(c.im, 0.0);
        assert!(rel(c.re, 1.0 / k) < 1e-15);
        let r = chi_mode(&m, m.eigenfrequency, 1e-6);
        assert!(r.re.abs() < 1e-12 * r.im.abs());
        assert!(rel(r.im, 1.0 / (k * 1e-6)) < 1e-9);
        let c = chi_mode(&m, 0.0, 1e-6);
        assert!(rel(c.norm(), 1.0 / (1.117 * m.eigenfrequency.powi(2))) < 2e-3);
    }

    #[test]
    fn tail_sum_against_direct_summation() {
        for &z in &[
            Complex64::new(0.0, 0.0),
            Complex64::new(5.3, 0.0),
            Complex64::new(-30.0, 0.2),
            Complex64::new(4.0, -1e-6),
        ] {
            for first in [1u64, 7, 200] {
                let direct: Complex64 = (first..2_000_000).map(|m| 1.0 / ((m * m) as f64 + z)).sum();
                // Direct sum truncated at M misses about 1/M.
                let expected = direct + 1.0 / 2_000_000.0 + 0.5 / 4e12;
                let got = tail_sum(first, z);
                assert!((got - expected).norm() < 1e-12 * expected.norm().max(1e-3), "z={z} first={first}");
            }
        }
    }

    #[test]
    fn single_mode_policy_is_one_term() {
        let g = reference_mirror();
        let beam = BeamSpec::centered(0.02).unwrap();
        let policy = TruncationPolicy {
            n_max: 1,
            p_max: 0,
            l_max: 0,
            analytic_remainder: false,
            ..Default::default()
        };
        let r = partial(chi_eff_static(&g, &beam, &policy).unwrap_err());
        let m = mode_data(&g, ModeIndex::axial(1, 0).unwrap());
        let o = overlap_centered(&m, &beam).unwrap().value;
        let expected = o * o / (m.effective_mass * m.eigenfrequency.powi(2));
        assert_eq!(r.modes_used, 1);
        assert!(rel(r.value.re, expected) < 1e-14);
        assert_eq!(r.value.im, 0.0);
    }

    #[test]
    fn brute_force_three_by_three() {
        let g = reference_mirror();
        let beam = BeamSpec::centered(0.055).unwrap();
        let policy = TruncationPolicy {
            n_max: 2,
            p_max: 2,
            analytic_remainder: false,
            ..Default::default()
        };
        let r = partial(chi_eff_static(&g, &beam, &policy).unwrap_err());
        let mut expected = 0.0;
        for n in 1..=2 {
            for p in 0..=2 {
                let m = mode_data(&g, ModeIndex::axial(n, p).unwrap());
                let o = overlap_centered(&m, &beam).unwrap().value;
                expected += o * o / (m.effective_mass * m.eigenfrequency.powi(2));
            }
        }
        assert_eq!(r.modes_used, 6);
        assert!(rel(r.modal_sum.re, expected) < 1e-12);
    }

    #[test]
    fn centered_values_near_published() {
        let g = reference_mirror();
        let policy = TruncationPolicy::default();
        let small = chi_eff_static(&g, &BeamSpec::centered(0.02).unwrap(), &policy).unwrap();
        assert!(small.tail_bound <= 1e-4 && small.tail_is_rigorous);
        assert!(rel(small.value.re, 11e-11) < 0.1, "{}", small.value.re);
        let wide = chi_eff_static(&g, &BeamSpec::centered(0.055).unwrap(), &policy).unwrap();
        assert!(rel(wide.value.re, 2.4e-11) < 0.1, "{}", wide.value.re);
    }

    #[test]
    fn remainder_matches_long_explicit_sum() {
        // Explicitly sum far more families and compare with the remainder
        // estimate obtained after a few dozen.
        let g = reference_mirror();
        let beam = BeamSpec::centered(0.02).unwrap();
        let fast = chi_eff_static(&g, &beam, &TruncationPolicy::default()).unwrap();
        let long = TruncationPolicy {
            n_max: 4000,
            epsilon: 1e-7,
            max_modes: u64::MAX,
            analytic_remainder: false,
            ..Default::default()
        };
        let slow = partial(chi_eff_static(&g, &beam, &long).unwrap_err());
        // Bare sum to n = 4000 still misses ~W/(Omega_M^2 4000).
        let missing = 2.0 / (PI * 2200.0 * 0.07 * 4e-4) / g.fundamental_frequency().powi(2) / 4000.5;
        let reference = slow.modal_sum.re + missing;
        let allowed = fast.tail_bound * fast.value.norm() + 1e-6 * reference;
        assert!((fast.value.re - reference).abs() <= allowed, "{} vs {}", fast.value.re, reference);
    }

    #[test]
    fn remainder_brackets_explicit_families() {
        // The closed-form remainder after family 8, minus the one after
        // family 60, must match the families 9..=60 summed mode by mode.
        let g = reference_mirror();
        for beam in [
            BeamSpec::centered(0.02).unwrap(),
            BeamSpec::new(0.03, 0.1).unwrap(),
            BeamSpec::new(0.02, 0.2).unwrap(),
        ] {
            let policy = TruncationPolicy {
                epsilon: 1e-9,
                max_modes: u64::MAX,
                ..Default::default()
            };
            let mut walk = Walk::new(&g, &beam, 0.0, 0.0, &policy);
            let mut explicit = 0.0;
            for n in 9..=60 {
                explicit += walk.family(n, 1e-10, |_, _| true).unwrap().static_sum;
            }
            let (early, early_width) = family_remainder(&g, &beam, 8, 0.0, 0.0).unwrap();
            let (late, late_width) = family_remainder(&g, &beam, 60, 0.0, 0.0).unwrap();
            let modelled = early.re - late.re;
            let slack = early_width + late_width;
            assert!(
                (modelled - explicit).abs() <= slack + 1e-9 * explicit,
                "{beam:?}: {modelled} vs {explicit}, slack {slack}"
            );
            eprintln!("{beam:?}: rel slack {}", slack / explicit);
            assert!(slack < 1e-2 * explicit, "{beam:?}: slack {slack}");
        }
    }

    #[test]
    fn hermite_shells_equal_laguerre_mode_sums() {
        use crate::modes::Parity;
        use crate::overlap::overlap_offaxis;
        let g = reference_mirror();
        let beam = BeamSpec::new(0.02, 0.06).unwrap();
        let total = 2.0 / (PI * 2200.0 * 0.07 * 0.02 * 0.02);
        for n in [1u32, 3] {
            let mut family = FamilyModes::new(&g, &beam, n);
            for order in 0..=24u32 {
                let shell = family.next_shell().unwrap();
                let mut direct = 0.0;
                let mut count = 0;
                for l in (order % 2..=order).step_by(2) {
                    let p = (order - l) / 2;
                    let mode = mode_data(&g, ModeIndex::new(n, p, l, Parity::Cosine).unwrap());
                    let o = overlap_offaxis(&mode, &beam).unwrap().value;
                    direct += o * o / mode.effective_mass;
                    count += 1;
                }
                assert_eq!(shell.count, count);
                assert!(
                    (shell.weight - direct).abs() <= 1e-10 * direct + 1e-14 * total,
                    "n={n} shell {order}: {} vs {direct}",
                    shell.weight
                );
            }
        }
    }

    #[test]
    fn offset_path_matches_centered_at_zero_offset() {
        // A tiny offset forces the Hermite shell route.
        let g = reference_mirror();
        let policy = TruncationPolicy {
            epsilon: 1e-5,
            ..Default::default()
        };
        let a = chi_eff_static(&g, &BeamSpec::centered(0.02).unwrap(), &policy).unwrap();
        let b = chi_eff_static(&g, &BeamSpec::new(0.02, 1e-9).unwrap(), &policy).unwrap();
        assert!(rel(b.value.re, a.value.re) < 2e-5, "{} vs {}", a.value.re, b.value.re);
        for (x, y) in a.family_sums.iter().zip(&b.family_sums) {
            assert!(rel(y.re, x.re) < 1e-6);
        }
    }

    #[test]
    fn monotone_partial_sums_and_positive_static_value() {
        let g = reference_mirror();
        let beam = BeamSpec::centered(0.02).unwrap();
        let points = convergence_study(&g, &beam, &[1, 10, 100, 1000, 10_000], &TruncationPolicy::default()).unwrap();
        assert_eq!(points.len(), 5);
        assert!(points.windows(2).all(|w| w[1].value >= w[0].value));
        let m = mode_data(&g, ModeIndex::axial(1, 0).unwrap());
        let o = overlap_centered(&m, &beam).unwrap().value;
        assert!(rel(points[0].value, o * o / (m.effective_mass * m.eigenfrequency.powi(2))) < 1e-14);
        assert!(points.iter().zip([1, 10, 100, 1000, 10_000]).all(|(p, c)| p.modes_used == c));
    }

    #[test]
    fn force_spectrum_identities() {
        let g = reference_mirror();
        let m = mode_data(&g, ModeIndex::axial(1, 0).unwrap());
        let (omega, t, phi) = (1e4, 300.0, 1e-6);
        let chi = chi_mode(&m, omega, phi);
        let s = thermal_force_spectrum(chi, omega, t).unwrap();
        let expected = 2.0 * BOLTZMANN * t * m.effective_mass * m.eigenfrequency.powi(2) * phi / omega;
        assert!(rel(s, expected) < 1e-9);
        assert_eq!(thermal_force_spectrum(chi_mode(&m, omega, 0.0), omega, t).unwrap(), 0.0);
        let lhs = chi.norm_sqr() * s;
        let rhs = 2.0 * BOLTZMANN * t / omega * chi.im;
        assert!(rel(lhs, rhs) < 1e-12);
        assert!(thermal_force_spectrum(chi, 0.0, t).is_err());
    }

    #[test]
    fn spectrum_branches_agree_at_low_frequency() {
        let g = reference_mirror();
        let beam = BeamSpec::centered(0.02).unwrap();
        let loss = LossAngle::Constant(1e-6);
        let omega = g.fundamental_frequency() / 1000.0;
        let p = displacement_noise_spectrum(&g, &beam, omega, 300.0, &loss, &TruncationPolicy::default()).unwrap();
        assert!(rel(p.displacement, p.displacement_approx) < 1e-2);
        let cold = displacement_noise_spectrum(&g, &beam, omega, 0.0, &loss, &TruncationPolicy::default()).unwrap();
        assert_eq!(cold.displacement, 0.0);
        assert_eq!(cold.force, 0.0);
        let hot = displacement_noise_spectrum(&g, &beam, omega, 600.0, &loss, &TruncationPolicy::default()).unwrap();
        assert!(rel(hot.displacement, 2.0 * p.displacement) < 1e-12);
        let lossy = LossAngle::Constant(2e-6);
        let q = displacement_noise_spectrum(&g, &beam, omega, 300.0, &lossy, &TruncationPolicy::default()).unwrap();
        assert!(rel(q.displacement, 2.0 * p.displacement) < 1e-6);
        assert!(displacement_noise_spectrum(&g, &beam, 0.0, 300.0, &loss, &TruncationPolicy::default()).is_err());
    }

    #[test]
    fn optical_mass_by_hand() {
        let g = reference_mirror();
        let beam = BeamSpec::centered(0.02).unwrap();
        let approx = optical_mass_approx(&g, &beam).unwrap();
        let expected = 12.0 / (PI * PI) * PI / 4.0 * 2200.0 * 0.07 * 4e-4;
        assert!(rel(approx.optical_mass, expected) < 1e-12);
        assert!((approx.optical_mass - 0.0588).abs() < 1e-4);
        assert!(rel(approx.chi_approx, 2.4e-10) < 0.02);
        let doubled = optical_mass_approx(&g, &BeamSpec::centered(0.04).unwrap()).unwrap();
        assert!(rel(doubled.chi_approx, 0.25 * approx.chi_approx) < 1e-12);
        assert!(optical_mass_approx(&g, &BeamSpec::new(0.02, 0.01).unwrap()).is_err());
    }

    #[test]
    fn policy_validation() {
        let g = reference_mirror();
        let beam = BeamSpec::centered(0.02).unwrap();
        let bad = TruncationPolicy {
            epsilon: 0.0,
            ..Default::default()
        };
        assert!(chi_eff_static(&g, &beam, &bad).is_err());
        let off = BeamSpec::new(0.02, 0.3).unwrap();
        assert!(matches!(
            chi_eff_static(&g, &off, &TruncationPolicy::default()),
            Err(Error::BeamOffMirror { .. })
        ));
    }
}
