//! Paraxial Gaussian compression modes of a plano-convex substrate.
//!
//! Mode `(n, p, l)` has `n` half-wavelengths through the thickness and a
//! Laguerre-Gauss transverse profile with radial order `p` and angular order
//! `l`. All modes of one longitudinal family share the acoustic waist
//! `w_n^2 = (2 h0 / (n pi)) sqrt(R h0)` and the eigenfrequencies depend on the
//! transverse indices only through the shell order `2p + l`:
//!
//! ```text
//! Omega^2 = Omega_M^2 [ n^2 + (2/pi) sqrt(h0/R) n (2p + l + 1) ]
//! ```

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::PlanoConvexGeometry;
use crate::quadrature;

/// Angular dependence of a mode with `l >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Cosine,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    n: u32,
    p: u32,
    l: u32,
    parity: Parity,
}

impl ModeIndex {
    pub fn new(n: u32, p: u32, l: u32, parity: Parity) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", 0.0, "longitudinal index starts at 1"));
        }
        if l == 0 && parity == Parity::Sine {
            return Err(Error::param("parity", 0.0, "l = 0 modes have cosine parity"));
        }
        Ok(Self { n, p, l, parity })
    }

    /// Cylindrically symmetric mode `(n, p, 0)`.
    pub fn axial(n: u32, p: u32) -> Result<Self> {
        Self::new(n, p, 0, Parity::Cosine)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Transverse shell order `2p + l`.
    pub fn shell(&self) -> u32 {
        2 * self.p + self.l
    }
}

/// `(p + l)! / p!` held as `mantissa * 2^exp2` so that large angular orders
/// do not overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorialRatio {
    mantissa: f64,
    exp2: i32,
}

const RESCALE_EXP: i32 = 512;

impl FactorialRatio {
    pub fn new(p: u32, l: u32) -> Self {
        let big = 2f64.powi(RESCALE_EXP);
        let mut mantissa = 1.0;
        let mut exp2 = 0;
        for i in (p + 1)..=(p + l) {
            mantissa *= i as f64;
            if mantissa > big {
                mantissa /= big;
                exp2 += RESCALE_EXP;
            }
        }
        Self { mantissa, exp2 }
    }

    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    /// The ratio as a plain float; `inf` beyond the `f64` range.
    pub fn value(&self) -> f64 {
        self.mantissa * 2f64.powi(self.exp2)
    }
}

/// Generalized Laguerre polynomial `L_p^alpha(x)` by the upward three-term
/// recurrence in the degree.
pub fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeData {
    pub index: ModeIndex,
    /// Acoustic waist `w_n` (m).
    pub waist: f64,
    /// Eigenfrequency (rad/s).
    pub eigenfrequency: f64,
    /// Effective mass (kg); may be `inf` for extreme angular orders, see
    /// `ln_effective_mass`.
    pub effective_mass: f64,
    pub ln_effective_mass: f64,
    /// Fundamental longitudinal frequency `Omega_M` (rad/s).
    pub fundamental_frequency: f64,
    /// `w_n sqrt(2p + l + 1) / (D/2)`; the Gaussian description degrades as
    /// this approaches one.
    pub confinement_ratio: f64,
}

/// `w_n^2` for longitudinal order `n`.
pub fn acoustic_waist_sq(geometry: &PlanoConvexGeometry, n: u32) -> f64 {
    let h0 = geometry.thickness();
    2.0 * h0 / (n as f64 * PI) * (geometry.radius() * h0).sqrt()
}

/// Transverse splitting coefficient `(2/pi) sqrt(h0/R)`.
pub fn transverse_splitting(geometry: &PlanoConvexGeometry) -> f64 {
    2.0 / PI * geometry.paraxiality_ratio().sqrt()
}

/// `Omega_{n,shell}^2 / Omega_M^2` for a mode of shell order `2p + l`.
pub fn eigenvalue_ratio(splitting: f64, n: u32, shell: u64) -> f64 {
    let n = n as f64;
    n * n + splitting * n * (shell as f64 + 1.0)
}

/// Effective mass of the `l = 0` modes of family `n`: `(pi/4) rho h0 w_n^2`.
pub fn axial_effective_mass(geometry: &PlanoConvexGeometry, n: u32) -> f64 {
    FRAC_PI_4 * geometry.material().density() * geometry.thickness() * acoustic_waist_sq(geometry, n)
}

pub fn mode_data(geometry: &PlanoConvexGeometry, index: ModeIndex) -> ModeData {
    let omega_m = geometry.fundamental_frequency();
    let w2 = acoustic_waist_sq(geometry, index.n);
    let ratio = eigenvalue_ratio(transverse_splitting(geometry), index.n, index.shell() as u64);

    // rho (h0/2) (w^2/4) ((p+l)!/p!) times 2pi for l = 0 and pi otherwise.
    let base = geometry.material().density() * geometry.thickness() * w2 / 8.0;
    let angular = if index.l == 0 { 2.0 * PI } else { PI };
    let factorial = FactorialRatio::new(index.p, index.l);
    let ln_effective_mass = (base * angular).ln() + factorial.ln();

    ModeData {
        index,
        waist: w2.sqrt(),
        eigenfrequency: omega_m * ratio.sqrt(),
        effective_mass: base * angular * factorial.value(),
        ln_effective_mass,
        fundamental_frequency: omega_m,
        confinement_ratio: (w2 * (index.shell() as f64 + 1.0)).sqrt() / (0.5 * geometry.diameter()),
    }
}

/// Radial factor `exp(-r^2/w^2) (sqrt2 r / w)^l L_p^l(2 r^2 / w^2)`.
pub(crate) fn radial_profile(waist: f64, p: u32, l: u32, r: f64) -> f64 {
    let s = r / waist;
    let x = 2.0 * s * s;
    let envelope = if l == 0 {
        (-s * s).exp()
    } else if r == 0.0 {
        return 0.0;
    } else {
        (l as f64 * (SQRT_2 * s).ln() - s * s).exp()
    };
    envelope * laguerre(p, l as f64, x)
}

fn angular_factor(index: &ModeIndex, phi: f64) -> f64 {
    let arg = index.l as f64 * phi;
    match index.parity {
        Parity::Cosine => arg.cos(),
        Parity::Sine => arg.sin(),
    }
}

/// Longitudinal displacement of the mode on the coated face `z = 0`,
/// normalized to one on axis for the `(n, 0, 0)` modes.
pub fn surface_displacement(
    geometry: &PlanoConvexGeometry,
    index: ModeIndex,
    r: f64,
    phi: f64,
) -> Result<f64> {
    let edge = 0.5 * geometry.diameter();
    if !(r >= 0.0 && r <= edge) {
        return Err(Error::OutOfDomain { r, max: edge });
    }
    let waist = acoustic_waist_sq(geometry, index.n).sqrt();
    Ok(radial_profile(waist, index.p, index.l, r) * angular_factor(&index, phi))
}

/// Effective mass by direct quadrature of `rho (h0/2) \iint u^2 r dr dphi`
/// over the mirror face. Independent check of the closed form in
/// [`mode_data`].
pub fn effective_mass_oracle(geometry: &PlanoConvexGeometry, index: ModeIndex) -> Result<f64> {
    let waist = acoustic_waist_sq(geometry, index.n).sqrt();
    let edge = 0.5 * geometry.diameter();
    let radial = quadrature::integrate(
        |r| {
            let u = radial_profile(waist, index.p, index.l, r);
            r * u * u
        },
        0.0,
        edge,
        1e-12,
        0.0,
        4000,
    )?;
    let angular = quadrature::integrate_periodic(
        |phi| angular_factor(&index, phi).powi(2),
        2 * index.l as usize + 4,
        1e-14,
        1 << 20,
    )?;
    let rho = geometry.material().density();
    Ok(rho * 0.5 * geometry.thickness() * radial.value * angular)
}
