//! Substrate material and the sharp-edged plano-convex shape.
//!
//! The mirror is the plane face of a spherical cap of curvature radius `R`
//! and apex thickness `h0`. With a sharp edge the mass, diameter, radius and
//! thickness are tied together, so two of them (mass and thickness here)
//! determine the rest.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Thickness-to-radius ratio above which the paraxial mode description is
/// flagged as questionable.
pub const PARAXIAL_WARNING_RATIO: f64 = 0.25;

/// Frequency dependence of the structural loss angle.
#[derive(Debug, Clone, PartialEq)]
pub enum LossAngle {
    Constant(f64),
    /// `(omega, phi)` pairs sorted by angular frequency; linear interpolation
    /// between knots, clamped outside the table.
    Tabulated(Vec<(f64, f64)>),
}

impl LossAngle {
    pub fn tabulated(mut table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::param("loss_angle", f64::NAN, "empty table"));
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(omega, phi) in &table {
            if !(omega >= 0.0) {
                return Err(Error::param("loss_angle.omega", omega, "must be >= 0"));
            }
            check_phi(phi)?;
        }
        Ok(LossAngle::Tabulated(table))
    }

    pub fn at(&self, omega: f64) -> f64 {
        match self {
            LossAngle::Constant(phi) => *phi,
            LossAngle::Tabulated(table) => {
                let first = table[0];
                let last = table[table.len() - 1];
                if omega <= first.0 {
                    return first.1;
                }
                if omega >= last.0 {
                    return last.1;
                }
                let i = table.partition_point(|&(w, _)| w <= omega);
                let (w0, p0) = table[i - 1];
                let (w1, p1) = table[i];
                p0 + (p1 - p0) * (omega - w0) / (w1 - w0)
            }
        }
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < 1.0 {
        Ok(())
    } else {
        Err(Error::param("loss_angle", phi, "must lie in (0, 1)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    density: f64,
    sound_speed: f64,
    loss_angle: LossAngle,
}

impl Material {
    pub fn new(density: f64, sound_speed: f64, loss_angle: LossAngle) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::param("density", density, "must be positive"));
        }
        if !(sound_speed > 0.0) || !sound_speed.is_finite() {
            return Err(Error::param("sound_speed", sound_speed, "must be positive"));
        }
        if let LossAngle::Constant(phi) = loss_angle {
            check_phi(phi)?;
        }
        Ok(Self {
            density,
            sound_speed,
            loss_angle,
        })
    }

    /// Fused silica: 2200 kg/m³, 5960 m/s, loss angle 1e-6.
    pub fn fused_silica() -> Self {
        Self {
            density: 2200.0,
            sound_speed: 5960.0,
            loss_angle: LossAngle::Constant(1e-6),
        }
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn loss_angle(&self) -> &LossAngle {
        &self.loss_angle
    }
}

impl Default for Material {
    fn default() -> Self {
        Self::fused_silica()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanoConvexGeometry {
    thickness: f64,
    radius: f64,
    diameter: f64,
    mass: f64,
    material: Material,
}

/// Solves the sharp-edge closure `M = pi rho h0^2 (R - h0/3)` for the
/// curvature radius and derives the diameter `D = 2 sqrt(h0 (2R - h0))`.
pub fn solve_geometry(mass: f64, thickness: f64, material: Material) -> Result<PlanoConvexGeometry> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::param("mass", mass, "must be positive"));
    }
    if !(thickness > 0.0) || !thickness.is_finite() {
        return Err(Error::param("thickness", thickness, "must be positive"));
    }
    let radius = mass / (PI * material.density * thickness * thickness) + thickness / 3.0;
    if !(radius > thickness) {
        return Err(Error::InfeasibleGeometry {
            mass,
            thickness,
            radius,
        });
    }
    Ok(PlanoConvexGeometry::from_parts(thickness, radius, material))
}

impl PlanoConvexGeometry {
    /// Builds the geometry from thickness and curvature radius; mass and
    /// diameter follow from the closure relations.
    pub fn from_radius(thickness: f64, radius: f64, material: Material) -> Result<Self> {
        if !(thickness > 0.0) || !thickness.is_finite() {
            return Err(Error::param("thickness", thickness, "must be positive"));
        }
        if !(radius > thickness) || !radius.is_finite() {
            return Err(Error::param("radius", radius, "must exceed the thickness"));
        }
        Ok(Self::from_parts(thickness, radius, material))
    }

    fn from_parts(thickness: f64, radius: f64, material: Material) -> Self {
        let mass = PI * material.density * thickness * thickness * (radius - thickness / 3.0);
        let diameter = 2.0 * (thickness * (2.0 * radius - thickness)).sqrt();
        Self {
            thickness,
            radius,
            diameter,
            mass,
            material,
        }
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    /// `h0 / R`.
    pub fn paraxiality_ratio(&self) -> f64 {
        self.thickness / self.radius
    }

    pub fn paraxial_warning(&self) -> bool {
        self.paraxiality_ratio() > PARAXIAL_WARNING_RATIO
    }

    /// Fundamental longitudinal frequency `pi c_l / h0` in rad/s.
    pub fn fundamental_frequency(&self) -> f64 {
        PI * self.material.sound_speed / self.thickness
    }

    /// Local substrate thickness at radius `r` on the mirror face.
    pub fn thickness_profile(&self, r: f64) -> Result<f64> {
        let edge = 0.5 * self.diameter;
        if !(r >= 0.0 && r <= edge) {
            return Err(Error::OutOfDomain { r, max: edge });
        }
        if r == 0.0 {
            return Ok(self.thickness);
        }
        let h = (self.radius * self.radius - r * r).sqrt() - (self.radius - self.thickness);
        Ok(h.max(0.0))
    }
}
