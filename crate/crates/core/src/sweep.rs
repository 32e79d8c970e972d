//! Parameter sweeps, the mode-count convergence study, comparison against
//! the cylindrical-mirror reference, and their CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{solve_geometry, LossAngle, Material, PlanoConvexGeometry};
use crate::overlap::BeamSpec;
use crate::susceptibility::{
    chi_eff, chi_eff_static, convergence_study, optical_mass_approx, thermal_force_spectrum, SpectrumPoint,
    SusceptibilityResult, TruncationPolicy, BOLTZMANN,
};

/// First line of every CSV file written by this crate.
pub const CSV_BANNER: &str = "# mirnoise v1, one-sided angular-frequency spectra, SI units";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Thickness,
    Waist,
    Offset,
    Mass,
    ModeCount,
}

impl SweepParam {
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::Thickness => "thickness_m",
            SweepParam::Waist => "waist_m",
            SweepParam::Offset => "offset_m",
            SweepParam::Mass => "mass_kg",
            SweepParam::ModeCount => "mode_count",
        }
    }

    /// Default range and point count.
    pub fn default_range(self) -> (f64, f64, usize) {
        match self {
            SweepParam::Thickness => (0.04, 0.12, 30),
            SweepParam::Waist => (0.01, 0.06, 26),
            SweepParam::Offset => (0.0, 0.2, 21),
            SweepParam::Mass => (5.0, 50.0, 10),
            SweepParam::ModeCount => (1e2, 1e6, 5),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SweepParam::Thickness => "thickness",
            SweepParam::Waist => "waist",
            SweepParam::Offset => "offset",
            SweepParam::Mass => "mass",
            SweepParam::ModeCount => "mode-count",
        };
        f.write_str(name)
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thickness" => Ok(SweepParam::Thickness),
            "waist" => Ok(SweepParam::Waist),
            "offset" => Ok(SweepParam::Offset),
            "mass" => Ok(SweepParam::Mass),
            "mode-count" | "mode_count" => Ok(SweepParam::ModeCount),
            other => Err(Error::InvalidSpec(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

/// Everything held fixed while one parameter varies.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mass: f64,
    pub thickness: f64,
    pub waist: f64,
    pub offset: f64,
    pub temperature: f64,
    pub material: Material,
    pub policy: TruncationPolicy,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            mass: 20.0,
            thickness: 0.07,
            waist: 0.02,
            offset: 0.0,
            temperature: 300.0,
            material: Material::fused_silica(),
            policy: TruncationPolicy::default(),
        }
    }
}

impl Scenario {
    pub fn geometry(&self) -> Result<PlanoConvexGeometry> {
        solve_geometry(self.mass, self.thickness, self.material.clone())
    }

    pub fn beam(&self) -> Result<BeamSpec> {
        BeamSpec::new(self.waist, self.offset)
    }

    pub fn loss_angle(&self) -> &LossAngle {
        self.material.loss_angle()
    }

    /// Solves the geometry and checks the beam fits on it.
    pub fn resolve(&self) -> Result<(PlanoConvexGeometry, BeamSpec)> {
        self.policy.validate()?;
        if !(self.temperature >= 0.0) {
            return Err(Error::param("temperature", self.temperature, "must be non-negative"));
        }
        let geometry = self.geometry()?;
        let beam = self.beam()?;
        beam.check_fits(&geometry)?;
        Ok((geometry, beam))
    }

    fn with(&self, param: SweepParam, value: f64) -> Scenario {
        let mut s = self.clone();
        match param {
            SweepParam::Thickness => s.thickness = value,
            SweepParam::Waist => s.waist = value,
            SweepParam::Offset => s.offset = value,
            SweepParam::Mass => s.mass = value,
            SweepParam::ModeCount => {}
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub base: Scenario,
}

impl SweepSpec {
    pub fn new(param: SweepParam, from: f64, to: f64, points: usize, base: Scenario) -> Result<Self> {
        let spec = Self {
            param,
            from,
            to,
            points,
            base,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Sweep points: evenly spaced, except mode counts which are spaced
    /// logarithmically and rounded.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        match self.param {
            SweepParam::ModeCount => {
                let (a, b) = (self.from.ln(), self.to.ln());
                let mut out: Vec<f64> = (0..self.points)
                    .map(|i| (a + (b - a) * i as f64 / last).exp().round())
                    .collect();
                out.dedup();
                out
            }
            _ => (0..self.points)
                .map(|i| {
                    if i == self.points - 1 {
                        self.to
                    } else {
                        self.from + (self.to - self.from) * i as f64 / last
                    }
                })
                .collect(),
        }
    }

    /// Checks the range and every sweep point before anything is computed.
    pub fn validate(&self) -> Result<()> {
        if !(self.from < self.to) || !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "sweep range [{}, {}] must satisfy from < to",
                self.from, self.to
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidSpec("a sweep needs at least 2 points".into()));
        }
        if self.param == SweepParam::ModeCount && self.from < 1.0 {
            return Err(Error::InvalidSpec("mode counts start at 1".into()));
        }
        for v in self.values() {
            self.base.with(self.param, v).resolve()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub chi0: f64,
    pub modes_used: u64,
    pub tail_bound: f64,
    pub converged: bool,
    pub paraxial_warning: bool,
    pub wall_time: Duration,
}

fn row_from(value: f64, geometry: &PlanoConvexGeometry, result: &SusceptibilityResult, eps: f64, t: Duration) -> SweepRow {
    SweepRow {
        value,
        chi0: result.value.re,
        modes_used: result.modes_used,
        tail_bound: result.tail_bound,
        converged: result.converged(eps),
        paraxial_warning: geometry.paraxial_warning(),
        wall_time: t,
    }
}

/// Zero-frequency susceptibility, keeping the partial result when the
/// budget runs out.
pub fn chi0_or_partial(
    geometry: &PlanoConvexGeometry,
    beam: &BeamSpec,
    policy: &TruncationPolicy,
) -> Result<SusceptibilityResult> {
    or_partial(chi_eff_static(geometry, beam, policy))
}

fn or_partial(result: Result<SusceptibilityResult>) -> Result<SusceptibilityResult> {
    match result {
        Err(Error::BudgetExceeded { partial }) => Ok(*partial),
        other => other,
    }
}

/// `points` angular frequencies spaced logarithmically over `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) || points < 2 {
        return Err(Error::InvalidSpec(format!(
            "log grid needs 0 < lo < hi and at least 2 points, got [{lo}, {hi}] x {points}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => lo,
            i if i == points - 1 => hi,
            i => (a + (b - a) * i as f64 / last).exp(),
        })
        .collect())
}

/// Noise spectra over a frequency grid on up to `jobs` threads. Points
/// whose sum ran out of budget keep their partial values and tail bound.
pub fn run_spectrum(scenario: &Scenario, omegas: &[f64], jobs: usize) -> Result<Vec<SpectrumPoint>> {
    let (geometry, beam) = scenario.resolve()?;
    if let Some(&bad) = omegas.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::param("omega", bad, "spectra need a positive frequency"));
    }
    let policy = scenario.policy;
    let stat = chi0_or_partial(&geometry, &beam, &policy)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    let kt2 = 2.0 * BOLTZMANN * scenario.temperature;
    pool.install(|| {
        omegas
            .par_iter()
            .map(|&omega| {
                let phi = scenario.loss_angle().at(omega);
                let dynamic = or_partial(chi_eff(&geometry, &beam, omega, phi, &policy))?;
                Ok(SpectrumPoint {
                    omega,
                    temperature: scenario.temperature,
                    loss_angle: phi,
                    chi: dynamic.value,
                    force: thermal_force_spectrum(dynamic.value, omega, scenario.temperature)?,
                    displacement: kt2 / omega * dynamic.value.im,
                    displacement_approx: kt2 * phi / omega * stat.value.re,
                    tail_bound: dynamic.tail_bound.max(stat.tail_bound),
                })
            })
            .collect()
    })
}

/// Runs a sweep on up to `jobs` threads; rows come back in sweep order.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    let eps = spec.base.policy.epsilon;
    if spec.param == SweepParam::ModeCount {
        let (geometry, beam) = spec.base.resolve()?;
        let checkpoints: Vec<u64> = spec.values().iter().map(|&v| v as u64).collect();
        let start = Instant::now();
        let (reference, points) = pool.install(|| {
            rayon::join(
                || chi0_or_partial(&geometry, &beam, &spec.base.policy),
                || convergence_study(&geometry, &beam, &checkpoints, &spec.base.policy),
            )
        });
        let reference = reference?.value.re;
        let elapsed = start.elapsed();
        // Rows of a truncated sum report the relative distance to the
        // converged value as their tail.
        return Ok(points?
            .into_iter()
            .map(|p| {
                let tail = (reference - p.value).max(0.0) / reference;
                SweepRow {
                    value: p.checkpoint as f64,
                    chi0: p.value,
                    modes_used: p.modes_used,
                    tail_bound: tail,
                    converged: tail <= eps,
                    paraxial_warning: geometry.paraxial_warning(),
                    wall_time: elapsed,
                }
            })
            .collect());
    }
    let values = spec.values();
    pool.install(|| {
        values
            .par_iter()
            .map(|&v| {
                let start = Instant::now();
                let scenario = spec.base.with(spec.param, v);
                let (geometry, beam) = scenario.resolve()?;
                let result = chi0_or_partial(&geometry, &beam, &scenario.policy)?;
                Ok(row_from(v, &geometry, &result, eps, start.elapsed()))
            })
            .collect()
    })
}

/// Published zero-frequency susceptibility of a cylindrical mirror of the
/// same thickness, at the two waists where it is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylindricalReference {
    pub waist: f64,
    pub chi0: f64,
}

pub const CYLINDRICAL_REFERENCE_LABEL: &str = "literature reference: cylindrical mirror (Bondu et al. 1995)";

pub const CYLINDRICAL_REFERENCES: [CylindricalReference; 2] = [
    CylindricalReference {
        waist: 0.02,
        chi0: 46e-11,
    },
    CylindricalReference {
        waist: 0.055,
        chi0: 11e-11,
    },
];

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub waist: f64,
    pub plano_convex: SusceptibilityResult,
    pub chi_approx: f64,
    pub cylindrical: Option<CylindricalReference>,
    /// Cylindrical over plano-convex susceptibility.
    pub improvement: Option<f64>,
}

pub fn compare_report(
    geometry: &PlanoConvexGeometry,
    beam: &BeamSpec,
    policy: &TruncationPolicy,
    include_cylindrical: bool,
) -> Result<ComparisonReport> {
    if !beam.is_centered() {
        return Err(Error::InvalidSpec("comparison needs a centered beam".into()));
    }
    let cylindrical = if include_cylindrical {
        let found = CYLINDRICAL_REFERENCES
            .iter()
            .find(|r| (r.waist - beam.waist()).abs() <= 1e-9)
            .copied();
        if found.is_none() {
            return Err(Error::InvalidSpec(format!(
                "no cylindrical reference at waist {} m (known: 0.02, 0.055); pass --no-cylindrical",
                beam.waist()
            )));
        }
        found
    } else {
        None
    };
    let plano_convex = chi0_or_partial(geometry, beam, policy)?;
    let chi_approx = optical_mass_approx(geometry, beam)?.chi_approx;
    let improvement = cylindrical.map(|c| c.chi0 / plano_convex.value.re);
    Ok(ComparisonReport {
        waist: beam.waist(),
        plano_convex,
        chi_approx,
        cylindrical,
        improvement,
    })
}

/// `key = value` lines with `#` comments. Keys use the long flag names
/// without the leading dashes; later lines override earlier ones.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidSpec(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::InvalidSpec(format!("config line {}: empty key or value", i + 1)));
        }
        out.insert(key.replace('_', "-"), value.to_string());
    }
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x:.8e}")
}

fn banner(out: &mut impl Write, header: &str) -> Result<()> {
    writeln!(out, "{CSV_BANNER}")?;
    writeln!(out, "{header}")?;
    Ok(())
}

pub fn write_sweep_csv(out: &mut impl Write, param: SweepParam, rows: &[SweepRow], timing: bool) -> Result<()> {
    let mut header = format!(
        "{},chi0_m_per_n,modes_used,tail_bound,converged,paraxial_warning",
        param.column()
    );
    if timing {
        header.push_str(",wall_time_s");
    }
    banner(out, &header)?;
    for r in rows {
        let value = if param == SweepParam::ModeCount {
            format!("{}", r.value as u64)
        } else {
            num(r.value)
        };
        write!(
            out,
            "{},{},{},{},{},{}",
            value,
            num(r.chi0),
            r.modes_used,
            num(r.tail_bound),
            r.converged,
            r.paraxial_warning
        )?;
        if timing {
            write!(out, ",{}", num(r.wall_time.as_secs_f64()))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_geometry_csv(out: &mut impl Write, geometry: &PlanoConvexGeometry) -> Result<()> {
    banner(
        out,
        "mass_kg,thickness_m,radius_m,diameter_m,paraxiality_ratio,paraxial_warning,fundamental_rad_s",
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        num(geometry.mass()),
        num(geometry.thickness()),
        num(geometry.radius()),
        num(geometry.diameter()),
        num(geometry.paraxiality_ratio()),
        geometry.paraxial_warning(),
        num(geometry.fundamental_frequency())
    )?;
    Ok(())
}

pub fn write_chi0_csv(
    out: &mut impl Write,
    beam: &BeamSpec,
    result: &SusceptibilityResult,
    chi_approx: Option<f64>,
    epsilon: f64,
) -> Result<()> {
    banner(
        out,
        "waist_m,offset_m,chi0_m_per_n,chi_approx_m_per_n,modes_used,families,tail_bound,tail_is_rigorous,converged",
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        num(beam.waist()),
        num(beam.offset()),
        num(result.value.re),
        chi_approx.map(num).unwrap_or_default(),
        result.modes_used,
        result.families,
        num(result.tail_bound),
        result.tail_is_rigorous,
        result.converged(epsilon)
    )?;
    Ok(())
}

pub fn write_spectrum_csv(out: &mut impl Write, points: &[SpectrumPoint], epsilon: f64) -> Result<()> {
    banner(
        out,
        "omega_rad_s,chi_re_m_per_n,chi_im_m_per_n,force_n2_s,displacement_m2_s,displacement_approx_m2_s,loss_angle,tail_bound,converged",
    )?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(p.omega),
            num(p.chi.re),
            num(p.chi.im),
            num(p.force),
            num(p.displacement),
            num(p.displacement_approx),
            num(p.loss_angle),
            num(p.tail_bound),
            p.tail_bound <= epsilon
        )?;
    }
    Ok(())
}

pub fn write_compare_csv(out: &mut impl Write, report: &ComparisonReport) -> Result<()> {
    let mut header = String::from("waist_m,plano_convex_chi0_m_per_n,optical_mass_chi_m_per_n,tail_bound");
    if report.cylindrical.is_some() {
        header.push_str(",cylindrical_chi0_m_per_n,improvement_ratio,reference");
    }
    banner(out, &header)?;
    write!(
        out,
        "{},{},{},{}",
        num(report.waist),
        num(report.plano_convex.value.re),
        num(report.chi_approx),
        num(report.plano_convex.tail_bound)
    )?;
    if let (Some(c), Some(ratio)) = (report.cylindrical, report.improvement) {
        write!(out, ",{},{},\"{}\"", num(c.chi0), num(ratio), CYLINDRICAL_REFERENCE_LABEL)?;
    }
    writeln!(out)?;
    Ok(())
}
