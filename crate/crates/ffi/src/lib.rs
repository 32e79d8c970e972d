//! C interface to the mirnoise library.
//!
//! Geometries are opaque heap handles created by `mn_geometry_solve` and
//! released with `mn_geometry_free`. Every fallible call returns an
//! `MnStatus`; results are written through out-pointers. Panics never cross
//! the boundary.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mirnoise::geometry::{solve_geometry, LossAngle, Material, PlanoConvexGeometry};
use mirnoise::overlap::BeamSpec;
use mirnoise::susceptibility::{self, SusceptibilityResult, TruncationPolicy, BOLTZMANN};
use mirnoise::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MnStatus {
    Ok = 0,
    InvalidArgument = 1,
    InfeasibleGeometry = 2,
    /// The result was written but its tail bound exceeds the tolerance.
    BudgetExceeded = 3,
    NullPointer = 4,
    Internal = 5,
}

/// Opaque mirror geometry.
pub struct MnGeometry {
    inner: PlanoConvexGeometry,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MnChiResult {
    pub re: f64,
    pub im: f64,
    pub modes_used: u64,
    pub tail_bound: f64,
    /// 1 when the tail bound is strict, 0 when it is an estimate.
    pub tail_is_rigorous: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MnSpectrumPoint {
    pub omega: f64,
    pub chi_re: f64,
    pub chi_im: f64,
    pub force: f64,
    pub displacement: f64,
    pub displacement_approx: f64,
    pub tail_bound: f64,
}

fn status_of(e: &Error) -> MnStatus {
    match e {
        Error::InfeasibleGeometry { .. } => MnStatus::InfeasibleGeometry,
        Error::BudgetExceeded { .. } => MnStatus::BudgetExceeded,
        Error::InvalidParameter { .. } | Error::OutOfDomain { .. } | Error::BeamOffMirror { .. } | Error::InvalidSpec(_) => {
            MnStatus::InvalidArgument
        }
        _ => MnStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> MnStatus) -> MnStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(MnStatus::Internal)
}

fn policy(epsilon: f64, max_modes: u64) -> TruncationPolicy {
    TruncationPolicy {
        epsilon,
        max_modes,
        ..TruncationPolicy::default()
    }
}

fn write_chi(out: &mut MnChiResult, r: &SusceptibilityResult) {
    *out = MnChiResult {
        re: r.value.re,
        im: r.value.im,
        modes_used: r.modes_used,
        tail_bound: r.tail_bound,
        tail_is_rigorous: r.tail_is_rigorous as i32,
    };
}

/// Result or partial result, with the status to report.
fn settle(result: mirnoise::Result<SusceptibilityResult>) -> Result<(SusceptibilityResult, MnStatus), MnStatus> {
    match result {
        Ok(r) => Ok((r, MnStatus::Ok)),
        Err(Error::BudgetExceeded { partial }) => Ok((*partial, MnStatus::BudgetExceeded)),
        Err(e) => Err(status_of(&e)),
    }
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn mn_status_message(status: MnStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        MnStatus::Ok => b"ok\0",
        MnStatus::InvalidArgument => b"invalid argument\0",
        MnStatus::InfeasibleGeometry => b"mass and thickness do not close a sharp-edged mirror\0",
        MnStatus::BudgetExceeded => b"mode budget exhausted before the tolerance was met\0",
        MnStatus::NullPointer => b"null pointer\0",
        MnStatus::Internal => b"internal error\0",
    };
    text.as_ptr().cast()
}

/// Solves the sharp-edged geometry. Returns null on failure, with the
/// reason in `*status` when `status` is non-null.
///
/// # Safety
/// `status` must be null or point to writable memory for one `MnStatus`.
#[no_mangle]
pub unsafe extern "C" fn mn_geometry_solve(
    mass: f64,
    thickness: f64,
    density: f64,
    sound_speed: f64,
    loss_angle: f64,
    status: *mut MnStatus,
) -> *mut MnGeometry {
    let mut handle = ptr::null_mut();
    let code = guard(|| {
        let material = match Material::new(density, sound_speed, LossAngle::Constant(loss_angle)) {
            Ok(m) => m,
            Err(e) => return status_of(&e),
        };
        match solve_geometry(mass, thickness, material) {
            Ok(g) => {
                handle = Box::into_raw(Box::new(MnGeometry { inner: g }));
                MnStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    });
    if !status.is_null() {
        *status = code;
    }
    handle
}

/// Releases a geometry. Null is ignored.
///
/// # Safety
/// `geometry` must come from `mn_geometry_solve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mn_geometry_free(geometry: *mut MnGeometry) {
    if !geometry.is_null() {
        drop(Box::from_raw(geometry));
    }
}

unsafe fn read(geometry: *const MnGeometry, f: fn(&PlanoConvexGeometry) -> f64) -> f64 {
    match geometry.as_ref() {
        Some(g) => f(&g.inner),
        None => f64::NAN,
    }
}

/// Curvature radius of the convex face (m). NaN for a null handle.
///
/// # Safety
/// `geometry` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mn_geometry_radius(geometry: *const MnGeometry) -> f64 {
    read(geometry, PlanoConvexGeometry::radius)
}

/// Diameter of the sharp edge (m). NaN for a null handle.
///
/// # Safety
/// `geometry` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mn_geometry_diameter(geometry: *const MnGeometry) -> f64 {
    read(geometry, PlanoConvexGeometry::diameter)
}

/// NaN for a null handle.
///
/// # Safety
/// `geometry` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mn_geometry_thickness(geometry: *const MnGeometry) -> f64 {
    read(geometry, PlanoConvexGeometry::thickness)
}

/// NaN for a null handle.
///
/// # Safety
/// `geometry` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mn_geometry_mass(geometry: *const MnGeometry) -> f64 {
    read(geometry, PlanoConvexGeometry::mass)
}

/// Fundamental longitudinal angular frequency (rad/s). NaN for a null handle.
///
/// # Safety
/// `geometry` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mn_geometry_fundamental_frequency(geometry: *const MnGeometry) -> f64 {
    read(geometry, PlanoConvexGeometry::fundamental_frequency)
}

/// Thickness over curvature radius. NaN for a null handle.
///
/// # Safety
/// `geometry` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mn_geometry_paraxiality_ratio(geometry: *const MnGeometry) -> f64 {
    read(geometry, PlanoConvexGeometry::paraxiality_ratio)
}

/// Zero-frequency effective susceptibility. On `BudgetExceeded` the partial
/// sum is still written to `*out`.
///
/// # Safety
/// `geometry` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mn_chi0(
    geometry: *const MnGeometry,
    waist: f64,
    offset: f64,
    epsilon: f64,
    max_modes: u64,
    out: *mut MnChiResult,
) -> MnStatus {
    let (Some(g), Some(out)) = (geometry.as_ref(), out.as_mut()) else {
        return MnStatus::NullPointer;
    };
    guard(|| {
        let beam = match BeamSpec::new(waist, offset) {
            Ok(b) => b,
            Err(e) => return status_of(&e),
        };
        match settle(susceptibility::chi_eff_static(&g.inner, &beam, &policy(epsilon, max_modes))) {
            Ok((r, code)) => {
                write_chi(out, &r);
                code
            }
            Err(code) => code,
        }
    })
}

/// Effective susceptibility at angular frequency `omega`, with the loss
/// angle the geometry was built with.
///
/// # Safety
/// `geometry` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mn_chi(
    geometry: *const MnGeometry,
    waist: f64,
    offset: f64,
    omega: f64,
    epsilon: f64,
    max_modes: u64,
    out: *mut MnChiResult,
) -> MnStatus {
    let (Some(g), Some(out)) = (geometry.as_ref(), out.as_mut()) else {
        return MnStatus::NullPointer;
    };
    guard(|| {
        let beam = match BeamSpec::new(waist, offset) {
            Ok(b) => b,
            Err(e) => return status_of(&e),
        };
        let phi = g.inner.material().loss_angle().at(omega);
        match settle(susceptibility::chi_eff(&g.inner, &beam, omega, phi, &policy(epsilon, max_modes))) {
            Ok((r, code)) => {
                write_chi(out, &r);
                code
            }
            Err(code) => code,
        }
    })
}

/// Thermal force and displacement spectra at one frequency.
///
/// # Safety
/// `geometry` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mn_spectrum_point(
    geometry: *const MnGeometry,
    waist: f64,
    offset: f64,
    omega: f64,
    temperature: f64,
    epsilon: f64,
    max_modes: u64,
    out: *mut MnSpectrumPoint,
) -> MnStatus {
    let (Some(g), Some(out)) = (geometry.as_ref(), out.as_mut()) else {
        return MnStatus::NullPointer;
    };
    guard(|| {
        if omega.is_nan() || omega <= 0.0 || temperature.is_nan() || temperature < 0.0 {
            return MnStatus::InvalidArgument;
        }
        let beam = match BeamSpec::new(waist, offset) {
            Ok(b) => b,
            Err(e) => return status_of(&e),
        };
        let policy = policy(epsilon, max_modes);
        let phi = g.inner.material().loss_angle().at(omega);
        let (dynamic, c1) = match settle(susceptibility::chi_eff(&g.inner, &beam, omega, phi, &policy)) {
            Ok(v) => v,
            Err(code) => return code,
        };
        let (stat, c2) = match settle(susceptibility::chi_eff_static(&g.inner, &beam, &policy)) {
            Ok(v) => v,
            Err(code) => return code,
        };
        let force = match susceptibility::thermal_force_spectrum(dynamic.value, omega, temperature) {
            Ok(f) => f,
            Err(e) => return status_of(&e),
        };
        let kt2 = 2.0 * BOLTZMANN * temperature;
        *out = MnSpectrumPoint {
            omega,
            chi_re: dynamic.value.re,
            chi_im: dynamic.value.im,
            force,
            displacement: kt2 / omega * dynamic.value.im,
            displacement_approx: kt2 * phi / omega * stat.value.re,
            tail_bound: dynamic.tail_bound.max(stat.tail_bound),
        };
        if c1 == MnStatus::Ok {
            c2
        } else {
            c1
        }
    })
}

/// Optical-mass estimate for a centered beam: writes the mass (kg) and the
/// single-oscillator susceptibility (m/N).
///
/// # Safety
/// `geometry` must be a live handle; `optical_mass` and `chi_approx` writable.
#[no_mangle]
pub unsafe extern "C" fn mn_optical_mass(
    geometry: *const MnGeometry,
    waist: f64,
    optical_mass: *mut f64,
    chi_approx: *mut f64,
) -> MnStatus {
    let (Some(g), Some(mass_out), Some(chi_out)) = (geometry.as_ref(), optical_mass.as_mut(), chi_approx.as_mut())
    else {
        return MnStatus::NullPointer;
    };
    guard(|| {
        let approx = BeamSpec::centered(waist).and_then(|b| susceptibility::optical_mass_approx(&g.inner, &b));
        match approx {
            Ok(a) => {
                *mass_out = a.optical_mass;
                *chi_out = a.chi_approx;
                MnStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}
