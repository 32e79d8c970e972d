use std::f64::consts::PI;

use proptest::prelude::*;

use mirnoise::geometry::{solve_geometry, Material, PlanoConvexGeometry};
use mirnoise::modes::{acoustic_waist_sq, mode_data, ModeIndex, Parity};
use mirnoise::overlap::{cauchy_schwarz_scale, overlap_centered, overlap_hermite, overlap_offaxis, BeamSpec};
use mirnoise::susceptibility::{
    chi_eff, chi_eff_static, convergence_study, optical_mass_approx, thermal_force_spectrum, TruncationPolicy,
    BOLTZMANN,
};
use mirnoise::sweep::{self, Scenario, SweepParam, SweepSpec};

fn silica(mass: f64, thickness: f64) -> PlanoConvexGeometry {
    solve_geometry(mass, thickness, Material::fused_silica()).unwrap()
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_round_trips(mass in 1.0..80.0f64, thickness in 0.02..0.12f64) {
        let radius = mass / (PI * 2200.0 * thickness * thickness) + thickness / 3.0;
        match solve_geometry(mass, thickness, Material::fused_silica()) {
            Ok(g) => {
                let back = PI * 2200.0 * thickness * thickness * (g.radius() - thickness / 3.0);
                prop_assert!(((back - mass) / mass).abs() < 1e-12);
            }
            Err(_) => prop_assert!(radius <= thickness),
        }
    }

    #[test]
    fn radius_grows_with_mass_and_shrinks_with_thickness(
        mass in 5.0..50.0f64,
        thickness in 0.03..0.08f64,
        step in 1e-3..1.0f64,
    ) {
        let g = silica(mass, thickness);
        prop_assert!(silica(mass + step, thickness).radius() > g.radius());
        prop_assert!(silica(mass, thickness + 0.01 * step).radius() < g.radius());
    }

    #[test]
    fn face_thins_towards_the_rim(mass in 5.0..50.0f64, thickness in 0.03..0.08f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let g = silica(mass, thickness);
        let edge = 0.5 * g.diameter();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        prop_assert!(g.thickness_profile(lo * edge).unwrap() > g.thickness_profile(hi * edge).unwrap());
    }

    #[test]
    fn shells_are_degenerate(n in 1u32..6, shell in 0u32..40, a in 0u32..21, b in 0u32..21) {
        let g = silica(20.0, 0.07);
        let half = shell / 2 + 1;
        let frequency = |k: u32| {
            let l = shell % 2 + 2 * (k % half);
            let parity = if l == 0 { Parity::Cosine } else { Parity::Sine };
            mode_data(&g, ModeIndex::new(n, (shell - l) / 2, l, parity).unwrap()).eigenfrequency
        };
        let (x, y) = (frequency(a), frequency(b));
        prop_assert!(((x - y) / y).abs() < 1e-12);
    }

    #[test]
    fn waist_area_times_order_is_constant(mass in 5.0..50.0f64, thickness in 0.03..0.08f64, n in 2u32..200) {
        let g = silica(mass, thickness);
        let first = acoustic_waist_sq(&g, 1);
        prop_assert!((acoustic_waist_sq(&g, n) * n as f64 / first - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centered_overlaps_are_bounded(n in 1u32..50, p in 0u32..200, waist in 0.005..0.08f64) {
        let g = silica(20.0, 0.07);
        let m = mode_data(&g, ModeIndex::axial(n, p).unwrap());
        let v = overlap_centered(&m, &BeamSpec::centered(waist).unwrap()).unwrap().value;
        prop_assert!(v.abs() <= 1.0);
    }

    #[test]
    fn sine_modes_never_couple(n in 1u32..6, p in 0u32..30, l in 1u32..30, offset in 0.0..0.2f64) {
        let g = silica(20.0, 0.07);
        let m = mode_data(&g, ModeIndex::new(n, p, l, Parity::Sine).unwrap());
        prop_assert_eq!(overlap_offaxis(&m, &BeamSpec::new(0.02, offset).unwrap()).unwrap().value, 0.0);
    }

    #[test]
    fn small_offsets_perturb_quadratically(n in 1u32..6, p in 0u32..20, d in 2e-5..4e-4f64) {
        let g = silica(20.0, 0.07);
        let m = mode_data(&g, ModeIndex::axial(n, p).unwrap());
        let at = |d: f64| overlap_offaxis(&m, &BeamSpec::new(0.02, d).unwrap()).unwrap().value;
        let centered = at(0.0);
        let (near, far) = (at(d), at(2.0 * d));
        // Doubling the offset quadruples the change to leading order.
        let ratio = (far - centered) / (near - centered);
        prop_assert!((ratio - 4.0).abs() < 0.05, "ratio {}", ratio);
    }

    #[test]
    fn two_overlap_routes_agree_to_the_inner_product_scale(
        n in 1u32..6,
        p in 0u32..15,
        l in 0u32..15,
        offset in 0.0..0.1f64,
    ) {
        let g = silica(20.0, 0.07);
        let m = mode_data(&g, ModeIndex::new(n, p, l, Parity::Cosine).unwrap());
        let beam = BeamSpec::new(0.02, offset).unwrap();
        let a = overlap_offaxis(&m, &beam).unwrap().value;
        let b = overlap_hermite(&m, &beam).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12 * cauchy_schwarz_scale(&m, &beam));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn static_sum_is_positive_and_never_decreases(
        mass in 5.0..50.0f64,
        thickness in 0.04..0.08f64,
        waist in 0.01..0.05f64,
        offset_fraction in 0.0..1.0f64,
    ) {
        let g = silica(mass, thickness);
        let room = 0.5 * g.diameter() - waist;
        prop_assume!(room > 0.0);
        let beam = BeamSpec::new(waist, 0.9 * room * offset_fraction).unwrap();
        let points = convergence_study(&g, &beam, &[1, 10, 100, 1000, 10_000], &policy()).unwrap();
        prop_assert!(points[0].value > 0.0);
        prop_assert!(points.windows(2).all(|w| w[1].value >= w[0].value));
        let full = sweep::chi0_or_partial(&g, &beam, &policy()).unwrap();
        prop_assert_eq!(full.value.im, 0.0);
        prop_assert!(full.modal_sum.re > 0.0 && full.remainder.re >= 0.0);
    }

    #[test]
    fn optical_mass_overestimates(thickness in 0.04..0.12f64, waist in 0.01..0.06f64) {
        let g = silica(20.0, thickness);
        let beam = BeamSpec::centered(waist).unwrap();
        let exact = chi_eff_static(&g, &beam, &policy()).unwrap().value.re;
        prop_assert!(optical_mass_approx(&g, &beam).unwrap().chi_approx >= exact);
    }

    #[test]
    fn fluctuation_dissipation_identity(log_omega in 0.0..7.0f64, temperature in 1.0..400.0f64, phi in 1e-8..1e-2f64) {
        let g = silica(20.0, 0.07);
        let beam = BeamSpec::centered(0.02).unwrap();
        let omega = 10f64.powf(log_omega);
        let chi = chi_eff(&g, &beam, omega, phi, &policy()).unwrap().value;
        let force = thermal_force_spectrum(chi, omega, temperature).unwrap();
        let lhs = chi.norm_sqr() * force;
        let rhs = 2.0 * BOLTZMANN * temperature / omega * chi.im;
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }

    #[test]
    fn sweep_grid_hits_both_endpoints(from in 0.005..0.03f64, span in 0.001..0.04f64, points in 2usize..40) {
        let spec = SweepSpec::new(SweepParam::Waist, from, from + span, points, Scenario::default()).unwrap();
        let values = spec.values();
        prop_assert_eq!(values.len(), points);
        prop_assert_eq!(values[0], from);
        prop_assert_eq!(*values.last().unwrap(), from + span);
        prop_assert!(values.windows(2).all(|w| w[1] > w[0]));
    }
}

/// Scaled susceptibility `chi0 w0^2 / h0` over thickness in [0.04, 0.12] m
/// and waist in [0.01, 0.06] m at 20 kg.
fn scaled_spread() -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for thickness in [0.04, 0.06, 0.08, 0.1, 0.12] {
        let g = silica(20.0, thickness);
        for waist in [0.01, 0.02, 0.03, 0.04, 0.05, 0.06] {
            let chi = chi_eff_static(&g, &BeamSpec::centered(waist).unwrap(), &policy()).unwrap().value.re;
            let scaled = chi * waist * waist / thickness;
            lo = lo.min(scaled);
            hi = hi.max(scaled);
        }
    }
    hi / lo
}

#[test]
#[ignore = "the full sum spreads by about 4.9 over this box: the optical-mass law is only asymptotic"]
fn thickness_over_waist_squared_law_within_factor_two() {
    let spread = scaled_spread();
    assert!(spread < 2.0, "spread {spread}");
}
