//! Envelope contract tests: ground-state profile, transported frequency
//! profile, closed form vs quadrature, transport residual, amplitude bounds
//! and the frozen-frame kernel identity. Reference numbers were computed
//! independently and frozen.

use approx::assert_abs_diff_eq;
use dirac_edge_core::coefficients::CoefficientTrack;
use dirac_edge_core::envelope::{
    envelope_numeric, gaussian_envelope_closed_form, hermite_ground, model_kernel_residual,
    sup_amplitude_bound, transport_profile, transport_residual, NumericEnvelope, Profile,
};
use dirac_edge_core::geometry::DomainWall;
use dirac_edge_core::potential::MagneticPotential;
use dirac_edge_core::vec2::Vec2;

const SQRT_2_INV: f64 = 0.7071067811865475;

fn flat_track(b: f64, t_max: f64) -> CoefficientTrack {
    CoefficientTrack::build(
        &DomainWall::flat(),
        &MagneticPotential::constant(b),
        Vec2::ZERO,
        t_max,
        1e-3,
    )
    .unwrap()
}

fn circle_track(b: f64, t_max: f64) -> CoefficientTrack {
    CoefficientTrack::build(
        &DomainWall::circle_quadratic(1.0),
        &MagneticPotential::circle_constant(b),
        Vec2::new(1.0, 0.0),
        t_max,
        1e-3,
    )
    .unwrap()
}

#[test]
fn hermite_ground_values_and_norm() {
    let v = hermite_ground(1.0, 0.0);
    assert_abs_diff_eq!(v[0].re, 0.5311259660135985, epsilon = 1e-14);
    assert_abs_diff_eq!(v[1].re, -0.5311259660135985, epsilon = 1e-14);
    let v = hermite_ground(2.3, 0.4);
    assert_abs_diff_eq!(v[0].re, 0.5441508455180784, epsilon = 1e-14);

    // Unit L2 norm as a two-spinor, for several widths.
    for &rho in &[0.5, 1.0, 2.3] {
        let n = 4001;
        let h = 24.0 / (n - 1) as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let z = -12.0 + k as f64 * h;
            let v = hermite_ground(rho, z);
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += w * (v[0].norm_sqr() + v[1].norm_sqr());
        }
        assert_abs_diff_eq!(acc * h, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn transport_profile_is_identity_at_start() {
    let track = circle_track(SQRT_2_INV, 1.0);
    let profile = Profile::gaussian(1.0);
    for &xi in &[-2.0, -0.3, 0.0, 1.7] {
        let f = transport_profile(&profile, &track.samples[0], xi);
        let expected = profile.fhat(xi);
        assert_abs_diff_eq!(f.re, expected.re, epsilon = 1e-12);
        assert_abs_diff_eq!(f.im, expected.im, epsilon = 1e-12);
    }
}

#[test]
fn transported_mass_follows_speed_ratio() {
    // |f(t, xi)| = e^{mu/2} |fhat(e^mu xi)|: the L2 norm in xi is preserved
    // while the profile dilates with the speed ratio c_t/c_0.
    let track = CoefficientTrack::build(
        &DomainWall::flat(),
        &MagneticPotential::tanh_ramp(1.0, 2.0),
        Vec2::new(4.0, 0.0),
        3.0,
        1e-3,
    )
    .unwrap();
    let profile = Profile::gaussian(1.0);
    let s = track.samples.last().unwrap();
    assert!(s.mu.abs() > 1e-3, "ramp should change the speed");
    let n = 2001;
    let h = 40.0 / (n - 1) as f64;
    let mut acc = 0.0;
    for k in 0..n {
        let xi = -20.0 + k as f64 * h;
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        acc += w * transport_profile(&profile, s, xi).norm_sqr();
    }
    let expected = (std::f64::consts::PI / 1.0f64).sqrt().sqrt();
    assert_abs_diff_eq!((acc * h).sqrt(), expected, epsilon = 1e-10);
}

#[test]
fn closed_form_matches_frozen_value() {
    let track = flat_track(1.0, 0.5);
    let s = track.samples.last().unwrap();
    let v = gaussian_envelope_closed_form(1.0, s, Vec2::new(0.3, -0.2));
    assert_abs_diff_eq!(v.re, 0.47136961108257813, epsilon = 1e-12);
    assert_abs_diff_eq!(v.im, 0.014779668812412548, epsilon = 1e-12);
}

#[test]
fn closed_form_matches_quadrature_flat() {
    let track = flat_track(1.0, 1.0);
    for &t in &[0.0, 0.5, 1.0] {
        let s = track.samples[track.index_at(t).unwrap()];
        for &(z1, z2) in &[(0.0, 0.0), (0.7, 0.4), (-1.3, 0.9), (2.0, -1.5)] {
            let z = Vec2::new(z1, z2);
            let closed = gaussian_envelope_closed_form(1.0, &s, z);
            let numeric = envelope_numeric(&Profile::gaussian(1.0), &s, z).unwrap();
            assert_abs_diff_eq!(closed.re, numeric.re, epsilon = 1e-10);
            assert_abs_diff_eq!(closed.im, numeric.im, epsilon = 1e-10);
        }
    }
}

#[test]
fn closed_form_matches_quadrature_on_dispersive_circle() {
    let track = circle_track(SQRT_2_INV, 1.0);
    for &t in &[0.5, 1.0] {
        let s = track.samples[track.index_at(t).unwrap()];
        assert!(s.nu > 0.1, "dispersion should have accumulated");
        for &(z1, z2) in &[(0.0, 0.0), (1.1, -0.6), (-0.4, 0.8)] {
            let z = Vec2::new(z1, z2);
            let closed = gaussian_envelope_closed_form(0.8, &s, z);
            let numeric = envelope_numeric(&Profile::gaussian(0.8), &s, z).unwrap();
            assert_abs_diff_eq!(closed.re, numeric.re, epsilon = 1e-9);
            assert_abs_diff_eq!(closed.im, numeric.im, epsilon = 1e-9);
        }
    }
}

#[test]
fn sampled_profile_reproduces_gaussian_path() {
    // A Gaussian tabulated on a fine grid must give the same envelope as the
    // analytic Gaussian (to interpolation accuracy).
    let track = flat_track(1.0, 0.5);
    let s = track.samples.last().unwrap();
    let n = 4001;
    let h = 24.0 / (n - 1) as f64;
    let xi: Vec<f64> = (0..n).map(|k| -12.0 + k as f64 * h).collect();
    let values = xi
        .iter()
        .map(|&x| Profile::gaussian(1.0).fhat(x))
        .collect();
    let sampled = Profile::Sampled { xi, values };
    for &(z1, z2) in &[(0.0, 0.0), (0.9, -0.3)] {
        let z = Vec2::new(z1, z2);
        let a = envelope_numeric(&sampled, s, z).unwrap();
        let b = gaussian_envelope_closed_form(1.0, s, z);
        assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-7);
        assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-7);
    }
}

#[test]
fn envelope_is_l2_unitary() {
    // ||E_t||_{L2(z)} = ||fhat||_{L2(xi)} for any track state; the closed form
    // is one component of the (1, -1) spinor, so its scalar norm carries a
    // 1/sqrt(2) factor.
    let sigma = 1.0;
    let expected = (std::f64::consts::PI / sigma).sqrt().sqrt() / std::f64::consts::SQRT_2;
    let track = circle_track(SQRT_2_INV, 1.0);
    for &t in &[0.0, 1.0] {
        let s = track.samples[track.index_at(t).unwrap()];
        let n = 801;
        let half = 10.0;
        let h = 2.0 * half / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let z = Vec2::new(-half + i as f64 * h, -half + j as f64 * h);
                acc += gaussian_envelope_closed_form(sigma, &s, z).norm_sqr();
            }
        }
        assert_abs_diff_eq!((acc * h * h).sqrt(), expected, epsilon = 1e-6);
    }
}

#[test]
fn quadrature_rejects_unresolvable_requests() {
    let track = flat_track(1.0, 0.1);
    let s = track.samples.last().unwrap();
    match NumericEnvelope::new(&Profile::gaussian(1.0), s, 4.0e4) {
        Err(dirac_edge_core::CoreError::GridResolution(_)) => {}
        other => panic!("expected GridResolution, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn transport_residual_vanishes_for_flat_constant_track() {
    let track = flat_track(1.0, 0.5);
    let xi: Vec<f64> = (0..81).map(|k| -4.0 + 0.1 * k as f64).collect();
    let r = transport_residual(&Profile::gaussian(1.0), &track, 0.25, &xi).unwrap();
    assert!(r < 1e-9, "flat residual {r:.3e}");
}

#[test]
fn transport_residual_shrinks_with_resolution() {
    // On the dispersive circle the residual is pure discretization error; it
    // must drop by a clear factor when both steps are halved.
    let profile = Profile::gaussian(1.0);
    let residual = |dt: f64, n_xi: usize| -> f64 {
        let track = CoefficientTrack::build(
            &DomainWall::circle_quadratic(1.0),
            &MagneticPotential::circle_constant(SQRT_2_INV),
            Vec2::new(1.0, 0.0),
            1.0,
            dt,
        )
        .unwrap();
        let h = 8.0 / (n_xi - 1) as f64;
        let xi: Vec<f64> = (0..n_xi).map(|k| -4.0 + h * k as f64).collect();
        transport_residual(&profile, &track, 0.5, &xi).unwrap()
    };
    let coarse = residual(0.02, 81);
    let fine = residual(0.01, 161);
    assert!(
        coarse > 1e-12 && coarse / fine >= 3.5,
        "residual reduction {coarse:.3e} -> {fine:.3e} (factor {:.2})",
        coarse / fine
    );
}

#[test]
fn peak_amplitude_respects_dispersive_bound() {
    let sigma = 1.0;
    let profile = Profile::gaussian(sigma);
    let f_l1 = profile.f_l1().unwrap();
    let fhat_l1 = profile.fhat_l1();
    // Two revolutions of the dispersive circle: nu grows to ~8.
    let track = circle_track(SQRT_2_INV, 15.0);
    for &t in &[0.0, 2.0, 5.0, 9.0, 14.0] {
        let s = track.samples[track.index_at(t).unwrap()];
        // Measured sup over a z-grid around the peak.
        let mut sup = 0.0f64;
        for i in -60..=60 {
            for j in -60..=60 {
                let z = Vec2::new(0.05 * i as f64, 0.05 * j as f64);
                sup = sup.max(gaussian_envelope_closed_form(sigma, &s, z).norm());
            }
        }
        let bound = sup_amplitude_bound(&s, f_l1, fhat_l1);
        assert!(
            sup <= bound * (1.0 + 1e-9),
            "t = {t}: sup {sup:.6} exceeds bound {bound:.6}"
        );
    }
}

#[test]
fn peak_amplitude_decays_like_inverse_sqrt_nu() {
    let sigma = 1.0;
    let track = circle_track(SQRT_2_INV, 16.0);
    let mut nus = Vec::new();
    let mut amps = Vec::new();
    for s in track.samples.iter().step_by(250) {
        if s.nu < 5.0 {
            continue;
        }
        let mut sup = 0.0f64;
        for i in -80..=80 {
            for j in -40..=40 {
                let z = Vec2::new(0.08 * i as f64, 0.05 * j as f64);
                sup = sup.max(gaussian_envelope_closed_form(sigma, s, z).norm());
            }
        }
        nus.push(s.nu);
        amps.push(sup);
    }
    assert!(nus.len() >= 8, "need a usable fit window, got {}", nus.len());
    let fit = dirac_edge_core::diagnostics::fit_power_law(&nus, &amps).unwrap();
    assert!(
        (fit.exponent + 0.5).abs() < 0.1,
        "amplitude exponent {:.3}",
        fit.exponent
    );
}

#[test]
fn frozen_frame_kernel_annihilates_leading_profile() {
    let profile = Profile::gaussian(1.0);
    for track in [flat_track(1.0, 0.5), circle_track(SQRT_2_INV, 0.5)] {
        let s = track.samples.last().unwrap();
        let xi: Vec<f64> = (0..25).map(|k| -3.0 + 0.25 * k as f64).collect();
        let r = model_kernel_residual(&profile, s, &xi, 512, 12.0).unwrap();
        assert!(r < 1e-8, "kernel residual {r:.3e}");
    }
}
