//! Acceptance gate: twelve end-to-end criteria covering solver fidelity,
//! the asymptotic construction, and the headline physics (magnetic slowdown,
//! curvature dispersion and its cancellation, Aharonov-Bohm winding,
//! convergence in epsilon, determinism).
//!
//! Each criterion prints one `criterion NN: PASS/FAIL` line (visible with
//! `--nocapture`) and asserts, so `cargo test --test acceptance` is the
//! single gate. The slowest criteria (06, 09) take several minutes each on
//! one core; everything else is desk scale.

use dirac_edge_core::assembler::{exact_flat_solution, Assembler};
use dirac_edge_core::coefficients::CoefficientTrack;
use dirac_edge_core::diagnostics::{fit_power_law, l2_error, speed_estimate, ObservableSeries};
use dirac_edge_core::envelope::{
    gaussian_envelope_closed_form, model_kernel_residual, transport_residual, NumericEnvelope,
    Profile, WavepacketSpec,
};
use dirac_edge_core::geometry::DomainWall;
use dirac_edge_core::grid::GridParams;
use dirac_edge_core::potential::MagneticPotential;
use dirac_edge_core::solver::{DiracSolver, WindowSpec};
use dirac_edge_core::vec2::Vec2;

fn report(n: u32, desc: &str, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n:02}: {verdict} - {desc} ({detail})");
    assert!(ok, "criterion {n:02} failed: {desc} ({detail})");
}

fn gaussian_spec(epsilon: f64, y0: Vec2) -> WavepacketSpec {
    WavepacketSpec {
        epsilon,
        y0,
        profile: Profile::gaussian(1.0),
    }
}

const FLAT_BOX: GridParams = GridParams {
    nx: 256,
    ny: 256,
    x0: -4.0,
    x1: 4.0,
    y0: -3.0,
    y1: 3.0,
};

#[test]
fn c01_norm_conservation_over_2000_steps() {
    let wall = DomainWall::flat();
    let field = MagneticPotential::constant(1.0);
    let y0 = Vec2::new(1.0, 0.0);
    let track = CoefficientTrack::build(&wall, &field, y0, 0.1, 1e-3).unwrap();
    let initial = Assembler::new(gaussian_spec(0.2, y0), field.clone())
        .leading_order(&track.samples[0], FLAT_BOX)
        .unwrap();
    let n0 = initial.l2_norm();
    let mut solver =
        DiracSolver::new(&wall, &field, &initial, Some(0.002), WindowSpec::default()).unwrap();
    solver.run_steps(2000);
    let drift = (solver.state().l2_norm() - n0).abs() / n0;
    report(
        1,
        "relative L2 norm drift < 1e-10 over 2000 steps (flat wall, B = 1)",
        drift < 1e-10,
        format!("drift = {drift:.3e}"),
    );
}

#[test]
fn c02_exact_oracle_dt_self_convergence() {
    let wall = DomainWall::flat();
    let field = MagneticPotential::constant(1.0);
    let spec = gaussian_spec(0.2, Vec2::new(1.0, 0.0));
    let initial = exact_flat_solution(1.0, &spec, 0.0, FLAT_BOX).unwrap();
    let norm = initial.l2_norm();
    let mut errs = Vec::new();
    for dt in [0.04, 0.02, 0.01] {
        let mut solver =
            DiracSolver::new(&wall, &field, &initial, Some(dt), WindowSpec::default()).unwrap();
        solver.evolve(1.0, 1.0, |_| Ok(())).unwrap();
        let exact = exact_flat_solution(1.0, &spec, solver.t(), FLAT_BOX).unwrap();
        errs.push(l2_error(&solver.state(), &exact).unwrap() / norm);
    }
    let r1 = errs[0] / errs[1];
    let r2 = errs[1] / errs[2];
    let ok = (3.5..=4.5).contains(&r1) && (3.5..=4.5).contains(&r2) && errs[2] < 5e-3;
    report(
        2,
        "solver vs exact flat solution at t = 1: O(dt^2) self-convergence and err < 5e-3",
        ok,
        format!(
            "errors = [{:.2e}, {:.2e}, {:.2e}], ratios = [{r1:.2}, {r2:.2}]",
            errs[0], errs[1], errs[2]
        ),
    );
}

#[test]
fn c03_magnetic_slowdown_speeds() {
    let wall = DomainWall::flat();
    let y0 = Vec2::new(1.0, 0.0);
    let mut detail = String::new();
    let mut ok = true;
    for b in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let field = MagneticPotential::constant(b);
        let track = CoefficientTrack::build(&wall, &field, y0, 1.5, 1e-3).unwrap();
        let initial = Assembler::new(gaussian_spec(0.2, y0), field.clone())
            .leading_order(&track.samples[0], FLAT_BOX)
            .unwrap();
        let mut solver =
            DiracSolver::new(&wall, &field, &initial, Some(0.02), WindowSpec::default()).unwrap();
        let mut series = ObservableSeries::new(0);
        solver
            .evolve(1.5, 0.15, |obs| series.push(obs, None))
            .unwrap();
        let measured = speed_estimate(&series, (0.3, 1.5)).unwrap();
        let expected = 1.0 / (1.0 + b * b).sqrt();
        let asymptotic = track.samples.last().unwrap().c;
        let dev_expected = (measured - expected).abs() / expected;
        let dev_asym = (measured - asymptotic).abs() / asymptotic;
        ok &= dev_expected < 0.02 && dev_asym < 0.01;
        detail.push_str(&format!("B={b}: {measured:.4} vs {expected:.4}; "));
    }
    report(
        3,
        "measured speeds within 2% of 1/sqrt(1+B^2) and 1% of the track speed",
        ok,
        detail,
    );
}

#[test]
fn c04_closed_form_vs_quadrature_envelope() {
    let profile = Profile::gaussian(1.0);
    let scenarios: [(&str, DomainWall, MagneticPotential); 2] = [
        (
            "flat B=1",
            DomainWall::flat(),
            MagneticPotential::constant(1.0),
        ),
        (
            "circle B=1/sqrt2",
            DomainWall::circle_quadratic(1.0),
            MagneticPotential::circle_constant(std::f64::consts::FRAC_1_SQRT_2),
        ),
    ];
    let mut worst = 0.0f64;
    for (_, wall, field) in &scenarios {
        let track = CoefficientTrack::build(wall, field, Vec2::new(1.0, 0.0), 1.0, 1e-3).unwrap();
        for t in [0.0, 0.5, 1.0] {
            let s = track.at(t).unwrap();
            let numeric = NumericEnvelope::new(&profile, &s, 12.0).unwrap();
            let mut sup_ref = 0.0f64;
            let mut sup_diff = 0.0f64;
            let mut z1 = -6.0;
            while z1 <= 6.0 {
                let mut z2 = -4.0;
                while z2 <= 4.0 {
                    let z = Vec2::new(z1, z2);
                    let a = gaussian_envelope_closed_form(1.0, &s, z);
                    let b = numeric.value(z);
                    sup_ref = sup_ref.max(a.norm());
                    sup_diff = sup_diff.max((a - b).norm());
                    z2 += 0.25;
                }
                z1 += 0.25;
            }
            worst = worst.max(sup_diff / sup_ref);
        }
    }
    report(
        4,
        "closed-form vs quadrature envelope, rel sup error < 1e-8 at t in {0, 0.5, 1}",
        worst < 1e-8,
        format!("worst rel sup = {worst:.3e}"),
    );
}

#[test]
fn c05_transport_residual_shrinks_with_resolution() {
    let wall = DomainWall::circle_quadratic(1.0);
    let field = MagneticPotential::circle_constant(std::f64::consts::FRAC_1_SQRT_2);
    let profile = Profile::gaussian(1.0);
    let y0 = Vec2::new(1.0, 0.0);
    // Resolutions chosen so the residual is still dominated by
    // discretization error, not round-off.
    let mut residuals = Vec::new();
    for (dt, h) in [(0.02, 0.1f64), (0.01, 0.05)] {
        let track = CoefficientTrack::build(&wall, &field, y0, 1.0, dt).unwrap();
        let n = (8.0 / h).round() as usize + 1;
        let xi: Vec<f64> = (0..n).map(|k| -4.0 + k as f64 * h).collect();
        residuals.push(transport_residual(&profile, &track, 0.5, &xi).unwrap());
    }
    let ratio = residuals[0] / residuals[1];
    report(
        5,
        "transport residual shrinks >= 3.5x when (dt, dxi) halve (circle preset)",
        ratio >= 3.5,
        format!(
            "residuals = [{:.3e}, {:.3e}], ratio = {ratio:.1}",
            residuals[0], residuals[1]
        ),
    );
}

#[test]
fn c06_dispersion_amplitude_exponent() {
    let wall = DomainWall::circle_quadratic(1.0);
    let field = MagneticPotential::circle_constant(std::f64::consts::FRAC_1_SQRT_2);
    let y0 = Vec2::new(1.0, 0.0);
    let grid = GridParams {
        nx: 512,
        ny: 512,
        x0: -3.5,
        x1: 3.5,
        y0: -3.5,
        y1: 3.5,
    };
    // Two revolutions: the accumulated dispersion nu grows linearly and
    // crosses 5 during the second one.
    let t_end = 2.0 * std::f64::consts::TAU * (1.5f64).sqrt();
    let track = CoefficientTrack::build(&wall, &field, y0, t_end, 1e-3).unwrap();
    let initial = Assembler::new(gaussian_spec(0.05, y0), field.clone())
        .leading_order(&track.samples[0], grid)
        .unwrap();
    let mut solver =
        DiracSolver::new(&wall, &field, &initial, Some(0.004), WindowSpec::default()).unwrap();
    let mut nus = Vec::new();
    let mut amps = Vec::new();
    solver
        .evolve(t_end, 0.1, |obs| {
            let s = track.at(obs.t)?;
            if s.nu >= 5.0 {
                nus.push(s.nu);
                amps.push(obs.max_amplitude());
            }
            Ok(())
        })
        .unwrap();
    let fit = fit_power_law(&nus, &amps).unwrap();
    report(
        6,
        "max amplitude ~ nu^(-1/2) over nu in [5, nu_max] (circle, B = 1/sqrt2, eps = 0.05)",
        (fit.exponent + 0.5).abs() <= 0.1,
        format!(
            "exponent = {:.3} over {} points, nu up to {:.2}",
            fit.exponent,
            nus.len(),
            nus.last().copied().unwrap_or(0.0)
        ),
    );
}

#[test]
fn c07_no_dispersion_wall() {
    let wall = DomainWall::circle_power(4.0, 1.0);
    let field = MagneticPotential::circle_constant(1.0);
    let y0 = Vec2::new(1.0, 0.0);
    let t_rev = std::f64::consts::TAU * std::f64::consts::SQRT_2;
    let track = CoefficientTrack::build(&wall, &field, y0, t_rev, 1e-3).unwrap();
    let nu_max = track.samples.iter().fold(0.0f64, |a, s| a.max(s.nu.abs()));

    let grid = GridParams {
        nx: 384,
        ny: 384,
        x0: -3.0,
        x1: 3.0,
        y0: -3.0,
        y1: 3.0,
    };
    let initial = Assembler::new(gaussian_spec(0.05, y0), field.clone())
        .leading_order(&track.samples[0], grid)
        .unwrap();
    let amp0 = initial.max_amplitude();
    let mut solver =
        DiracSolver::new(&wall, &field, &initial, Some(0.0033), WindowSpec::default()).unwrap();
    solver.evolve(t_rev, t_rev, |_| Ok(())).unwrap();
    let drop = 1.0 - solver.state().max_amplitude() / amp0;
    report(
        7,
        "quartic wall at B = 1: nu stays < 1e-10 and amplitude drops < 10% per revolution",
        nu_max < 1e-10 && drop < 0.10,
        format!("nu_max = {nu_max:.2e}, amplitude drop = {:.2}%", 100.0 * drop),
    );
}

#[test]
fn c08_aharonov_bohm_winding() {
    let wall = DomainWall::circle_quadratic(1.0);
    let y0 = Vec2::new(1.0, 0.0);
    let eps = 3.0 / 40.0;
    let grid = GridParams {
        nx: 256,
        ny: 256,
        x0: -3.0,
        x1: 3.0,
        y0: -3.0,
        y1: 3.0,
    };
    let t_rev = std::f64::consts::TAU;
    let mut windings = Vec::new();
    for flux in [std::f64::consts::TAU, 0.0] {
        let field = if flux > 0.0 {
            MagneticPotential::flux_line(flux, 0.2)
        } else {
            MagneticPotential::zero()
        };
        let track = CoefficientTrack::build(&wall, &field, y0, t_rev, 1e-3).unwrap();
        let initial = Assembler::new(gaussian_spec(eps, y0), field.clone())
            .leading_order(&track.samples[0], grid)
            .unwrap();
        // A little mass scatters off the mollified core; harmless for the
        // phase observable, so the margin guard is loosened.
        let window = WindowSpec::default().with_contamination_threshold(1e-4);
        let mut solver = DiracSolver::new(&wall, &field, &initial, None, window).unwrap();
        let mut series = ObservableSeries::new(0);
        solver
            .evolve(t_rev, 0.05, |obs| series.push(obs, None))
            .unwrap();
        windings.push(series.phase_winding());
    }
    let expected = std::f64::consts::TAU / eps; // flux / eps
    let dev = (windings[0].abs() - expected).abs();
    let control_turns = windings[1].abs() / std::f64::consts::TAU;
    report(
        8,
        "center phase winds by flux/eps +- 2pi per loop; zero-flux control < 2 turns",
        dev <= std::f64::consts::TAU && control_turns < 2.0,
        format!(
            "winding = {:.2} vs {expected:.2} (dev {dev:.2}), control = {control_turns:.2} turns",
            windings[0]
        ),
    );
}

#[test]
fn c09_epsilon_convergence_rate() {
    let wall = DomainWall::circle_quadratic(1.0);
    let field = MagneticPotential::circle_constant(std::f64::consts::FRAC_1_SQRT_2);
    let y0 = Vec2::new(1.0, 0.0);
    let grid = GridParams {
        nx: 448,
        ny: 448,
        x0: -3.5,
        x1: 3.5,
        y0: -3.5,
        y1: 3.5,
    };
    let track = CoefficientTrack::build(&wall, &field, y0, 1.0, 1e-3).unwrap();
    let epsilons = [0.2, 0.1, 0.05];
    let mut slopes = Vec::new();
    for q in [0.5, 1.0] {
        let mut errs = Vec::new();
        for &eps in &epsilons {
            let asm = Assembler::new(gaussian_spec(eps, y0), field.clone()).with_gauge_q(q);
            let initial = asm.leading_order(&track.samples[0], grid).unwrap();
            let norm = initial.l2_norm();
            let mut solver =
                DiracSolver::new(&wall, &field, &initial, None, WindowSpec::default()).unwrap();
            let mut sup = 0.0f64;
            solver
                .evolve(1.0, 0.1, |obs| {
                    let s = track.at(obs.t)?;
                    let reference = asm.leading_order(&s, grid)?;
                    sup = sup.max(l2_error(obs, &reference)? / norm);
                    Ok(())
                })
                .unwrap();
            errs.push(sup);
        }
        slopes.push(fit_power_law(&epsilons, &errs).unwrap().exponent);
    }
    // The half-weight Taylor term is the one that attains the rate; the full
    // weight demonstrably does not (slope ~ 0.1), which settles the choice of
    // the shipped default.
    report(
        9,
        "sup_{t<=1} PDE-vs-asymptotics error fits slope >= 0.4 in eps for gauge weight 1/2",
        slopes[0] >= 0.4,
        format!(
            "slope(q=1/2) = {:.3}, slope(q=1) = {:.3} over eps = {epsilons:?}",
            slopes[0], slopes[1]
        ),
    );
}

#[test]
fn c10_model_kernel_residual() {
    let wall = DomainWall::circle_quadratic(1.0);
    let field = MagneticPotential::circle_constant(std::f64::consts::FRAC_1_SQRT_2);
    let track = CoefficientTrack::build(&wall, &field, Vec2::new(1.0, 0.0), 1.0, 1e-3).unwrap();
    let s = track.at(0.5).unwrap();
    let xi: Vec<f64> = (0..121).map(|k| -6.0 + 0.1 * k as f64).collect();
    let residual =
        model_kernel_residual(&Profile::gaussian(1.0), &s, &xi, 256, 8.0).unwrap();
    report(
        10,
        "frozen-frame kernel residual < 1e-8 at spectral resolution",
        residual < 1e-8,
        format!("residual = {residual:.3e}"),
    );
}

#[test]
fn c11_coefficient_identity_on_the_ramp() {
    let wall = DomainWall::flat();
    let field = MagneticPotential::tanh_ramp(1.0, 2.0);
    let track = CoefficientTrack::build(&wall, &field, Vec2::new(4.0, 0.0), 4.0, 1e-3).unwrap();
    let dt = track.dt;
    let mut worst = 0.0f64;
    for i in 2..track.samples.len() - 2 {
        let lnc = |k: usize| track.samples[k].c.ln();
        // 4th-order central difference of ln c.
        let dlnc = (-lnc(i + 2) + 8.0 * lnc(i + 1) - 8.0 * lnc(i - 1) + lnc(i - 2)) / (12.0 * dt);
        let s = &track.samples[i];
        worst = worst.max((s.j * s.gamma - dlnc).abs());
    }
    report(
        11,
        "identity j gamma = d ln c / dt holds to 1e-6 along the tanh-ramp track",
        worst < 1e-6,
        format!("max deviation = {worst:.3e}"),
    );
}

#[test]
fn c12_determinism_bit_identical_runs() {
    let cfg = dirac_edge::config::Config::parse(
        "
[experiment]
name = flat_slowdown
epsilon = 0.2
t_end = 0.5
cadence = 0.25
[grid]
nx = 128
ny = 128
[output]
snapshots = 2
",
    )
    .unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    dirac_edge::experiments::run(&cfg, d1.path()).unwrap();
    dirac_edge::experiments::run(&cfg, d2.path()).unwrap();
    let mut ok = true;
    let mut checked = 0;
    for name in [
        "summary.txt",
        "track.csv",
        "observables.csv",
        "snapshot_000.bin",
        "snapshot_001.bin",
    ] {
        let a = std::fs::read(d1.path().join(name)).unwrap();
        let b = std::fs::read(d2.path().join(name)).unwrap();
        ok &= a == b;
        checked += 1;
    }
    report(
        12,
        "two identical runs produce bit-identical artifacts",
        ok,
        format!("{checked} artifacts compared"),
    );
}
