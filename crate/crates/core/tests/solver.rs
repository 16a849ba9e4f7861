//! Split-step propagator tests: exactness on plane waves, unitarity, the
//! O(dt^2) splitting order, window containment and the snapshot format.

use approx::assert_abs_diff_eq;
use dirac_edge_core::assembler::Assembler;
use dirac_edge_core::coefficients::CoefficientTrack;
use dirac_edge_core::diagnostics::{center_of_mass, l2_error, speed_estimate, ObservableSeries};
use dirac_edge_core::envelope::{Profile, WavepacketSpec};
use dirac_edge_core::geometry::DomainWall;
use dirac_edge_core::grid::{GridParams, SpinorGrid};
use dirac_edge_core::potential::MagneticPotential;
use dirac_edge_core::solver::{default_dt, DiracSolver, WindowSpec};
use dirac_edge_core::vec2::Vec2;
use dirac_edge_core::CoreError;
use num_complex::Complex64 as C64;

fn packet_scenario(
    epsilon: f64,
    b: f64,
    t_max: f64,
) -> (DomainWall, MagneticPotential, CoefficientTrack, Assembler, GridParams) {
    let wall = DomainWall::flat();
    let field = MagneticPotential::constant(b);
    let spec = WavepacketSpec {
        epsilon,
        y0: Vec2::new(1.0, 0.0),
        profile: Profile::gaussian(1.0),
    };
    let track = CoefficientTrack::build(&wall, &field, spec.y0, t_max, 1e-3).unwrap();
    let assembler = Assembler::new(spec, field.clone());
    let params = GridParams {
        nx: 256,
        ny: 192,
        x0: -4.0,
        x1: 4.0,
        y0: -3.0,
        y1: 3.0,
    };
    (wall, field, track, assembler, params)
}

#[test]
fn free_plane_wave_is_propagated_exactly() {
    // With kappa = 0 and A = 0 a plane wave in a helicity eigenstate evolves
    // by a pure phase e^{-i |k| t}; both split flows are exact there, so the
    // solver reproduces it to round-off for any dt.
    let wall = DomainWall::from_fn(|_| 0.0);
    let field = MagneticPotential::zero();
    let params = GridParams {
        nx: 64,
        ny: 64,
        x0: 0.0,
        x1: std::f64::consts::TAU,
        y0: 0.0,
        y1: std::f64::consts::TAU,
    };
    let k = Vec2::new(3.0, -2.0);
    let knorm = k.norm();
    // Helicity +: (k.sigma) u = |k| u with u = (k1 - i k2, |k|).
    let u = [C64::new(k.x, -k.y), C64::new(knorm, 0.0)];
    let state_at = |t: f64| -> SpinorGrid {
        SpinorGrid::from_fn(params, t, 0.1, |p| {
            let phase = C64::from_polar(1.0, k.dot(p) - knorm * t);
            [phase * u[0], phase * u[1]]
        })
        .unwrap()
    };
    let mut solver =
        DiracSolver::new(&wall, &field, &state_at(0.0), Some(0.025), WindowSpec::default())
            .unwrap();
    solver.run_steps(20);
    assert_abs_diff_eq!(solver.t(), 0.5, epsilon = 1e-12);
    let err = l2_error(&solver.state(), &state_at(0.5)).unwrap();
    let norm = solver.state().l2_norm();
    assert!(err / norm < 1e-12, "relative error {:.3e}", err / norm);
}

#[test]
fn evolution_is_unitary_to_round_off() {
    let (wall, field, track, assembler, params) = packet_scenario(0.2, 1.0, 0.1);
    let initial = assembler.leading_order(&track.samples[0], params).unwrap();
    let norm0 = initial.l2_norm();
    let mut solver = DiracSolver::new(&wall, &field, &initial, None, WindowSpec::default()).unwrap();
    for _ in 0..5 {
        solver.run_steps(10);
        let norm = solver.state().l2_norm();
        assert!(
            (norm - norm0).abs() / norm0 < 1e-12,
            "norm drifted from {norm0} to {norm}"
        );
    }
}

#[test]
fn splitting_error_is_second_order_in_dt() {
    let (wall, field, track, assembler, params) = packet_scenario(0.2, 1.0, 0.4);
    let initial = assembler.leading_order(&track.samples[0], params).unwrap();
    let final_state = |dt: f64| -> SpinorGrid {
        let mut solver =
            DiracSolver::new(&wall, &field, &initial, Some(dt), WindowSpec::default()).unwrap();
        solver.run_steps((0.4 / dt).round() as usize);
        assert_abs_diff_eq!(solver.t(), 0.4, epsilon = 1e-9);
        solver.state()
    };
    let reference = final_state(0.0025);
    let coarse = l2_error(&final_state(0.02), &reference).unwrap();
    let fine = l2_error(&final_state(0.01), &reference).unwrap();
    let ratio = coarse / fine;
    assert!(
        coarse > 1e-10 && (3.3..5.0).contains(&ratio),
        "expected ~4x reduction, got {coarse:.3e} / {fine:.3e} (ratio {ratio:.2})"
    );
}

#[test]
fn packet_rides_the_interface_at_the_slowed_speed() {
    // Flat interface, B = 1: the drift speed is 1/sqrt(2), and the packet
    // must track the guided center rather than the free speed 1.
    let (wall, field, track, assembler, params) = packet_scenario(0.2, 1.0, 2.0);
    let initial = assembler.leading_order(&track.samples[0], params).unwrap();
    let mut solver = DiracSolver::new(&wall, &field, &initial, None, WindowSpec::default()).unwrap();
    let mut series = ObservableSeries::new(0);
    solver
        .evolve(2.0, 0.1, |state| series.push(state, None))
        .unwrap();
    let speed = speed_estimate(&series, (0.2, 2.0)).unwrap();
    assert!(
        (speed - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02,
        "measured speed {speed:.4}, expected {:.4}",
        std::f64::consts::FRAC_1_SQRT_2
    );
    // And it stays glued to the interface.
    let com = center_of_mass(&solver.state()).unwrap();
    assert!(com.y.abs() < 0.05, "drifted off the interface: {com:?}");
}

#[test]
fn boundary_contamination_aborts_the_run() {
    let wall = DomainWall::flat();
    let field = MagneticPotential::constant(1.0);
    let params = GridParams {
        nx: 256,
        ny: 192,
        x0: -4.0,
        x1: 4.0,
        y0: -3.0,
        y1: 3.0,
    };
    // Gaussian blob sitting inside the window roll-off margin (x > 3.2).
    let initial = SpinorGrid::from_fn(params, 0.0, 0.2, |p| {
        let d = p - Vec2::new(3.5, 0.0);
        let amp = (-2.5 * d.norm_sq()).exp();
        [C64::new(amp, 0.0), C64::new(-amp, 0.0)]
    })
    .unwrap();
    let mut solver = DiracSolver::new(&wall, &field, &initial, None, WindowSpec::default()).unwrap();
    match solver.evolve(0.5, 0.1, |_| Ok(())) {
        Err(CoreError::BoundaryContamination { fraction, .. }) => {
            assert!(fraction > 1e-6);
        }
        other => panic!("expected BoundaryContamination, got {other:?}"),
    }
}

#[test]
fn evolve_observes_on_the_requested_cadence() {
    let (wall, field, track, assembler, params) = packet_scenario(0.2, 1.0, 0.5);
    let initial = assembler.leading_order(&track.samples[0], params).unwrap();
    let mut solver = DiracSolver::new(&wall, &field, &initial, None, WindowSpec::default()).unwrap();
    let mut times = Vec::new();
    solver
        .evolve(0.5, 0.1, |state| {
            times.push(state.t);
            Ok(())
        })
        .unwrap();
    assert_eq!(times.len(), 6);
    for (i, &t) in times.iter().enumerate() {
        assert_abs_diff_eq!(t, 0.1 * i as f64, epsilon = 1e-9);
    }
}

#[test]
fn default_dt_follows_potential_strength() {
    assert_abs_diff_eq!(default_dt(0.1, 4.0), 0.005);
    // Weak potential: capped at 0.05.
    assert_abs_diff_eq!(default_dt(0.5, 0.1), 0.05);
}

#[test]
fn cfl_ratio_reflects_requested_step() {
    let (wall, field, track, assembler, params) = packet_scenario(0.2, 1.0, 0.1);
    let initial = assembler.leading_order(&track.samples[0], params).unwrap();
    let small = DiracSolver::new(&wall, &field, &initial, None, WindowSpec::default()).unwrap();
    assert!(small.cfl_ratio <= std::f64::consts::FRAC_PI_4 + 1e-12);
    let big =
        DiracSolver::new(&wall, &field, &initial, Some(10.0 * small.dt()), WindowSpec::default())
            .unwrap();
    assert_abs_diff_eq!(big.cfl_ratio, 10.0 * small.cfl_ratio, epsilon = 1e-9);
}

#[test]
fn window_profile_is_a_plateau() {
    let w = WindowSpec::default();
    assert_eq!(w.profile(0.0), 1.0);
    assert_eq!(w.profile(0.8), 1.0);
    assert_eq!(w.profile(-0.5), 1.0);
    assert_eq!(w.profile(0.95), 0.0);
    assert_eq!(w.profile(1.0), 0.0);
    let mid = w.profile(0.875);
    assert!(mid > 0.0 && mid < 1.0);
    // Monotone roll-off.
    let mut prev = 1.0;
    for k in 0..=20 {
        let v = w.profile(0.8 + 0.0075 * k as f64);
        assert!(v <= prev + 1e-12);
        prev = v;
    }
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let params = GridParams {
        nx: 7,
        ny: 5,
        x0: -1.5,
        x1: 2.5,
        y0: 0.0,
        y1: 1.0,
    };
    let grid = SpinorGrid::from_fn(params, 0.375, 0.05, |p| {
        [
            C64::new(p.x * 1.1, -p.y),
            C64::new(p.y.sin(), (p.x * p.y).cos()),
        ]
    })
    .unwrap();
    let mut buf = Vec::new();
    grid.write_snapshot(&mut buf).unwrap();
    let back = SpinorGrid::read_snapshot(buf.as_slice()).unwrap();
    assert_eq!(back.params, params);
    assert_eq!(back.t.to_bits(), grid.t.to_bits());
    assert_eq!(back.epsilon.to_bits(), grid.epsilon.to_bits());
    for (a, b) in grid.values.iter().zip(&back.values) {
        for c in 0..2 {
            assert_eq!(a[c].re.to_bits(), b[c].re.to_bits());
            assert_eq!(a[c].im.to_bits(), b[c].im.to_bits());
        }
    }
}

#[test]
fn snapshot_byte_layout_is_frozen() {
    // A hand-assembled byte stream must parse; this pins the exact layout so
    // external readers (numpy and friends) can rely on it.
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"DEWP");
    bytes.extend_from_slice(&1u32.to_le_bytes()); // version
    bytes.extend_from_slice(&2u32.to_le_bytes()); // nx
    bytes.extend_from_slice(&2u32.to_le_bytes()); // ny
    for v in [0.0f64, 1.0, 0.0, 1.0, 0.25, 0.1] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    // Cell values 0..16 in (Re1, Im1, Re2, Im2) order, x fastest.
    for k in 0..16 {
        bytes.extend_from_slice(&(k as f64).to_le_bytes());
    }
    let grid = SpinorGrid::read_snapshot(bytes.as_slice()).unwrap();
    assert_eq!(grid.params.nx, 2);
    assert_eq!(grid.t, 0.25);
    assert_eq!(grid.epsilon, 0.1);
    // Cell (ix = 1, iy = 0) is the second cell: values 4..8.
    assert_eq!(grid.at(1, 0)[0], C64::new(4.0, 5.0));
    assert_eq!(grid.at(1, 0)[1], C64::new(6.0, 7.0));
    // Cell (0, 1) is the third cell: values 8..12.
    assert_eq!(grid.at(0, 1)[0], C64::new(8.0, 9.0));

    // Corrupted magic is rejected.
    bytes[0] = b'X';
    match SpinorGrid::read_snapshot(bytes.as_slice()) {
        Err(CoreError::SnapshotFormat(_)) => {}
        other => panic!("expected SnapshotFormat, got {:?}", other.map(|_| ())),
    }
}
