use nhberry_core::dynamics::{
    propagate_lindblad, propagate_nh, survival_probability, LoopSchedule, RampShape, RecordStates,
    ThreeLevelParams,
};
use nhberry_core::model::{frame, hamiltonian, GAMMA_DEFAULT};
use nhberry_core::numerics::{integrate_linear, CMat2, CVec2, Complex};
use nhberry_core::protocols::SequenceState;
use nhberry_core::{Branch, Direction, DriveParams};
use proptest::prelude::*;

const MINUS_I: Complex = Complex::new(0.0, -1.0);

fn shape() -> impl Strategy<Value = RampShape> {
    prop_oneof![
        (0.05f64..0.5).prop_map(|ramp_fraction| RampShape::CosineFlat { ramp_fraction }),
        Just(RampShape::FullCosine),
        Just(RampShape::ConstantRate),
    ]
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Plus), Just(Direction::Minus)]
}

fn drive() -> impl Strategy<Value = DriveParams> {
    (0.3f64..8.0, -10.0f64..10.0, 0.05f64..1.0).prop_filter_map(
        "near the exceptional point",
        |(j, d, g)| {
            DriveParams::new(j, d, g)
                .ok()
                .filter(|p| p.delta_split().norm() > 0.2)
        },
    )
}

fn state() -> impl Strategy<Value = CVec2> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter_map("zero state", |(a, b, c, d)| {
            CVec2::new([Complex::new(a, b), Complex::new(c, d)]).normalized()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lindblad_keeps_a_valid_density_matrix(
        p in drive(),
        gamma_f in 0.0f64..0.5,
        psi in state(),
        dir in direction(),
        sh in shape(),
        t in 0.5f64..4.0,
    ) {
        let p3 = ThreeLevelParams::from_drive(p, gamma_f).unwrap();
        let sched = LoopSchedule::with_shape(dir, t, 1.0, sh).unwrap();
        let rec = propagate_lindblad(&p3, &sched, &SequenceState::lift(&psi), 1e-10, 41).unwrap();
        let RecordStates::Mixed(states) = &rec.states else { panic!("mixed record expected") };
        for rho in states {
            prop_assert!((rho.trace() - Complex::new(1.0, 0.0)).norm() < 1e-9);
            prop_assert!((*rho - rho.dagger()).norm() < 1e-10);
            prop_assert!(rho.hermitian_eigenvalues()[0] > -1e-9);
        }
    }

    #[test]
    fn no_jump_limit_matches_effective_hamiltonian(
        p in drive(),
        psi in state(),
        dir in direction(),
        sh in shape(),
        t in 0.5f64..4.0,
    ) {
        let p3 = ThreeLevelParams::from_drive(p, 0.0).unwrap();
        let sched = LoopSchedule::with_shape(dir, t, 1.0, sh).unwrap();
        let mixed = propagate_lindblad(&p3, &sched, &SequenceState::lift(&psi), 1e-11, 11).unwrap();
        let pure = propagate_nh(&p, &sched, &psi, 1e-11, 11).unwrap();
        let (RecordStates::Mixed(rhos), RecordStates::Pure(kets)) = (&mixed.states, &pure.states) else {
            panic!("record kinds")
        };
        for ((rho, ket), n) in rhos.iter().zip(kets).zip(&pure.norms_sq) {
            let block = SequenceState::Mixed(*rho).manifold_block();
            let tr = block.trace().re;
            let projector = ket.outer(ket).scale_real(1.0 / n);
            prop_assert!((block.scale_real(1.0 / tr) - projector).norm() < 1e-6);
            // The leaked norm sits in |g>.
            prop_assert!((rho[(0, 0)].re - (1.0 - n)).abs() < 1e-6);
        }
    }

    #[test]
    fn nh_norm_is_monotone_and_bloch_vectors_are_pure(
        p in drive(),
        psi in state(),
        dir in direction(),
        sh in shape(),
        t in 0.5f64..10.0,
    ) {
        let sched = LoopSchedule::with_shape(dir, t, 1.0, sh).unwrap();
        let rec = propagate_nh(&p, &sched, &psi, 1e-10, 101).unwrap();
        for w in rec.norms_sq.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
        for b in &rec.bloch {
            let r = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
            prop_assert!((r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hermitian_generator_preserves_norm(j in 0.1f64..10.0, d in -10.0f64..10.0, phi in 0.0f64..std::f64::consts::TAU, span in 0.1f64..20.0, psi in state()) {
        let p = DriveParams::new(j, d, 0.0).unwrap();
        let tol = 1e-9;
        let h = hamiltonian(&p, phi).scale(MINUS_I);
        let traj = integrate_linear(|_| h, psi, [0.0, span], tol).unwrap();
        let worst = traj.iter().map(|(_, y)| (y.norm() - 1.0).abs()).fold(0.0, f64::max);
        // Local errors add up: the bound holds per Rabi period.
        let periods = (4.0 * j * j + d * d).sqrt() * span / (2.0 * std::f64::consts::PI);
        prop_assert!(worst <= 10.0 * tol * periods.max(1.0), "drift {worst:e} over {periods} periods");
    }

    #[test]
    fn reversed_loop_mirrors_bloch_trajectory(p in drive(), psi in state(), sh in shape(), t in 0.5f64..4.0) {
        // chi = sigma_z conj(psi) evolves under (-Delta, Gamma) along the reversed loop.
        let q = DriveParams::new(p.j, -p.delta, p.gamma).unwrap();
        let fwd = LoopSchedule::with_shape(Direction::Plus, t, 1.0, sh).unwrap();
        let chi = CVec2::new([psi[0].conj(), -psi[1].conj()]);
        let a = propagate_nh(&p, &fwd, &psi, 1e-11, 21).unwrap();
        let b = propagate_nh(&q, &fwd.reversed(), &chi, 1e-11, 21).unwrap();
        for (u, v) in a.bloch.iter().zip(&b.bloch) {
            prop_assert!((u[0] + v[0]).abs() < 1e-7);
            prop_assert!((u[1] - v[1]).abs() < 1e-7);
            prop_assert!((u[2] - v[2]).abs() < 1e-7);
        }
        for (x, y) in a.norms_sq.iter().zip(&b.norms_sq) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}

fn frozen_end_state(tol: f64) -> CVec2 {
    let p = DriveParams::from_mhz(2.17, 0.51, GAMMA_DEFAULT).unwrap();
    let sched = LoopSchedule::with_shape(Direction::Plus, 3.0, 1.0, RampShape::default()).unwrap();
    let psi = CVec2::basis(1);
    propagate_nh(&p, &sched, &psi, tol, 2)
        .unwrap()
        .final_pure()
        .unwrap()
}

#[test]
fn tighter_tolerance_reduces_end_state_error() {
    let reference = frozen_end_state(1e-13);
    let mut prev = f64::INFINITY;
    for tol in [1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10] {
        let err = (frozen_end_state(tol) - reference).norm();
        assert!(err < prev, "tol {tol}: {err} !< {prev}");
        prev = err;
    }
    assert!(prev < 1e-9);
}

#[test]
fn halving_tolerance_halves_end_state_error() {
    let mut tol = 1e-5;
    while tol > 1e-9 {
        let reference = frozen_end_state(tol / 10.0);
        let coarse = (frozen_end_state(tol) - reference).norm();
        let fine = (frozen_end_state(tol / 2.0) - reference).norm();
        assert!(coarse >= 2.0 * fine, "tol {tol:e}: {coarse:e} -> {fine:e}");
        tol /= 4.0;
    }
}

#[test]
fn eigenstate_survival_ratio_follows_imaginary_phase() {
    let p = DriveParams::from_mhz(2.17, 0.51, GAMMA_DEFAULT).unwrap();
    let psi = frame(&p, 0.0).unwrap().right(Branch::Minus);
    let run = |dir| {
        let s = LoopSchedule::with_shape(dir, 30.0, 1.0, RampShape::default()).unwrap();
        *survival_probability(&propagate_nh(&p, &s, &psi, 1e-10, 2).unwrap())
            .unwrap()
            .last()
            .unwrap()
    };
    let th = nhberry_core::model::berry_phase(&p, Branch::Minus, Direction::Plus, 1.0)
        .unwrap()
        .imag_part;
    let ratio = run(Direction::Plus) / run(Direction::Minus);
    assert!((ratio / (-4.0 * th).exp() - 1.0).abs() < 1e-2);
}

#[test]
fn frozen_generator_in_integrate_linear_matches_matrix_exponential() {
    let p = DriveParams::new(1.0, 0.0, 0.0).unwrap();
    let h: CMat2 = hamiltonian(&p, 0.0).scale(MINUS_I);
    let traj = integrate_linear(
        |_| h,
        CVec2::basis(0),
        [0.0, std::f64::consts::FRAC_PI_2],
        1e-11,
    )
    .unwrap();
    let (_, end) = traj.last().unwrap();
    // exp(-i sigma_x pi/2) |0> = -i |1>.
    assert!((end[0]).norm() < 1e-9 && (end[1] - MINUS_I).norm() < 1e-9);
}
