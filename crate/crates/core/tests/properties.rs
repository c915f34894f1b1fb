use std::f64::consts::PI;

use nhberry_core::geometry::{
    alpha_from_params, line_integral_phase, params_from_alpha, surface_integral_phase, MixingAngle,
    Patch, PatchAxis,
};
use nhberry_core::model::{
    berry_connection, berry_phase, dynamical_phase, frame, hamiltonian, swap_operator,
};
use nhberry_core::numerics::{
    central_diff, principal_sqrt, quadrature, CMat2, CVec2, Complex, FD_STEP,
};
use nhberry_core::protocols::{
    estimate_theta_im_gate, estimate_theta_im_ratio, estimate_theta_r, gate_transfer_closed_form,
};
use nhberry_core::{Branch, Direction, DriveParams};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex> {
    (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(re, im)| Complex::new(re, im))
}

fn unit_complex() -> impl Strategy<Value = Complex> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex::new(re, im))
}

fn drive() -> impl Strategy<Value = DriveParams> {
    (0.1f64..30.0, -30.0f64..30.0, 0.0f64..3.0).prop_filter_map(
        "too close to the exceptional point",
        |(j, d, g)| {
            DriveParams::new(j, d, g)
                .ok()
                .filter(|p| p.delta_split().norm() > 1e-3)
        },
    )
}

fn branches() -> [Branch; 2] {
    [Branch::Plus, Branch::Minus]
}

fn mat2() -> impl Strategy<Value = CMat2> {
    [
        unit_complex(),
        unit_complex(),
        unit_complex(),
        unit_complex(),
    ]
    .prop_map(|[a, b, c, d]| CMat2::new([[a, b], [c, d]]))
}

fn vec2() -> impl Strategy<Value = CVec2> {
    [unit_complex(), unit_complex()].prop_map(CVec2::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn principal_sqrt_squares_back_with_nonnegative_real_part(z in complex()) {
        let w = principal_sqrt(z);
        prop_assert!(w.re >= 0.0);
        if w.re == 0.0 {
            prop_assert!(w.im >= 0.0);
        }
        prop_assert!((w * w - z).norm() <= 1e-12 * z.norm().max(1e-300));
    }
}

proptest! {
    #[test]
    fn complex_field_axioms(a in complex(), b in complex(), c in complex()) {
        let scale = (a.norm() + 1.0) * (b.norm() + 1.0) * (c.norm() + 1.0);
        prop_assert!(((a * b) * c - a * (b * c)).norm() <= 1e-14 * scale);
        prop_assert!((a * (b + c) - (a * b + a * c)).norm() <= 1e-14 * scale);
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a * b, b * a);
    }

    #[test]
    fn products_associate(a in mat2(), b in mat2(), c in mat2(), v in vec2()) {
        let left = (a * b) * c;
        let right = a * (b * c);
        prop_assert!((left - right).norm() <= 1e-12 * (left.norm() + 1.0));
        let mv1 = (a * b).mul_vec(&v);
        let mv2 = a.mul_vec(&b.mul_vec(&v));
        prop_assert!((mv1 - mv2).norm() <= 1e-12 * (mv1.norm() + 1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigensystem_invariants(p in drive(), phi in 0.0f64..(2.0 * PI)) {
        let fr = frame(&p, phi).unwrap();
        let h = hamiltonian(&p, phi);
        for b in branches() {
            let (r, l, e) = (fr.right(b), fr.left(b), fr.energy(b));
            prop_assert!((h.mul_vec(&r) - r.scale(e)).norm() < 1e-10);
            prop_assert!((l.row_mul(&h) - l.scale(e)).norm() < 1e-10);
            prop_assert!((r.norm_sq() - 1.0).abs() < 1e-15);
            prop_assert!((l.contract(&fr.right(b.other()))).norm() < 1e-10);
        }
        if p.delta > 0.0 {
            prop_assert!(fr.e_minus.im >= fr.e_plus.im);
        }
    }

    #[test]
    fn connection_matches_finite_difference(p in drive(), phi in 0.0f64..(2.0 * PI)) {
        let fr = frame(&p, phi).unwrap();
        for b in branches() {
            let l = fr.left(b);
            let comp = |k: usize| central_diff(|x| frame(&p, x).unwrap().right(b)[k], phi, FD_STEP);
            let dr = CVec2::new([comp(0), comp(1)]);
            let fd = Complex::new(0.0, 1.0) * l.contract(&dr) / fr.overlap(b);
            prop_assert!((fd - berry_connection(&p, b).unwrap()).norm() < 1e-6);
        }
    }
}

proptest! {
    #[test]
    fn berry_phase_identities(p in drive(), f in 0.05f64..1.0) {
        for b in branches() {
            let plus = berry_phase(&p, b, Direction::Plus, 1.0).unwrap().to_complex();
            let minus = berry_phase(&p, b, Direction::Minus, 1.0).unwrap().to_complex();
            let other = berry_phase(&p, b.other(), Direction::Plus, 1.0).unwrap().to_complex();
            prop_assert!((plus + minus).norm() < 1e-12);
            prop_assert!((plus + other - Complex::new(2.0 * PI, 0.0)).norm() < 1e-12);
            let a = berry_connection(&p, b).unwrap();
            let q = quadrature(|_| a, 0.0, 2.0 * PI * f, 16).unwrap();
            let open = berry_phase(&p, b, Direction::Plus, f).unwrap().to_complex();
            prop_assert!((q - open).norm() < 1e-8);
        }
    }

    #[test]
    fn hermitian_limit_phase_is_real(j in 0.1f64..30.0, d in -30.0f64..30.0) {
        let p = DriveParams::new(j, d, 0.0).unwrap();
        for b in branches() {
            for dir in [Direction::Plus, Direction::Minus] {
                let th = berry_phase(&p, b, dir, 1.0).unwrap();
                prop_assert!(th.imag_part.abs() < 1e-12);
                let expected = PI * dir.eta() * (1.0 - b.sign() * d / (4.0 * j * j + d * d).sqrt());
                prop_assert!((th.real_part - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn swap_squares_to_minus_identity_on_eigenvectors(p in drive(), phi in 0.0f64..(2.0 * PI)) {
        let fr = frame(&p, phi).unwrap();
        let m = swap_operator(&p, phi).unwrap();
        prop_assert!((m.mul_vec(&fr.r_plus) - fr.r_minus).norm() < 1e-9);
        prop_assert!((m.mul_vec(&fr.r_minus) + fr.r_plus).norm() < 1e-9);
        for b in branches() {
            let r = fr.right(b);
            prop_assert!((m.mul_vec(&m.mul_vec(&r)) + r).norm() < 1e-9);
        }
    }

    #[test]
    fn mixing_angle_round_trip(p in drive().prop_filter("needs Gamma > 0", |p| p.gamma > 1e-2)) {
        let a = alpha_from_params(&p).unwrap();
        prop_assert!(a.alpha_i > 0.0 && (0.0..2.0 * PI).contains(&a.alpha_r));
        prop_assert!((a.cos() - p.eps_over_delta().unwrap()).norm() < 1e-9);
        let back = params_from_alpha(a, p.gamma).unwrap();
        let scale = 1.0 + p.j.abs() + p.delta.abs();
        prop_assert!((back.j - p.j).abs() < 1e-10 * scale);
        prop_assert!((back.delta - p.delta).abs() < 1e-10 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn stokes_holds_on_random_rectangles(
        alpha_axis in any::<bool>(),
        fixed in 0.1f64..1.5,
        a0 in 0.1f64..1.5,
        width in 0.05f64..1.5,
        phi0 in 0.0f64..3.0,
        dphi in 0.1f64..(2.0 * PI),
    ) {
        let patch = Patch {
            axis: if alpha_axis { PatchAxis::AlphaR } else { PatchAxis::AlphaI },
            fixed,
            a0,
            a1: a0 + width,
            phi0,
            phi1: phi0 + dphi,
            resolution: 32,
        };
        let path = patch.boundary(4000).unwrap();
        for b in branches() {
            let s = surface_integral_phase(&patch, b).unwrap().to_complex();
            let l = line_integral_phase(&path, b).phase.to_complex();
            prop_assert!((s - l).norm() < 1e-6, "{s} vs {l}");
        }
    }
}

proptest! {
    #[test]
    fn estimators_invert_their_forward_models(th in -0.78f64..0.78, th_im in -0.5f64..0.5, lam in 0.0f64..3.0, frame_phase in -3.0f64..3.0) {
        // a+/a- = -exp(-4 i th); the cross term also carries the frame phase.
        let w = Complex::from_polar(1.0, PI - 4.0 * th + frame_phase);
        prop_assert!((estimate_theta_r(2.0 * w.re, -2.0 * w.im, frame_phase) - th).abs() < 1e-12);
        let pp = (-2.0 * (lam + th_im)).exp();
        let pm = (-2.0 * (lam - th_im)).exp();
        prop_assert!((estimate_theta_im_ratio(pp, pm).unwrap() - th_im).abs() < 1e-12);
        let out = gate_transfer_closed_form(0.5, th_im);
        prop_assert!((estimate_theta_im_gate(out).unwrap() - th_im).abs() < 1e-12);
    }

    #[test]
    fn gate_transfer_fixes_endpoints_and_is_monotone(th in -0.5f64..0.5, p in 0.0f64..1.0, q in 0.0f64..1.0) {
        prop_assert_eq!(gate_transfer_closed_form(0.0, th), 0.0);
        prop_assert_eq!(gate_transfer_closed_form(1.0, th), 1.0);
        prop_assert!((gate_transfer_closed_form(p, 0.0) - p).abs() < 1e-15);
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        prop_assert!(gate_transfer_closed_form(lo, th) <= gate_transfer_closed_form(hi, th) + 1e-15);
        prop_assert!((gate_transfer_closed_form(p, th) + gate_transfer_closed_form(1.0 - p, -th) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dynamical_phase_is_minus_energy_times_duration(p in drive(), t in 0.0f64..10.0) {
        let fr = frame(&p, 0.0).unwrap();
        for b in branches() {
            let lam = dynamical_phase(&p, b, t).unwrap().to_complex();
            prop_assert!((lam + fr.energy(b) * t).norm() < 1e-12 * (1.0 + t * fr.energy(b).norm()));
        }
    }
}

#[test]
fn hermitian_mixing_angle_boundary_is_refused() {
    assert!(params_from_alpha(MixingAngle::new(1.0, 0.0), 0.426).is_err());
}
