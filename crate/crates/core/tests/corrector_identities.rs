use blpinn_core::correctors::{
    burgers_phi_jet, burgers_phi_tilde_jet, exp_layer_jet, sqrt_layer_jet, BurgersLimit, LayerProfile, Side,
};
use blpinn_core::reference::{exact_cd, l2_distance, LayerLocation};
use blpinn_core::{Forcing, ProblemKind, ProblemSpec};

const EPS_SET: [f64; 3] = [1.0, 0.1, 0.01];

fn sample_points() -> impl Iterator<Item = f64> {
    (0..50).map(|i| i as f64 / 49.0)
}

#[test]
fn outflow_profile_solves_its_ode() {
    for eps in EPS_SET {
        for x in sample_points() {
            let (_, d1, d2) = exp_layer_jet(eps, x);
            assert!((-eps * d2 - d1).abs() <= 1e-10, "eps={eps} x={x}");
        }
    }
}

#[test]
fn sqrt_profiles_solve_their_ode() {
    for eps in EPS_SET {
        for side in [Side::Left, Side::Right] {
            for x in sample_points() {
                let (v, _, d2) = sqrt_layer_jet(eps, x, side);
                assert!((-eps * d2 + v).abs() <= 1e-10);
            }
        }
    }
    let (v, _, d2) = sqrt_layer_jet(0.01, 0.2, Side::Left);
    assert!((-0.01 * d2 + v).abs() <= 1e-12);
}

#[test]
fn burgers_profile_solves_its_ode() {
    let u00 = -3f64.sqrt();
    for eps in EPS_SET {
        for x in sample_points() {
            let (phi, d1, d2) = burgers_phi_jet(eps, u00, x);
            assert!((-eps * d2 + (u00 + phi) * d1).abs() <= 1e-10, "eps={eps} x={x}");
        }
    }
}

#[test]
fn profiles_vanish_beyond_forty_scales() {
    for eps in [1e-3, 1e-4, 1e-6] {
        let u00 = -3f64.sqrt();
        let profiles = [
            (LayerProfile::OutflowExp { eps }, false),
            (LayerProfile::LeftSqrtExp { eps }, false),
            (LayerProfile::RightSqrtExp { eps }, true),
            (LayerProfile::BurgersPhi { eps, u00 }, false),
        ];
        for (profile, right) in profiles {
            let d = 40.0 * profile.scale();
            if d >= 1.0 {
                continue;
            }
            let x = if right { 1.0 - d } else { d };
            // e^-40 is below half an ulp of 1
            let (v, d1, d2) = profile.jet(x);
            let s = profile.scale();
            assert_eq!(1.0 + v, 1.0, "{profile:?}");
            assert_eq!(1.0 + s * d1.abs(), 1.0);
            assert_eq!(1.0 + s * s * d2.abs(), 1.0);
        }
    }
}

#[test]
fn normalized_burgers_profile() {
    let u00 = -3f64.sqrt();
    assert_eq!(burgers_phi_tilde_jet(0.3, u00, 0.0).unwrap().0, 1.0);
    assert_eq!(burgers_phi_tilde_jet(1e-4, u00, 0.5).unwrap().0, 0.0);
    let (t, d1, _) = burgers_phi_tilde_jet(0.1, u00, 0.2).unwrap();
    let phi0 = -(1.0 + u00);
    let ratio = 0.1 * d1 / (u00 * t + phi0 * t * t / 2.0);
    assert!((ratio - 1.0).abs() <= 1e-10);
    let (p0, _, _) = burgers_phi_jet(0.02, u00, 0.0);
    assert!((p0 - 0.7320508).abs() < 1e-7);
}

#[test]
fn burgers_limit_values() {
    let lim = BurgersLimit::new(Forcing::Const(-1.0)).unwrap();
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        assert!((lim.u0(x) + (3.0 - 2.0 * x).sqrt()).abs() < 1e-15);
        assert!(lim.u0(x) < 0.0);
    }
    let c = BurgersLimit::new(Forcing::Const(-0.25)).unwrap();
    assert!((c.u0(0.0) + 1.5f64.sqrt()).abs() < 1e-15);
    // 2 (sin x - sin 1) + 1 < 0 at x = 0
    assert!(BurgersLimit::new(Forcing::Cos).is_err());
}

#[test]
fn convection_diffusion_corrector_rates() {
    // ||u - (u0 + phi)|| / eps and ||u - u0|| / sqrt(eps) stay bounded
    let mut first = Vec::new();
    let mut second = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let spec = ProblemSpec::new(ProblemKind::SingularCD, eps, Forcing::Const(1.0)).unwrap();
        let layers = LayerLocation::Left(eps);
        let a = l2_distance(|x| exact_cd(eps, x), |x| spec.composite_solution(x).unwrap(), 8001, layers).unwrap();
        let b = l2_distance(|x| exact_cd(eps, x), |x| spec.limit_solution(x).unwrap(), 8001, layers).unwrap();
        first.push(a / eps);
        second.push(b / eps.sqrt());
    }
    assert!(first.iter().all(|r| *r <= 5.0), "{first:?}");
    assert!(second.iter().all(|r| *r <= 5.0), "{second:?}");
    // the sqrt(eps) rate is sharp: the ratio does not decay with eps
    assert!(second[2] > 0.5 * second[0], "{second:?}");
}
