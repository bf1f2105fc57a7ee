//! Closed-form boundary-layer correctors and their first two derivatives.
//!
//! Every profile returns exact zeros, derivatives included, once its
//! exponential underflows, so `eps^-2`-scaled slots never produce `0 * inf`.

use crate::error::{Error, Result};
use crate::forcing::Forcing;

/// `(v, v', v'')` of a corrector profile at one point.
pub type Jet = (f64, f64, f64);

/// Number of scan points used to check the Burgers limit-solution condition.
pub const BURGERS_SCAN_POINTS: usize = 1001;

/// Threshold on `|1 + u0(0)|` below which the Burgers layer amplitude is
/// treated as zero.
pub const DEGENERATE_AMPLITUDE: f64 = 1e-12;

/// Outflow layer `e^{-x/eps}` at `x = 0`, solving `-eps v'' - v' = 0`.
#[inline]
pub fn exp_layer_jet(eps: f64, x: f64) -> Jet {
    let v = (-x / eps).exp();
    if v == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    (v, -v / eps, v / (eps * eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Reaction-diffusion layers `e^{-x/sqrt(eps)}` (left) and
/// `e^{-(1-x)/sqrt(eps)}` (right), solving `-eps v'' + v = 0`.
#[inline]
pub fn sqrt_layer_jet(eps: f64, x: f64, side: Side) -> Jet {
    let s = eps.sqrt();
    let dist = match side {
        Side::Left => x,
        Side::Right => 1.0 - x,
    };
    let v = (-dist / s).exp();
    if v == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let d1 = v / s;
    match side {
        Side::Left => (v, -d1, v / eps),
        Side::Right => (v, d1, v / eps),
    }
}

/// Burgers corrector solving `-eps phi' + u00 phi + phi^2 / 2 = 0`,
/// `phi(0) = -(1 + u00)`, with `u00 = u0(0) < 0`.
///
/// The value uses the closed form; derivatives follow from the ODE itself.
pub fn burgers_phi_jet(eps: f64, u00: f64, x: f64) -> Jet {
    let amp = -(1.0 + u00);
    let (t, _, _) = normalized_phi(eps, u00, x);
    let phi = amp * t;
    if phi == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let d1 = (u00 * phi + 0.5 * phi * phi) / eps;
    let d2 = d1 * (u00 + phi) / eps;
    (phi, d1, d2)
}

/// `phi / phi(0)` and its derivatives. Errors when the amplitude
/// `|1 + u00|` is at most [`DEGENERATE_AMPLITUDE`].
pub fn burgers_phi_tilde_jet(eps: f64, u00: f64, x: f64) -> Result<Jet> {
    let amp = 1.0 + u00;
    if amp.abs() <= DEGENERATE_AMPLITUDE {
        return Err(Error::DegenerateCorrector(amp.abs()));
    }
    Ok(normalized_phi(eps, u00, x))
}

// Written as -2 u00 E / (-2 u00 + (1 + u00)(1 - E)) so the value at x = 0 is
// exactly 1.
fn normalized_phi(eps: f64, u00: f64, x: f64) -> Jet {
    let arg = u00 * x / eps;
    let e = arg.exp();
    if e == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let one_minus_e = -arg.exp_m1();
    let phi0 = -(1.0 + u00);
    let t = -2.0 * u00 * e / (-2.0 * u00 + (1.0 + u00) * one_minus_e);
    let d1 = t * (u00 + 0.5 * phi0 * t) / eps;
    let d2 = d1 * (u00 + phi0 * t) / eps;
    (t, d1, d2)
}

/// Limit solution of the stationary Burgers problem with `u(1) = -1`:
/// `u0(x) = -sqrt(2 int_1^x f + 1)`.
#[derive(Debug, Clone)]
pub struct BurgersLimit {
    forcing: Forcing,
    u00: f64,
}

impl BurgersLimit {
    /// Validates `2 int_1^x f + 1 > 0` on a uniform scan of `[0, 1]`.
    pub fn new(forcing: Forcing) -> Result<Self> {
        for i in 0..BURGERS_SCAN_POINTS {
            let x = i as f64 / (BURGERS_SCAN_POINTS - 1) as f64;
            let radicand = 2.0 * forcing.integral(1.0, x) + 1.0;
            if radicand.is_nan() || radicand <= 0.0 {
                return Err(Error::DataConditionViolation { x, radicand });
            }
        }
        let u00 = -(2.0 * forcing.integral(1.0, 0.0) + 1.0).sqrt();
        Ok(Self { forcing, u00 })
    }

    pub fn u0(&self, x: f64) -> f64 {
        -(2.0 * self.forcing.integral(1.0, x) + 1.0).max(0.0).sqrt()
    }

    /// `u0(0)`.
    pub fn u0_at_0(&self) -> f64 {
        self.u00
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }
}

/// Standalone form of [`BurgersLimit::u0`], including the condition check.
pub fn burgers_u0(forcing: &Forcing, x: f64) -> Result<f64> {
    Ok(BurgersLimit::new(forcing.clone())?.u0(x))
}

/// A corrector profile with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerProfile {
    OutflowExp { eps: f64 },
    LeftSqrtExp { eps: f64 },
    RightSqrtExp { eps: f64 },
    BurgersPhi { eps: f64, u00: f64 },
}

impl LayerProfile {
    pub fn validate(&self) -> Result<()> {
        let eps = self.eps();
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        if let LayerProfile::BurgersPhi { u00, .. } = self {
            if u00.is_nan() || *u00 >= 0.0 {
                return Err(Error::InvalidArgument(format!("Burgers corrector needs u0(0) < 0, got {u00}")));
            }
        }
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        match *self {
            LayerProfile::OutflowExp { eps }
            | LayerProfile::LeftSqrtExp { eps }
            | LayerProfile::RightSqrtExp { eps }
            | LayerProfile::BurgersPhi { eps, .. } => eps,
        }
    }

    /// Thickness scale of the layer.
    pub fn scale(&self) -> f64 {
        match *self {
            LayerProfile::OutflowExp { eps } => eps,
            LayerProfile::LeftSqrtExp { eps } | LayerProfile::RightSqrtExp { eps } => eps.sqrt(),
            LayerProfile::BurgersPhi { eps, u00 } => eps / u00.abs(),
        }
    }

    pub fn jet(&self, x: f64) -> Jet {
        match *self {
            LayerProfile::OutflowExp { eps } => exp_layer_jet(eps, x),
            LayerProfile::LeftSqrtExp { eps } => sqrt_layer_jet(eps, x, Side::Left),
            LayerProfile::RightSqrtExp { eps } => sqrt_layer_jet(eps, x, Side::Right),
            LayerProfile::BurgersPhi { eps, u00 } => burgers_phi_jet(eps, u00, x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn exp_layer_boundary_and_underflow() {
        let eps = 0.02;
        assert_eq!(exp_layer_jet(eps, 0.0), (1.0, -1.0 / eps, 1.0 / (eps * eps)));
        assert_eq!(exp_layer_jet(1e-4, 0.5), (0.0, 0.0, 0.0));
        let (_, d1, d2) = exp_layer_jet(0.1, 0.3);
        assert!((-0.1 * d2 - d1).abs() < 1e-12);
    }

    #[test]
    fn sqrt_layers() {
        assert_eq!(sqrt_layer_jet(0.01, 0.0, Side::Left).0, 1.0);
        assert_eq!(sqrt_layer_jet(0.01, 1.0, Side::Right).0, 1.0);
        for side in [Side::Left, Side::Right] {
            let (v, _, d2) = sqrt_layer_jet(0.01, 0.2, side);
            assert!((-0.01 * d2 + v).abs() <= 1e-12);
            let d1 = sqrt_layer_jet(0.01, 0.2, side).1;
            let fd1 = fd(|t| sqrt_layer_jet(0.01, t, side).0, 0.2, 1e-6);
            assert!((d1 - fd1).abs() <= 1e-7 * d1.abs().max(1.0));
        }
    }

    #[test]
    fn burgers_limit_for_constant_forcing() {
        let lim = BurgersLimit::new(Forcing::Const(-1.0)).unwrap();
        assert_eq!(lim.u0(1.0), -1.0);
        assert!((lim.u0(0.0) + 3f64.sqrt()).abs() < 1e-15);
        assert!((lim.u0_at_0() + 1.7320508).abs() < 1e-7);
        let zero = BurgersLimit::new(Forcing::Const(0.0)).unwrap();
        assert!((0..=10).all(|i| zero.u0(i as f64 / 10.0) == -1.0));
    }

    #[test]
    fn burgers_limit_rejects_bad_forcing() {
        // 2 * (x - 1) + 1 vanishes at x = 1/2
        match BurgersLimit::new(Forcing::Const(1.0)) {
            Err(Error::DataConditionViolation { x, .. }) => assert!(x <= 0.5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(burgers_u0(&Forcing::Const(1.0), 0.9).is_err());
    }

    #[test]
    fn burgers_phi_boundary_value() {
        let u00 = -3f64.sqrt();
        let (p0, _, _) = burgers_phi_jet(0.05, u00, 0.0);
        assert!((p0 - (3f64.sqrt() - 1.0)).abs() < 1e-15);
        for &u in &[-0.3, -2.5, -1.2] {
            assert!((burgers_phi_jet(0.3, u, 0.0).0 + 1.0 + u).abs() < 1e-15);
        }
    }

    #[test]
    fn burgers_phi_derivative_vs_fd() {
        let u00 = -3f64.sqrt();
        let (_, d1, d2) = burgers_phi_jet(0.05, u00, 0.1);
        let fd1 = fd(|t| burgers_phi_jet(0.05, u00, t).0, 0.1, 1e-6);
        assert!((d1 - fd1).abs() <= 1e-6 * d1.abs());
        let fd2 = fd(|t| burgers_phi_jet(0.05, u00, t).1, 0.1, 1e-6);
        assert!((d2 - fd2).abs() <= 1e-6 * d2.abs());
    }

    #[test]
    fn phi_tilde_contract() {
        let u00 = -3f64.sqrt();
        assert_eq!(burgers_phi_tilde_jet(0.3, u00, 0.0).unwrap().0, 1.0);
        assert_eq!(burgers_phi_tilde_jet(1e-4, u00, 0.5).unwrap(), (0.0, 0.0, 0.0));
        let (t, d1, _) = burgers_phi_tilde_jet(0.1, u00, 0.2).unwrap();
        let phi0 = 3f64.sqrt() - 1.0;
        let ratio = 0.1 * d1 / (u00 * t + phi0 * t * t / 2.0);
        assert!((ratio - 1.0).abs() < 1e-10);
        assert!(matches!(burgers_phi_tilde_jet(0.1, -1.0, 0.2), Err(Error::DegenerateCorrector(_))));
    }

    #[test]
    fn profile_validation() {
        assert!(LayerProfile::OutflowExp { eps: 0.0 }.validate().is_err());
        assert!(LayerProfile::BurgersPhi { eps: 0.1, u00: 0.5 }.validate().is_err());
        assert!(LayerProfile::BurgersPhi { eps: 0.1, u00: -1.5 }.validate().is_ok());
    }
}
