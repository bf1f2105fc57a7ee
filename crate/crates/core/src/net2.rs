//! Two-layer sigmoid network `u(x) = sum_j w2_j * sigma(w1_j * x + b1_j)`.
//!
//! Spatial derivatives and parameter gradients are written out in closed form
//! from the sigmoid identities `s' = s(1-s)`, `s'' = s(1-s)(1-2s)` and
//! `s''' = s(1-s)(1-6s+6s^2)`. Nothing here depends on an autodiff engine.
//!
//! Parameters are stored as one flat vector laid out `[w1 | b1 | w2]`, which is
//! also the layout of every gradient produced by this module.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default multiplier applied to the input weights at initialization.
pub const DEFAULT_INIT_SCALE: f64 = 1.0;

/// Logistic sigmoid. Uses the `e^x / (1 + e^x)` branch for negative arguments
/// so large `|x|` saturates instead of overflowing.
/// `(sigma(x), 1 - sigma(x))`, each to full relative precision.
#[inline]
fn sigmoid_pair(x: f64) -> (f64, f64) {
    // exp of a non-positive argument never overflows
    let e = (-x.abs()).exp();
    let near_one = 1.0 / (1.0 + e);
    let near_zero = e / (1.0 + e);
    if x >= 0.0 {
        (near_one, near_zero)
    } else {
        (near_zero, near_one)
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    sigmoid_pair(x).0
}

/// `(s, s', s'')` from a single evaluation of the sigmoid.
#[inline]
pub fn sigmoid_jet(x: f64) -> (f64, f64, f64) {
    let (s, c) = sigmoid_pair(x);
    let (d1, d2, _) = derivs(s, c);
    (s, d1, d2)
}

/// Derivatives one to three from `s = sigma(x)` and `c = 1 - s`.
#[inline]
fn derivs(s: f64, c: f64) -> (f64, f64, f64) {
    let d1 = s * c;
    let d2 = d1 * (c - s);
    let d3 = d1 * (1.0 - 6.0 * s * c);
    (d1, d2, d3)
}

/// Third derivative of the sigmoid.
#[inline]
pub fn sigmoid_d3(x: f64) -> f64 {
    let (s, c) = sigmoid_pair(x);
    derivs(s, c).2
}

/// Value and first two spatial derivatives of the network at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NetJet {
    pub u: f64,
    pub ux: f64,
    pub uxx: f64,
}

/// Trainable parameters of the two-layer network. There is no output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    n1: usize,
    flat: Vec<f64>,
}

impl NetParams {
    pub fn new(w1: Vec<f64>, b1: Vec<f64>, w2: Vec<f64>) -> Result<Self> {
        let n1 = w1.len();
        if n1 == 0 {
            return Err(Error::InvalidArgument("hidden width must be at least 1".into()));
        }
        if b1.len() != n1 || w2.len() != n1 {
            return Err(Error::InvalidArgument(format!(
                "parameter length mismatch: w1={}, b1={}, w2={}",
                n1,
                b1.len(),
                w2.len()
            )));
        }
        let mut flat = w1;
        flat.extend(b1);
        flat.extend(w2);
        Self::from_flat(n1, flat)
    }

    /// Builds parameters from the `[w1 | b1 | w2]` layout.
    pub fn from_flat(n1: usize, flat: Vec<f64>) -> Result<Self> {
        if n1 == 0 || flat.len() != 3 * n1 {
            return Err(Error::InvalidArgument(format!(
                "flat parameter vector of length {} does not match width {}",
                flat.len(),
                n1
            )));
        }
        if let Some(bad) = flat.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite parameter {bad}")));
        }
        Ok(Self { n1, flat })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn w1(&self) -> &[f64] {
        &self.flat[..self.n1]
    }

    pub fn b1(&self) -> &[f64] {
        &self.flat[self.n1..2 * self.n1]
    }

    pub fn w2(&self) -> &[f64] {
        &self.flat[2 * self.n1..]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.flat
    }

    /// Mutable access to the flat vector. Callers are responsible for keeping
    /// entries finite.
    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    pub fn with_w2_scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        let n = self.n1;
        out.flat[2 * n..].iter_mut().for_each(|w| *w *= a);
        out
    }

    /// Network value and spatial derivatives, summed in unit order.
    pub fn eval_jet(&self, x: f64) -> NetJet {
        let (w1, b1, w2) = (self.w1(), self.b1(), self.w2());
        let mut jet = NetJet::default();
        for j in 0..self.n1 {
            let (s, d1, d2) = sigmoid_jet(w1[j] * x + b1[j]);
            jet.u += w2[j] * s;
            jet.ux += w2[j] * w1[j] * d1;
            jet.uxx += w2[j] * w1[j] * w1[j] * d2;
        }
        jet
    }

    /// Network value only.
    pub fn eval(&self, x: f64) -> f64 {
        let (w1, b1, w2) = (self.w1(), self.b1(), self.w2());
        (0..self.n1).map(|j| w2[j] * sigmoid(w1[j] * x + b1[j])).sum()
    }

    /// Like [`eval_jet`](Self::eval_jet) but stores the hidden activations in
    /// `act` so a following [`accumulate_vjp`](Self::accumulate_vjp) at the
    /// same `x` can reuse them.
    pub(crate) fn eval_jet_cached(&self, x: f64, act: &mut [(f64, f64)]) -> NetJet {
        let (w1, b1, w2) = (self.w1(), self.b1(), self.w2());
        let mut jet = NetJet::default();
        for j in 0..self.n1 {
            let (s, c) = sigmoid_pair(w1[j] * x + b1[j]);
            act[j] = (s, c);
            let (d1, d2, _) = derivs(s, c);
            jet.u += w2[j] * s;
            jet.ux += w2[j] * w1[j] * d1;
            jet.uxx += w2[j] * w1[j] * w1[j] * d2;
        }
        jet
    }

    /// Adds `cu * du/dtheta + cux * dux/dtheta + cuxx * duxx/dtheta` into
    /// `grad` (flat layout). `act` must hold the activations at `x`.
    pub(crate) fn accumulate_vjp(
        &self,
        x: f64,
        act: &[(f64, f64)],
        (cu, cux, cuxx): (f64, f64, f64),
        grad: &mut [f64],
    ) {
        let n = self.n1;
        let (w1, w2) = (self.w1(), self.w2());
        let (gw1, rest) = grad.split_at_mut(n);
        let (gb1, gw2) = rest.split_at_mut(n);
        for j in 0..n {
            let (s, sc) = act[j];
            let (d1, d2, d3) = derivs(s, sc);
            let a = w1[j];
            let c = w2[j];
            gw2[j] += cu * s + cux * a * d1 + cuxx * a * a * d2;
            // d/db of (c*s, c*a*d1, c*a^2*d2)
            let db = c * (cu * d1 + cux * a * d2 + cuxx * a * a * d3);
            gb1[j] += db;
            // d/dw1 = x * d/db plus the explicit dependence on a in ux and uxx
            gw1[j] += x * db + c * (cux * d1 + cuxx * 2.0 * a * d2);
        }
    }

    /// Parameter gradients of `u`, `ux` and `uxx` at `x`.
    pub fn param_grad_jet(&self, x: f64) -> ParamGradJet {
        let n = self.n1;
        let mut act = vec![(0.0, 0.0); n];
        self.eval_jet_cached(x, &mut act);
        let mut out = ParamGradJet {
            u: vec![0.0; 3 * n],
            ux: vec![0.0; 3 * n],
            uxx: vec![0.0; 3 * n],
        };
        self.accumulate_vjp(x, &act, (1.0, 0.0, 0.0), &mut out.u);
        self.accumulate_vjp(x, &act, (0.0, 1.0, 0.0), &mut out.ux);
        self.accumulate_vjp(x, &act, (0.0, 0.0, 1.0), &mut out.uxx);
        out
    }

    /// Gradient of `u(x)` only, flat layout.
    pub fn value_grad(&self, x: f64) -> Vec<f64> {
        let mut act = vec![(0.0, 0.0); self.n1];
        self.eval_jet_cached(x, &mut act);
        let mut g = vec![0.0; 3 * self.n1];
        self.accumulate_vjp(x, &act, (1.0, 0.0, 0.0), &mut g);
        g
    }
}

/// Gradients of the three jet components, each in the flat `[w1 | b1 | w2]` layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradJet {
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub uxx: Vec<f64>,
}

/// Seeded initialization with the default input-weight scale.
pub fn init_params(n1: usize, seed: u64) -> Result<NetParams> {
    init_params_scaled(n1, seed, DEFAULT_INIT_SCALE)
}

/// `w1, b1 ~ U[-1, 1]` with `w1` then multiplied by `scale`; `w2 ~ U[-0.1, 0.1]`.
pub fn init_params_scaled(n1: usize, seed: u64, scale: f64) -> Result<NetParams> {
    if n1 == 0 {
        return Err(Error::InvalidArgument("hidden width must be at least 1".into()));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidArgument(format!("init scale must be positive, got {scale}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w1: Vec<f64> = (0..n1).map(|_| scale * rng.gen_range(-1.0..=1.0)).collect();
    let b1: Vec<f64> = (0..n1).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let w2: Vec<f64> = (0..n1).map(|_| rng.gen_range(-0.1..=0.1)).collect();
    NetParams::new(w1, b1, w2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn sigmoid_fixed_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(750.0), 1.0);
        let lo = sigmoid(-750.0);
        assert_eq!(lo, 0.0);
        assert!(!lo.is_nan());
    }

    #[test]
    fn sigmoid_jet_values() {
        assert_eq!(sigmoid_jet(0.0), (0.5, 0.25, 0.0));
        let (s, d1, d2) = sigmoid_jet(3f64.ln());
        assert!((s - 0.75).abs() < 1e-15);
        assert!((d1 - 0.1875).abs() < 1e-15);
        assert!((d2 + 0.09375).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_derivatives_match_fd() {
        for &x in &[-6.0, -2.5, -0.3, 0.0, 0.7, 3.1, 9.0] {
            let (_, d1, d2) = sigmoid_jet(x);
            let fd1 = fd_central(sigmoid, x, 1e-5);
            assert!((d1 - fd1).abs() <= 1e-8 * d1.abs().max(1e-3), "x={x}");
            let fd2 = fd_central(|t| sigmoid_jet(t).1, x, 1e-5);
            assert!((d2 - fd2).abs() <= 1e-8, "x={x}");
            let fd3 = fd_central(|t| sigmoid_jet(t).2, x, 1e-5);
            assert!((sigmoid_d3(x) - fd3).abs() <= 1e-8, "x={x}");
        }
    }

    #[test]
    fn zero_output_layer_gives_zero_jet() {
        let p = init_params(7, 3).unwrap().with_w2_scaled(0.0);
        assert_eq!(p.eval_jet(0.4), NetJet::default());
    }

    #[test]
    fn single_flat_unit() {
        let p = NetParams::new(vec![0.0], vec![0.0], vec![2.0]).unwrap();
        assert_eq!(p.eval_jet(0.37), NetJet { u: 1.0, ux: 0.0, uxx: 0.0 });
    }

    #[test]
    fn w2_grad_is_activation() {
        let p = init_params(5, 11).unwrap();
        let x = 0.3;
        let g = p.param_grad_jet(x);
        for j in 0..5 {
            let z = p.w1()[j] * x + p.b1()[j];
            let (s, d1, _) = sigmoid_jet(z);
            assert!((g.u[10 + j] - s).abs() < 1e-15);
            assert!((g.ux[10 + j] - p.w1()[j] * d1).abs() < 1e-14);
        }
    }

    #[test]
    fn init_contract() {
        let a = init_params(50, 0).unwrap();
        let b = init_params(50, 0).unwrap();
        assert_eq!(a, b);
        assert!(a.w1().iter().all(|w| w.abs() <= DEFAULT_INIT_SCALE));
        assert!(a.b1().iter().all(|w| w.abs() <= 1.0));
        assert!(a.w2().iter().all(|w| w.abs() <= 0.1));
        assert_ne!(a, init_params(50, 1).unwrap());
        assert!(init_params(0, 0).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(NetParams::new(vec![1.0], vec![1.0, 2.0], vec![0.0]).is_err());
        assert!(NetParams::new(vec![], vec![], vec![]).is_err());
        assert!(NetParams::new(vec![f64::NAN], vec![0.0], vec![0.0]).is_err());
    }
}
