//! Problem catalogue: boundary value problems, their limit solutions, the
//! plain and corrector-enriched ansatz families, and pointwise residuals.
//!
//! Residuals of enriched ansatzes are evaluated in expanded form, where the
//! corrector's own equation has been used to cancel the `1/eps` and `1/eps^2`
//! terms. Every residual is returned together with its partial derivatives
//! with respect to the network jet `(u, ux, uxx)` and the boundary evaluations
//! `u(0)`, `u(1)`, which is all the training code needs for backpropagation.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::correctors::{burgers_phi_tilde_jet, exp_layer_jet, sqrt_layer_jet, BurgersLimit, Jet, Side};
use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::net2::{NetJet, NetParams};

/// RK4 steps used for the nonlinear convection-diffusion limit solution.
pub const NCD_LIMIT_STEPS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// `u_x = f` (coefficients `(0, -1, 0)`).
    Hyperbolic,
    /// `-u_xx - u_x = f`.
    RegularCD,
    /// `-u_xx + u = f`.
    RegularRD,
    /// `-eps u_xx - u_x = f`, layer at `x = 0`.
    SingularCD,
    /// `-eps u_xx + u = f`, layers at both ends.
    SingularRD,
    /// `-eps u_xx - u_x + u^3 = f`, layer at `x = 0`.
    SingularNCD,
    /// `-eps u_xx + u u_x = f` with `u(0) = u(1) = -1`.
    Burgers,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Hyperbolic,
        ProblemKind::RegularCD,
        ProblemKind::RegularRD,
        ProblemKind::SingularCD,
        ProblemKind::SingularRD,
        ProblemKind::SingularNCD,
        ProblemKind::Burgers,
    ];

    pub fn is_regular(self) -> bool {
        matches!(self, ProblemKind::Hyperbolic | ProblemKind::RegularCD | ProblemKind::RegularRD)
    }

    /// `(a, b, c)` in `-a u_xx - b u_x + c u = f` for the regular family.
    pub fn coefficients(self) -> Option<(f64, f64, f64)> {
        match self {
            ProblemKind::Hyperbolic => Some((0.0, -1.0, 0.0)),
            ProblemKind::RegularCD => Some((1.0, 1.0, 0.0)),
            ProblemKind::RegularRD => Some((1.0, 0.0, 1.0)),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Hyperbolic => "hyperbolic",
            ProblemKind::RegularCD => "regular_cd",
            ProblemKind::RegularRD => "regular_rd",
            ProblemKind::SingularCD => "singular_cd",
            ProblemKind::SingularRD => "singular_rd",
            ProblemKind::SingularNCD => "singular_ncd",
            ProblemKind::Burgers => "burgers",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = match s.trim().to_ascii_lowercase().as_str() {
            "hyperbolic" => ProblemKind::Hyperbolic,
            "regular_cd" => ProblemKind::RegularCD,
            "regular_rd" => ProblemKind::RegularRD,
            "singular_cd" | "cd" => ProblemKind::SingularCD,
            "singular_rd" | "rd" | "lrd" => ProblemKind::SingularRD,
            "singular_ncd" | "ncd" => ProblemKind::SingularNCD,
            "burgers" | "be" => ProblemKind::Burgers,
            other => return Err(Error::InvalidArgument(format!("unknown problem kind `{other}`"))),
        };
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ansatz {
    /// `x (x - 1) u(x)` (plus the `-1` lifting for Burgers).
    Plain,
    /// Network combined with the problem's corrector.
    Enriched,
}

/// Ansatz value and spatial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnsatzJet {
    pub u: f64,
    pub ux: f64,
    pub uxx: f64,
}

/// Network values at the boundary, recomputed once per parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryCache {
    pub u_at_0: f64,
    pub u_at_1: f64,
}

impl BoundaryCache {
    pub fn new(p: &NetParams) -> Self {
        Self { u_at_0: p.eval(0.0), u_at_1: p.eval(1.0) }
    }
}

/// Parameter-independent data at one collocation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointData {
    pub x: f64,
    pub f: f64,
    /// Corrector jet: `e^{-x/eps}` (CD, NCD), the left sqrt layer (RD) or the
    /// normalized Burgers corrector.
    pub layer: Jet,
    /// Right sqrt layer (RD only).
    pub layer_right: Jet,
    /// `u0(x) - u0(0)` (Burgers only).
    pub u0_shift: f64,
}

/// Residual value and its partials with respect to `(u, ux, uxx, u(0), u(1))`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualParts {
    pub r: f64,
    pub du: f64,
    pub dux: f64,
    pub duxx: f64,
    pub dc0: f64,
    pub dc1: f64,
}

#[derive(Debug, Clone)]
struct NcdLimit {
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl NcdLimit {
    /// Integrates `u' = u^3 - f` from `u(1) = 0` down to `x = 0` with classic RK4.
    fn solve(forcing: &Forcing, steps: usize) -> Result<Self> {
        let h = 1.0 / steps as f64;
        let rhs = |x: f64, u: f64| u * u * u - forcing.eval(x);
        let mut values = vec![0.0; steps + 1];
        for i in (1..=steps).rev() {
            let x = i as f64 * h;
            let u = values[i];
            let k1 = rhs(x, u);
            let k2 = rhs(x - 0.5 * h, u - 0.5 * h * k1);
            let k3 = rhs(x - 0.5 * h, u - 0.5 * h * k2);
            let k4 = rhs(x - h, u - h * k3);
            let next = u - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if !next.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "nonlinear limit solution blew up near x = {}",
                    x - h
                )));
            }
            values[i - 1] = next;
        }
        let slopes = values.iter().enumerate().map(|(i, &u)| rhs(i as f64 * h, u)).collect();
        Ok(Self { h, values, slopes })
    }

    /// Cubic Hermite interpolation between RK4 nodes.
    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len() - 1;
        let x = x.clamp(0.0, 1.0);
        let i = ((x / self.h) as usize).min(n - 1);
        let t = (x - i as f64 * self.h) / self.h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.h, self.slopes[i + 1] * self.h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }
}

/// One boundary value problem together with the ansatz used to solve it.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    kind: ProblemKind,
    eps: f64,
    forcing: Forcing,
    ansatz: Ansatz,
    burgers: Option<BurgersLimit>,
    ncd: Option<Arc<NcdLimit>>,
}

impl ProblemSpec {
    /// Builds a problem with its default ansatz: enriched for the singular
    /// kinds, plain for the regular family (whose `eps` is fixed to 1).
    pub fn new(kind: ProblemKind, eps: f64, forcing: Forcing) -> Result<Self> {
        let eps = if kind.is_regular() { 1.0 } else { eps };
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("eps must be positive and finite, got {eps}")));
        }
        let burgers = match kind {
            ProblemKind::Burgers => Some(BurgersLimit::new(forcing.clone())?),
            _ => None,
        };
        let ncd = match kind {
            ProblemKind::SingularNCD => Some(Arc::new(NcdLimit::solve(&forcing, NCD_LIMIT_STEPS)?)),
            _ => None,
        };
        let ansatz = if kind.is_regular() { Ansatz::Plain } else { Ansatz::Enriched };
        Ok(Self { kind, eps, forcing, ansatz, burgers, ncd })
    }

    pub fn with_ansatz(mut self, ansatz: Ansatz) -> Result<Self> {
        if ansatz == Ansatz::Enriched && self.kind.is_regular() {
            return Err(Error::InvalidArgument(format!("{} has no corrector", self.kind)));
        }
        if ansatz == Ansatz::Enriched && self.kind == ProblemKind::Burgers {
            // surfaces DegenerateCorrector at construction
            burgers_phi_tilde_jet(self.eps, self.u00(), 0.0)?;
        }
        self.ansatz = ansatz;
        Ok(self)
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn ansatz(&self) -> Ansatz {
        self.ansatz
    }

    /// `(alpha, beta)`: boundary values at `x = 0` and `x = 1`.
    pub fn boundary_values(&self) -> (f64, f64) {
        match self.kind {
            ProblemKind::Burgers => (-1.0, -1.0),
            _ => (0.0, 0.0),
        }
    }

    fn u00(&self) -> f64 {
        self.burgers.as_ref().map_or(0.0, BurgersLimit::u0_at_0)
    }

    /// Limit (`eps = 0`) solution with the inflow condition retained.
    pub fn limit_solution(&self, x: f64) -> Result<f64> {
        match self.kind {
            ProblemKind::SingularCD => Ok(self.forcing.integral(x, 1.0)),
            ProblemKind::SingularRD => Ok(self.forcing.eval(x)),
            ProblemKind::SingularNCD => Ok(self.ncd.as_ref().expect("ncd limit").eval(x)),
            ProblemKind::Burgers => Ok(self.burgers.as_ref().expect("burgers limit").u0(x)),
            k => Err(Error::InvalidArgument(format!("{k} has no singular limit"))),
        }
    }

    /// Limit solution plus first-order corrector, `u0 + phi`.
    pub fn composite_solution(&self, x: f64) -> Result<f64> {
        let u0 = self.limit_solution(x)?;
        let eps = self.eps;
        let phi = match self.kind {
            ProblemKind::SingularCD | ProblemKind::SingularNCD => -self.limit_solution(0.0)? * exp_layer_jet(eps, x).0,
            ProblemKind::SingularRD => {
                -self.limit_solution(0.0)? * sqrt_layer_jet(eps, x, Side::Left).0
                    - self.limit_solution(1.0)? * sqrt_layer_jet(eps, x, Side::Right).0
            }
            ProblemKind::Burgers => crate::correctors::burgers_phi_jet(eps, self.u00(), x).0,
            _ => 0.0,
        };
        Ok(u0 + phi)
    }

    /// Precomputes everything at `x` that does not depend on the network.
    pub fn point_data(&self, x: f64) -> Result<PointData> {
        let mut d = PointData {
            x,
            f: self.forcing.eval(x),
            layer: (0.0, 0.0, 0.0),
            layer_right: (0.0, 0.0, 0.0),
            u0_shift: 0.0,
        };
        if self.ansatz == Ansatz::Enriched {
            match self.kind {
                ProblemKind::SingularCD | ProblemKind::SingularNCD => d.layer = exp_layer_jet(self.eps, x),
                ProblemKind::SingularRD => {
                    d.layer = sqrt_layer_jet(self.eps, x, Side::Left);
                    d.layer_right = sqrt_layer_jet(self.eps, x, Side::Right);
                }
                ProblemKind::Burgers => {
                    d.layer = burgers_phi_tilde_jet(self.eps, self.u00(), x)?;
                    d.u0_shift = self.limit_solution(x)? - self.u00();
                }
                _ => {}
            }
        }
        Ok(d)
    }

    /// Ansatz jet from the network jet at `x` and the boundary cache.
    pub fn ansatz_from_parts(&self, d: &PointData, j: NetJet, c: BoundaryCache) -> AnsatzJet {
        let x = d.x;
        match (self.ansatz, self.kind) {
            (Ansatz::Plain, kind) => {
                let mut a = plain_from_jet(j, x);
                if kind == ProblemKind::Burgers {
                    a.u -= 1.0;
                }
                a
            }
            (Ansatz::Enriched, ProblemKind::SingularCD | ProblemKind::SingularNCD) => {
                enriched_cd_from_jet(j, c.u_at_0, d.layer, x)
            }
            (Ansatz::Enriched, ProblemKind::SingularRD) => {
                let (l, lx, lxx) = d.layer;
                let (r, rx, rxx) = d.layer_right;
                AnsatzJet {
                    u: j.u - c.u_at_0 * l - c.u_at_1 * r,
                    ux: j.ux - c.u_at_0 * lx - c.u_at_1 * rx,
                    uxx: j.uxx - c.u_at_0 * lxx - c.u_at_1 * rxx,
                }
            }
            (Ansatz::Enriched, ProblemKind::Burgers) => {
                let (t, tx, txx) = d.layer;
                AnsatzJet {
                    u: (x - 1.0) * j.u + c.u_at_0 * t - 1.0,
                    ux: j.u + (x - 1.0) * j.ux + c.u_at_0 * tx,
                    uxx: 2.0 * j.ux + (x - 1.0) * j.uxx + c.u_at_0 * txx,
                }
            }
            (Ansatz::Enriched, _) => unreachable!("regular kinds are always plain"),
        }
    }

    /// Ansatz jet for parameters `p` at `x`.
    pub fn ansatz_jet(&self, p: &NetParams, x: f64) -> Result<AnsatzJet> {
        let d = self.point_data(x)?;
        Ok(self.ansatz_from_parts(&d, p.eval_jet(x), BoundaryCache::new(p)))
    }

    /// Ansatz value only.
    pub fn ansatz_value(&self, p: &NetParams, x: f64) -> Result<f64> {
        self.ansatz_jet(p, x).map(|a| a.u)
    }

    /// The differential operator applied to an arbitrary jet, minus `f`.
    /// Returns the value and partials with respect to `(U, U_x, U_xx)`.
    pub fn operator(&self, x: f64, a: AnsatzJet) -> (f64, f64, f64, f64) {
        let eps = self.eps;
        let f = self.forcing.eval(x);
        match self.kind {
            k if k.is_regular() => {
                let (ca, cb, cc) = k.coefficients().expect("regular coefficients");
                (-ca * a.uxx - cb * a.ux + cc * a.u - f, cc, -cb, -ca)
            }
            ProblemKind::SingularCD => (-eps * a.uxx - a.ux - f, 0.0, -1.0, -eps),
            ProblemKind::SingularRD => (-eps * a.uxx + a.u - f, 1.0, 0.0, -eps),
            ProblemKind::SingularNCD => {
                (-eps * a.uxx - a.ux + a.u.powi(3) - f, 3.0 * a.u * a.u, -1.0, -eps)
            }
            ProblemKind::Burgers => (-eps * a.uxx + a.u * a.ux - f, a.ux, a.u, -eps),
            _ => unreachable!(),
        }
    }

    /// Residual by direct substitution of the ansatz into the equation.
    pub fn direct_residual(&self, p: &NetParams, x: f64) -> Result<f64> {
        Ok(self.operator(x, self.ansatz_jet(p, x)?).0)
    }

    /// Residual used for training, with partials (expanded form for
    /// enriched ansatzes, direct substitution for the plain one).
    pub fn residual_parts(&self, d: &PointData, j: NetJet, c: BoundaryCache) -> ResidualParts {
        let x = d.x;
        let eps = self.eps;
        match (self.ansatz, self.kind) {
            (Ansatz::Plain, _) => {
                let a = self.ansatz_from_parts(d, j, c);
                let (r, g0, g1, g2) = self.operator(x, a);
                let q = x * (x - 1.0);
                let q1 = 2.0 * x - 1.0;
                ResidualParts {
                    r,
                    du: g0 * q + g1 * q1 + g2 * 2.0,
                    dux: g1 * q + g2 * 2.0 * q1,
                    duxx: g2 * q,
                    dc0: 0.0,
                    dc1: 0.0,
                }
            }
            (Ansatz::Enriched, ProblemKind::SingularCD | ProblemKind::SingularNCD) => {
                let e = d.layer.0;
                let xm = x - 1.0;
                let mut p = ResidualParts {
                    r: -eps * xm * j.uxx - (xm + 2.0 * eps) * j.ux - j.u - c.u_at_0 * e - d.f,
                    du: -1.0,
                    dux: -(xm + 2.0 * eps),
                    duxx: -eps * xm,
                    dc0: -e,
                    dc1: 0.0,
                };
                if self.kind == ProblemKind::SingularNCD {
                    let q = j.u - c.u_at_0 * e;
                    let xm3 = xm * xm * xm;
                    p.r += xm3 * q * q * q;
                    let dq = 3.0 * xm3 * q * q;
                    p.du += dq;
                    p.dc0 -= dq * e;
                }
                p
            }
            (Ansatz::Enriched, ProblemKind::SingularRD) => ResidualParts {
                r: -eps * j.uxx + j.u - d.f,
                du: 1.0,
                dux: 0.0,
                duxx: -eps,
                dc0: 0.0,
                dc1: 0.0,
            },
            (Ansatz::Enriched, ProblemKind::Burgers) => {
                let (t, tx, _) = d.layer;
                let xm = x - 1.0;
                let w = xm * j.u;
                let wx = j.u + xm * j.ux;
                let conv = w + c.u_at_0 * t - 1.0;
                ResidualParts {
                    r: -2.0 * eps * j.ux - eps * xm * j.uxx + wx * conv + d.u0_shift * c.u_at_0 * tx - d.f,
                    du: conv + wx * xm,
                    dux: -2.0 * eps + xm * conv,
                    duxx: -eps * xm,
                    dc0: wx * t + d.u0_shift * tx,
                    dc1: 0.0,
                }
            }
            (Ansatz::Enriched, _) => unreachable!("regular kinds are always plain"),
        }
    }

    /// Training residual at `x` for parameters `p`.
    pub fn residual(&self, p: &NetParams, x: f64) -> Result<f64> {
        let d = self.point_data(x)?;
        Ok(self.residual_parts(&d, p.eval_jet(x), BoundaryCache::new(p)).r)
    }
}

fn plain_from_jet(j: NetJet, x: f64) -> AnsatzJet {
    let q = x * (x - 1.0);
    let q1 = 2.0 * x - 1.0;
    AnsatzJet {
        u: q * j.u,
        ux: q1 * j.u + q * j.ux,
        uxx: 2.0 * j.u + 2.0 * q1 * j.ux + q * j.uxx,
    }
}

fn enriched_cd_from_jet(j: NetJet, c0: f64, layer: Jet, x: f64) -> AnsatzJet {
    let (e, ex, exx) = layer;
    let q = j.u - c0 * e;
    let qx = j.ux - c0 * ex;
    let qxx = j.uxx - c0 * exx;
    let xm = x - 1.0;
    AnsatzJet { u: xm * q, ux: q + xm * qx, uxx: 2.0 * qx + xm * qxx }
}

/// `x (x - 1) u(x)` and derivatives.
pub fn ansatz_plain(p: &NetParams, x: f64) -> AnsatzJet {
    plain_from_jet(p.eval_jet(x), x)
}

/// `(x - 1)(u(x) - u(0) e^{-x/eps})` and derivatives.
pub fn ansatz_enriched_cd(p: &NetParams, eps: f64, x: f64) -> AnsatzJet {
    enriched_cd_from_jet(p.eval_jet(x), p.eval(0.0), exp_layer_jet(eps, x), x)
}

/// `u(x) - u(0) e^{-x/sqrt(eps)} - u(1) e^{-(1-x)/sqrt(eps)}` and derivatives.
pub fn ansatz_enriched_rd(p: &NetParams, eps: f64, x: f64) -> AnsatzJet {
    let j = p.eval_jet(x);
    let (c0, c1) = (p.eval(0.0), p.eval(1.0));
    let (l, lx, lxx) = sqrt_layer_jet(eps, x, Side::Left);
    let (r, rx, rxx) = sqrt_layer_jet(eps, x, Side::Right);
    AnsatzJet {
        u: j.u - c0 * l - c1 * r,
        ux: j.ux - c0 * lx - c1 * rx,
        uxx: j.uxx - c0 * lxx - c1 * rxx,
    }
}

/// `(x - 1) u(x) + phi~(x) u(0) - 1` and derivatives.
pub fn ansatz_enriched_burgers(p: &NetParams, eps: f64, u00: f64, x: f64) -> Result<AnsatzJet> {
    let (t, tx, txx) = burgers_phi_tilde_jet(eps, u00, x)?;
    let j = p.eval_jet(x);
    let c0 = p.eval(0.0);
    Ok(AnsatzJet {
        u: (x - 1.0) * j.u + c0 * t - 1.0,
        ux: j.u + (x - 1.0) * j.ux + c0 * tx,
        uxx: 2.0 * j.ux + (x - 1.0) * j.uxx + c0 * txx,
    })
}
