//! Ground truth: closed-form solutions, a layer-adapted finite-difference
//! Newton solver, spline-interpolated reference curves and relative L2 errors.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::linalg::solve_tridiagonal;
use crate::problems::{AnsatzJet, ProblemKind, ProblemSpec};
use crate::spline::CubicSpline;

/// Default oracle mesh size.
pub const DEFAULT_ORACLE_MESH: usize = 8192;
/// Shishkin transition constant: `tau = min(1/4, C * scale * ln M)`.
pub const SHISHKIN_C: f64 = 2.0;
pub const MIN_ORACLE_MESH: usize = 64;
pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITERS: usize = 50;
const MAX_BACKTRACKS: usize = 30;
/// Quadrature grids put half their points within this many layer scales of the wall.
pub const LAYER_WIDTH_SCALES: f64 = 40.0;

/// Solution of `-eps u'' - u' = 1`, `u(0) = u(1) = 0`.
pub fn exact_cd(eps: f64, x: f64) -> f64 {
    // (1 - e^{-x/eps}) / (1 - e^{-1/eps}) - x, with only non-positive exponents
    (-(-x / eps).exp_m1()) / (-(-1.0 / eps).exp_m1()) - x
}

/// Solution of `-eps u'' + u = 1`, `u(0) = u(1) = 0`.
pub fn exact_rd(eps: f64, x: f64) -> f64 {
    // cosh(a) / cosh(b) = (e^{a-b} + e^{-a-b}) / (1 + e^{-2b}) for |a| <= b
    let s = eps.sqrt();
    let a = (x - 0.5) / s;
    let b = 0.5 / s;
    1.0 - ((a - b).exp() + (-a - b).exp()) / (1.0 + (-2.0 * b).exp())
}

/// Where a problem's boundary layers sit, with their thickness scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerLocation {
    None,
    Left(f64),
    Both(f64),
}

impl LayerLocation {
    pub fn for_problem(spec: &ProblemSpec) -> Self {
        let eps = spec.eps();
        match spec.kind() {
            ProblemKind::SingularCD | ProblemKind::SingularNCD => LayerLocation::Left(eps),
            ProblemKind::Burgers => {
                // decay rate |u0(0)| / eps, but never thinner than eps
                let u00 = spec.limit_solution(0.0).unwrap_or(-1.0).abs();
                LayerLocation::Left(eps / u00.min(1.0))
            }
            ProblemKind::SingularRD => LayerLocation::Both(eps.sqrt()),
            _ => LayerLocation::None,
        }
    }
}

fn uniform_into(out: &mut Vec<f64>, a: f64, b: f64, intervals: usize) {
    for i in 1..=intervals {
        out.push(if i == intervals { b } else { a + (b - a) * i as f64 / intervals as f64 });
    }
}

/// Piecewise-uniform mesh with `m` intervals on `[0, 1]`.
pub fn shishkin_mesh(m: usize, layers: LayerLocation) -> Vec<f64> {
    let ln_m = (m as f64).ln();
    let mut mesh = vec![0.0];
    match layers {
        LayerLocation::None => uniform_into(&mut mesh, 0.0, 1.0, m),
        LayerLocation::Left(scale) => {
            let tau = (SHISHKIN_C * scale * ln_m).min(0.25);
            let fine = m / 2;
            uniform_into(&mut mesh, 0.0, tau, fine);
            uniform_into(&mut mesh, tau, 1.0, m - fine);
        }
        LayerLocation::Both(scale) => {
            let tau = (SHISHKIN_C * scale * ln_m).min(0.25);
            let side = m / 4;
            uniform_into(&mut mesh, 0.0, tau, side);
            uniform_into(&mut mesh, tau, 1.0 - tau, m - 2 * side);
            uniform_into(&mut mesh, 1.0 - tau, 1.0, side);
        }
    }
    mesh
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    OracleSolver { mesh_size: usize, newton_iters: usize },
}

/// Mesh solution with its natural cubic spline interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    spline: CubicSpline,
    provenance: Provenance,
}

impl ReferenceSolution {
    pub fn new(mesh: Vec<f64>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        Ok(Self { spline: CubicSpline::natural(mesh, values)?, provenance })
    }

    /// Samples a closed-form solution on `mesh`.
    pub fn from_closed_form(mesh: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = mesh.iter().map(|&x| f(x)).collect();
        Self::new(mesh, values, Provenance::ClosedForm)
    }

    pub fn mesh(&self) -> &[f64] {
        self.spline.knots()
    }

    pub fn values(&self) -> &[f64] {
        self.spline.values()
    }

    pub fn spline(&self) -> &CubicSpline {
        &self.spline
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn interpolate(&self, x: f64) -> f64 {
        self.spline.eval(x)
    }

    /// Writes `x,u` rows with a header.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x,u")?;
        for (x, u) in self.mesh().iter().zip(self.values()) {
            writeln!(w, "{x:.12e},{u:.12e}")?;
        }
        Ok(())
    }
}

/// Free-function form of [`ReferenceSolution::interpolate`].
pub fn interpolate(reference: &ReferenceSolution, x: f64) -> f64 {
    reference.interpolate(x)
}

/// Solves the full `eps`-problem by damped Newton iteration on a centered
/// second-order finite-difference discretization over a Shishkin mesh.
pub fn oracle_solve(spec: &ProblemSpec, m: usize) -> Result<ReferenceSolution> {
    if m < MIN_ORACLE_MESH {
        return Err(Error::MeshTooCoarse(m));
    }
    if spec.kind() == ProblemKind::Hyperbolic {
        return Err(Error::InvalidArgument("the first-order problem has no oracle".into()));
    }
    let mesh = shishkin_mesh(m, LayerLocation::for_problem(spec));
    let (alpha, beta) = spec.boundary_values();
    let mut u: Vec<f64> = if spec.kind().is_regular() {
        vec![0.0; mesh.len()]
    } else {
        mesh.iter().map(|&x| spec.composite_solution(x)).collect::<Result<_>>()?
    };
    u[0] = alpha;
    u[m] = beta;

    let n = m - 1;
    let mut sub = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n - 1];
    let mut rhs = vec![0.0; n];

    let mut norm = scaled_residual(spec, &mesh, &u, &mut sub, &mut diag, &mut sup, &mut rhs);
    let mut iters = 0;
    while norm > NEWTON_TOL && iters < NEWTON_MAX_ITERS {
        iters += 1;
        rhs.iter_mut().for_each(|r| *r = -*r);
        solve_tridiagonal(&mut sub, &mut diag, &mut sup, &mut rhs)?;
        let step = rhs.clone();
        let u_max = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let step_max = step.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = u.clone();
            for (t, s) in trial[1..m].iter_mut().zip(&step) {
                *t += lambda * s;
            }
            let trial_norm = scaled_residual(spec, &mesh, &trial, &mut sub, &mut diag, &mut sup, &mut rhs);
            if trial_norm < norm {
                u = trial;
                norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // a full step at rounding level means the iteration has converged
            if step_max <= 1e-13 * (1.0 + u_max) {
                break;
            }
            return Err(Error::NewtonDivergence { iteration: iters, residual: norm });
        }
    }
    ReferenceSolution::new(mesh, u, Provenance::OracleSolver { mesh_size: m, newton_iters: iters })
}

/// Fills the Jacobian and residual of the discrete system at `u` and returns
/// `max_i |F_i| / |J_ii|`.
fn scaled_residual(
    spec: &ProblemSpec,
    mesh: &[f64],
    u: &[f64],
    sub: &mut [f64],
    diag: &mut [f64],
    sup: &mut [f64],
    res: &mut [f64],
) -> f64 {
    let m = mesh.len() - 1;
    let mut worst = 0.0f64;
    for i in 1..m {
        let k = i - 1;
        let hl = mesh[i] - mesh[i - 1];
        let hr = mesh[i + 1] - mesh[i];
        let hs = hl + hr;
        let d1 = (u[i + 1] - u[i - 1]) / hs;
        let d2 = 2.0 / hs * ((u[i + 1] - u[i]) / hr - (u[i] - u[i - 1]) / hl);
        let (r, g0, g1, g2) = spec.operator(mesh[i], AnsatzJet { u: u[i], ux: d1, uxx: d2 });
        res[k] = r;
        diag[k] = g0 - g2 * 2.0 / hs * (1.0 / hr + 1.0 / hl);
        if k > 0 {
            sub[k - 1] = -g1 / hs + g2 * 2.0 / (hs * hl);
        }
        if k + 1 < m - 1 {
            sup[k] = g1 / hs + g2 * 2.0 / (hs * hr);
        }
        let scale = diag[k].abs().max(f64::MIN_POSITIVE);
        worst = worst.max((r / scale).abs());
    }
    if worst.is_nan() {
        f64::INFINITY
    } else {
        worst
    }
}

/// Reference truth for error measurement.
#[derive(Clone)]
pub enum Truth {
    ClosedForm(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Reference(Arc<ReferenceSolution>),
}

impl std::fmt::Debug for Truth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Truth::ClosedForm(_) => write!(f, "Truth::ClosedForm"),
            Truth::Reference(r) => write!(f, "Truth::Reference({:?})", r.provenance()),
        }
    }
}

impl Truth {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Truth::ClosedForm(f) => f(x),
            Truth::Reference(r) => r.interpolate(x),
        }
    }

    /// Closed form when one exists (constant forcing on the linear problems),
    /// otherwise the oracle with `m` intervals.
    pub fn for_problem(spec: &ProblemSpec, m: usize) -> Result<Self> {
        let eps = spec.eps();
        let closed: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> = match (spec.kind(), spec.forcing()) {
            (ProblemKind::SingularCD | ProblemKind::RegularCD, Forcing::Const(c)) => {
                let c = *c;
                Some(Arc::new(move |x| c * exact_cd(eps, x)))
            }
            (ProblemKind::SingularRD | ProblemKind::RegularRD, Forcing::Const(c)) => {
                let c = *c;
                Some(Arc::new(move |x| c * exact_rd(eps, x)))
            }
            (ProblemKind::Hyperbolic, f) => {
                // u_x = f with the inflow value u(0) = 0 kept
                let f = f.clone();
                Some(Arc::new(move |x| f.integral(0.0, x)))
            }
            _ => None,
        };
        match closed {
            Some(f) => Ok(Truth::ClosedForm(f)),
            None => Ok(Truth::Reference(Arc::new(oracle_solve(spec, m)?))),
        }
    }
}

/// Evaluation nodes for trapezoid quadrature on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    nodes: Vec<f64>,
}

impl QuadGrid {
    /// `n` nodes; half of them lie inside the layer region(s) of width
    /// `min(1/4, 40 * scale)`.
    pub fn graded(n: usize, layers: LayerLocation) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument("quadrature grid needs at least 3 nodes".into()));
        }
        let intervals = n - 1;
        let width = |scale: f64| (LAYER_WIDTH_SCALES * scale).min(0.25);
        let mut nodes = vec![0.0];
        match layers {
            LayerLocation::None => uniform_into(&mut nodes, 0.0, 1.0, intervals),
            LayerLocation::Left(scale) => {
                let w = width(scale);
                let fine = intervals / 2;
                uniform_into(&mut nodes, 0.0, w, fine);
                uniform_into(&mut nodes, w, 1.0, intervals - fine);
            }
            LayerLocation::Both(scale) => {
                let w = width(scale);
                let side = intervals / 4;
                uniform_into(&mut nodes, 0.0, w, side);
                uniform_into(&mut nodes, w, 1.0 - w, intervals - 2 * side);
                uniform_into(&mut nodes, 1.0 - w, 1.0, side);
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Composite trapezoid rule for `int_0^1 g`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let vals: Vec<f64> = self.nodes.iter().map(|&x| g(x)).collect();
        self.nodes.windows(2).zip(vals.windows(2)).map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1])).sum()
    }
}

/// Minimum quadrature size accepted by [`rel_l2_error`].
pub const MIN_QUAD_POINTS: usize = 1000;

/// `||predicted - truth|| / ||truth||` in `L2(0, 1)` on a graded grid with
/// `quad_points` nodes.
pub fn rel_l2_error(
    predicted: impl Fn(f64) -> f64,
    truth: impl Fn(f64) -> f64,
    quad_points: usize,
    layers: LayerLocation,
) -> Result<f64> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_QUAD_POINTS} quadrature points")));
    }
    let grid = QuadGrid::graded(quad_points, layers)?;
    let truth_sq = grid.integrate(|x| truth(x).powi(2));
    if truth_sq.sqrt() <= 1e-14 {
        return Err(Error::ZeroTruthNorm);
    }
    let diff_sq = grid.integrate(|x| (predicted(x) - truth(x)).powi(2));
    Ok((diff_sq / truth_sq).sqrt())
}

/// Absolute `L2(0, 1)` distance on a graded grid.
pub fn l2_distance(a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64, quad_points: usize, layers: LayerLocation) -> Result<f64> {
    let grid = QuadGrid::graded(quad_points, layers)?;
    Ok(grid.integrate(|x| (a(x) - b(x)).powi(2)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn second_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
        ((f(x + h) - f(x - h)) / (2.0 * h), (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h))
    }

    #[test]
    fn exact_cd_properties() {
        assert_eq!(exact_cd(0.1, 0.0), 0.0);
        assert!(exact_cd(0.1, 1.0).abs() < 1e-16);
        assert!((exact_cd(1e-4, 0.5) - 0.5).abs() <= 1e-12);
        assert!(exact_cd(1e-12, 0.3).is_finite());
    }

    #[test]
    fn exact_cd_satisfies_equation() {
        // analytic derivatives of the closed form
        let eps: f64 = 0.1;
        let denom = -(-1.0 / eps).exp_m1();
        for i in 1..=20 {
            let x = i as f64 / 21.0;
            let e = (-x / eps).exp();
            let ux = e / (eps * denom) - 1.0;
            let uxx = -e / (eps * eps * denom);
            assert!((-eps * uxx - ux - 1.0).abs() <= 1e-10);
            let (fx, _) = second_diff(|t| exact_cd(eps, t), x, 1e-5);
            assert!((fx - ux).abs() < 1e-7);
        }
    }

    #[test]
    fn exact_rd_properties() {
        assert!(exact_rd(0.01, 0.0).abs() < 1e-15);
        assert!(exact_rd(0.01, 1.0).abs() < 1e-15);
        assert_eq!(exact_rd(1e-8, 0.5), 1.0);
        let eps: f64 = 0.01;
        for i in 1..=20 {
            let x = i as f64 / 21.0;
            let s: f64 = eps.sqrt();
            let uxx = -((x - 0.5) / s).cosh() / (s * s * (0.5 / s).cosh());
            assert!((-eps * uxx + exact_rd(eps, x) - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn shishkin_mesh_shape() {
        let mesh = shishkin_mesh(64, LayerLocation::Left(1e-3));
        assert_eq!(mesh.len(), 65);
        assert_eq!(mesh[0], 0.0);
        assert_eq!(mesh[64], 1.0);
        let tau = SHISHKIN_C * 1e-3 * 64f64.ln();
        assert!((mesh[32] - tau).abs() < 1e-15);
        assert!(mesh.windows(2).all(|w| w[1] > w[0]));
        let both = shishkin_mesh(64, LayerLocation::Both(0.01));
        assert_eq!(both.len(), 65);
        assert!((both[48] - (1.0 - 0.25f64.min(SHISHKIN_C * 0.01 * 64f64.ln()))).abs() < 1e-15);
    }

    #[test]
    fn mesh_too_coarse() {
        let spec = ProblemSpec::new(ProblemKind::SingularCD, 0.01, Forcing::Const(1.0)).unwrap();
        assert_eq!(oracle_solve(&spec, 32), Err(Error::MeshTooCoarse(32)));
    }

    #[test]
    fn spline_reference_exact_at_nodes() {
        let mesh = shishkin_mesh(128, LayerLocation::Left(0.01));
        let r = ReferenceSolution::from_closed_form(mesh.clone(), |x| exact_cd(0.01, x)).unwrap();
        for &x in &mesh {
            assert_eq!(r.interpolate(x), exact_cd(0.01, x));
        }
        let lin = ReferenceSolution::from_closed_form(mesh, |x| x).unwrap();
        for k in 0..=97 {
            let x = k as f64 / 97.0;
            assert!((interpolate(&lin, x) - x).abs() <= 1e-12);
        }
    }

    #[test]
    fn rel_l2_basics() {
        let t = |x: f64| (3.0 * x).sin() + 0.2;
        let layers = LayerLocation::Left(1e-3);
        assert_eq!(rel_l2_error(t, t, 2001, layers).unwrap(), 0.0);
        assert!((rel_l2_error(|x| 1.1 * t(x), t, 2001, layers).unwrap() - 0.1).abs() <= 1e-10);
        assert!((rel_l2_error(|_| 0.0, t, 2001, layers).unwrap() - 1.0).abs() <= 1e-12);
        assert_eq!(rel_l2_error(t, |_| 0.0, 2001, layers), Err(Error::ZeroTruthNorm));
        assert!(rel_l2_error(t, t, 999, layers).is_err());
    }

    #[test]
    fn graded_grid_resolves_layer_norm() {
        // ||e^{-x/eps}||^2 = eps/2 for tiny eps
        let eps = 1e-6;
        let grid = QuadGrid::graded(2001, LayerLocation::Left(eps)).unwrap();
        let v = grid.integrate(|x| (-2.0 * x / eps).exp());
        assert!((v / (eps / 2.0) - 1.0).abs() < 1e-3);
        assert_eq!(grid.nodes().len(), 2001);
    }

    #[test]
    fn csv_export() {
        let r = ReferenceSolution::from_closed_form(vec![0.0, 0.5, 1.0], |x| x * x).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,u");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "5.000000000000e-1,2.500000000000e-1");
    }
}
