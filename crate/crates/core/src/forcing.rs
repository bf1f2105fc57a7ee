//! Right-hand sides `f(x)` on `[0, 1]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

const SIMPSON_TOL: f64 = 1e-12;
const SIMPSON_MAX_DEPTH: u32 = 48;

#[derive(Clone, PartialEq)]
pub enum Forcing {
    Const(f64),
    /// `f(x) = cos(x)`
    Cos,
    /// Natural spline through user-supplied samples covering `[0, 1]`.
    Tabulated(Arc<CubicSpline>),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Const(c) => write!(f, "Const({c})"),
            Forcing::Cos => write!(f, "Cos"),
            Forcing::Tabulated(s) => write!(f, "Tabulated({} samples)", s.knots().len()),
        }
    }
}

impl fmt::Display for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Const(c) => write!(f, "const:{c}"),
            Forcing::Cos => write!(f, "cos"),
            Forcing::Tabulated(_) => write!(f, "table"),
        }
    }
}

impl Forcing {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Forcing::Const(c) => *c,
            Forcing::Cos => x.cos(),
            Forcing::Tabulated(s) => s.eval(x),
        }
    }

    /// `int_a^b f(s) ds`; exact for the built-in forcings, adaptive Simpson otherwise.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Forcing::Const(c) => c * (b - a),
            Forcing::Cos => b.sin() - a.sin(),
            Forcing::Tabulated(s) => adaptive_simpson(|x| s.eval(x), a, b, SIMPSON_TOL),
        }
    }

    /// Parses a sample table: one `x, f` (or whitespace separated) pair per
    /// line, `#` comments, strictly increasing `x`, first `x <= 0`, last `x >= 1`.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("expected two columns `x, f`, found {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Config { line: line_no, message: format!("bad number `{s}`") })
            };
            let (x, f) = (parse(fields[0])?, parse(fields[1])?);
            if let Some(&prev) = xs.last() {
                if x <= prev {
                    return Err(Error::Config {
                        line: line_no,
                        message: format!("x values must increase strictly ({x} after {prev})"),
                    });
                }
            }
            xs.push(x);
            fs.push(f);
        }
        if xs.len() < 2 {
            return Err(Error::Config { line: last_line, message: "forcing table needs at least two samples".into() });
        }
        if xs[0] > 0.0 || xs[xs.len() - 1] < 1.0 {
            return Err(Error::Config { line: last_line, message: "forcing table must cover [0, 1]".into() });
        }
        Ok(Forcing::Tabulated(Arc::new(CubicSpline::natural(xs, fs)?)))
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_integrals() {
        assert_eq!(Forcing::Const(-1.0).integral(1.0, 0.0), 1.0);
        assert!((Forcing::Cos.integral(0.0, 1.0) - 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn simpson_matches_exact() {
        let v = adaptive_simpson(|x| (3.0 * x).exp(), 0.0, 1.0, 1e-12);
        assert!((v - (3f64.exp() - 1.0) / 3.0).abs() < 1e-11);
        assert_eq!(adaptive_simpson(|x| x, 0.3, 0.3, 1e-12), 0.0);
    }

    #[test]
    fn table_round_trip() {
        let text = "# x f\n0, 1\n0.5 2\n\n1.0,\t3 # end\n";
        let f = Forcing::parse_table(text).unwrap();
        assert!((f.eval(0.25) - 1.5).abs() < 1e-12);
        assert!((f.integral(0.0, 1.0) - 2.0).abs() < 1e-11);
    }

    #[test]
    fn table_errors_are_line_numbered() {
        match Forcing::parse_table("0 1\n0.5 x\n1 2\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match Forcing::parse_table("0 1\n0 2\n1 2\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Forcing::parse_table("0.1 1\n1 2\n").is_err());
        assert!(Forcing::parse_table("").is_err());
        assert!(Forcing::parse_table("0 1 2\n").is_err());
    }
}
