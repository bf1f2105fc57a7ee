//! Natural cubic spline interpolation.

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

/// Natural cubic spline through `(knots[i], values[i])`, stored as the knot
/// second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    /// Requires at least two strictly increasing, finite knots.
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidArgument(format!(
                "spline needs >= 2 knots with matching values (got {} knots, {} values)",
                n,
                values.len()
            )));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("spline data must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("spline knots must be strictly increasing".into()));
        }
        let mut second = vec![0.0; n];
        if n > 2 {
            let m = n - 2;
            let mut sub = vec![0.0; m - 1];
            let mut diag = vec![0.0; m];
            let mut sup = vec![0.0; m - 1];
            let mut rhs = vec![0.0; m];
            for k in 0..m {
                let i = k + 1;
                let hl = knots[i] - knots[i - 1];
                let hr = knots[i + 1] - knots[i];
                diag[k] = (hl + hr) / 3.0;
                if k > 0 {
                    sub[k - 1] = hl / 6.0;
                }
                if k + 1 < m {
                    sup[k] = hr / 6.0;
                }
                rhs[k] = (values[i + 1] - values[i]) / hr - (values[i] - values[i - 1]) / hl;
            }
            solve_tridiagonal(&mut sub, &mut diag, &mut sup, &mut rhs)?;
            second[1..n - 1].copy_from_slice(&rhs);
        }
        Ok(Self { knots, values, second })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn second_derivatives(&self) -> &[f64] {
        &self.second
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.knots.len();
        match self.knots.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Spline value; outside the knot range the end cubic is extended.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + (h * h / 6.0) * ((a * a - 1.0) * a * self.second[i] + (b * b - 1.0) * b * self.second[i + 1])
    }

    /// First derivative of the spline.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        (self.values[i + 1] - self.values[i]) / h
            + (h / 6.0) * (-(3.0 * a * a - 1.0) * self.second[i] + (3.0 * b * b - 1.0) * self.second[i + 1])
    }
}
