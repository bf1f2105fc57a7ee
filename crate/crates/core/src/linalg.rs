use crate::error::{Error, Result};

/// Solves a tridiagonal system in place using Gaussian elimination with
/// partial pivoting. `sub` and `sup` have length `n - 1`, `diag` and `rhs`
/// length `n`. On return `rhs` holds the solution.
///
/// Pivoting matters for the centered convection stencils, whose Jacobians are
/// not diagonally dominant on coarse mesh cells.
pub fn solve_tridiagonal(
    sub: &mut [f64],
    diag: &mut [f64],
    sup: &mut [f64],
    rhs: &mut [f64],
) -> Result<()> {
    let n = diag.len();
    if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
        return Err(Error::InvalidArgument("tridiagonal dimension mismatch".into()));
    }
    // second superdiagonal created by row swaps
    let mut sup2 = vec![0.0; n.saturating_sub(2)];
    for i in 0..n - 1 {
        if diag[i].abs() >= sub[i].abs() {
            if diag[i] == 0.0 {
                return Err(Error::InvalidArgument("singular tridiagonal system".into()));
            }
            let f = sub[i] / diag[i];
            diag[i + 1] -= f * sup[i];
            rhs[i + 1] -= f * rhs[i];
        } else {
            let f = diag[i] / sub[i];
            diag[i] = sub[i];
            let old_d_next = diag[i + 1];
            diag[i + 1] = sup[i] - f * old_d_next;
            sup[i] = old_d_next;
            if i + 2 < n {
                sup2[i] = sup[i + 1];
                sup[i + 1] *= -f;
            }
            let b = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = b - f * rhs[i + 1];
        }
    }
    if diag[n - 1] == 0.0 {
        return Err(Error::InvalidArgument("singular tridiagonal system".into()));
    }
    rhs[n - 1] /= diag[n - 1];
    if n >= 2 {
        rhs[n - 2] = (rhs[n - 2] - sup[n - 2] * rhs[n - 1]) / diag[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1] - sup2[i] * rhs[i + 2]) / diag[i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    #[test]
    fn solves_non_dominant_system() {
        // small diagonal forces row swaps
        let sub = vec![3.0, -2.0, 5.0, 1.0];
        let diag = vec![0.1, 0.2, -0.05, 0.3, 2.0];
        let sup = vec![1.0, 4.0, -1.0, 0.7];
        let x = vec![1.0, -2.0, 0.5, 3.0, -1.5];
        let b = matvec(&sub, &diag, &sup, &x);
        let (mut s, mut d, mut u, mut r) = (sub.clone(), diag.clone(), sup.clone(), b);
        solve_tridiagonal(&mut s, &mut d, &mut u, &mut r).unwrap();
        for (a, e) in r.iter().zip(&x) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
    }

    #[test]
    fn one_by_one() {
        let mut r = vec![6.0];
        solve_tridiagonal(&mut [], &mut [3.0], &mut [], &mut r).unwrap();
        assert_eq!(r, vec![2.0]);
    }

    #[test]
    fn singular_is_error() {
        let mut r = vec![1.0, 1.0];
        assert!(solve_tridiagonal(&mut [0.0], &mut [0.0, 1.0], &mut [1.0], &mut r).is_err());
    }
}
