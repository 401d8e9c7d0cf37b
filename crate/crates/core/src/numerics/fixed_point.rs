use crate::real::Real;

use super::NumericsError;

/// Converged fixed point together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint<T> {
    pub x: T,
    pub residual: T,
    pub iterations: usize,
}

/// Plain successive substitution `x ← gmap(x)` until
/// `|gmap(x) - x| ≤ rel_tol·|x|`.
///
/// The returned `x` is the last image, so the residual reported is the one
/// measured on the step that produced it.
pub fn fixed_point<T, F>(mut gmap: F, x0: T, rel_tol: T, max_iter: usize) -> Result<FixedPoint<T>, NumericsError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !x0.is_finite() || !(rel_tol > T::zero()) {
        return Err(NumericsError::InvalidArgument("fixed_point needs a finite start and rel_tol > 0".into()));
    }
    let mut x = x0;
    for iteration in 1..=max_iter {
        let next = gmap(x);
        if !next.is_finite() {
            return Err(NumericsError::FixedPointNotConverged {
                last: x.to_f64().unwrap_or(f64::NAN),
                residual: f64::INFINITY,
                iterations: iteration,
            });
        }
        let residual = (next - x).abs();
        if residual <= rel_tol * next.abs() {
            return Ok(FixedPoint { x: next, residual, iterations: iteration });
        }
        x = next;
    }
    let residual = (gmap(x) - x).abs();
    Err(NumericsError::FixedPointNotConverged {
        last: x.to_f64().unwrap_or(f64::NAN),
        residual: residual.to_f64().unwrap_or(f64::NAN),
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn babylonian_square_root() {
        let fp = fixed_point(|x: f64| 0.5 * (x + 2.0 / x), 1.0, 1e-14, 100).unwrap();
        assert!((fp.x - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn constant_map_converges_immediately() {
        let fp = fixed_point(|_x: f64| 4.25, 1.0, 1e-12, 10).unwrap();
        assert_eq!(fp.x, 4.25);
        assert!(fp.iterations <= 2);
    }

    #[test]
    fn divergent_map_reports_last_iterate() {
        let err = fixed_point(|x: f64| 2.0 * x + 1.0, 1.0, 1e-12, 20).unwrap_err();
        match err {
            NumericsError::FixedPointNotConverged { iterations, residual, .. } => {
                assert_eq!(iterations, 20);
                assert!(residual > 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
