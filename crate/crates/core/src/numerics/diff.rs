//! Central differences refined by Richardson extrapolation (Ridders' scheme).

use crate::real::Real;

/// Which derivative [`derivative_fd`] estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// Extrapolated derivative and the tableau's own error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative<T> {
    pub value: T,
    pub error_estimate: T,
}

const SHRINK: f64 = 1.4;
const TABLEAU: usize = 10;

/// Estimates the first or second derivative of `f` at `x`.
///
/// `initial_step` should be comparable to the scale over which `f` changes
/// appreciably; the tableau shrinks it geometrically and stops once higher
/// extrapolation orders start to amplify round-off.
pub fn derivative_fd<T, F>(mut f: F, x: T, order: DerivativeOrder, initial_step: T) -> Derivative<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let shrink = T::of(SHRINK);
    let shrink2 = shrink * shrink;
    let fx = match order {
        DerivativeOrder::First => T::zero(),
        DerivativeOrder::Second => f(x),
    };
    let mut stencil = |h: T| match order {
        DerivativeOrder::First => (f(x + h) - f(x - h)) / (T::of(2.0) * h),
        DerivativeOrder::Second => (f(x + h) - T::of(2.0) * fx + f(x - h)) / (h * h),
    };

    let mut table = [[T::zero(); TABLEAU]; TABLEAU];
    let mut h = initial_step.abs();
    table[0][0] = stencil(h);
    let mut best = Derivative { value: table[0][0], error_estimate: T::max_value() };
    for i in 1..TABLEAU {
        h = h / shrink;
        table[0][i] = stencil(h);
        let mut fac = shrink2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - T::one());
            fac = fac * shrink2;
            let err = (table[j][i] - table[j - 1][i]).abs().max((table[j][i] - table[j - 1][i - 1]).abs());
            if err <= best.error_estimate {
                best = Derivative { value: table[j][i], error_estimate: err };
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= T::of(2.0) * best.error_estimate {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_first_derivative() {
        let d = derivative_fd(|x: f64| x * x, 3.0, DerivativeOrder::First, 0.5);
        assert!((d.value - 6.0).abs() < 1e-10);
    }

    #[test]
    fn sine_second_derivative_at_zero() {
        let d = derivative_fd(f64::sin, 0.0, DerivativeOrder::Second, 0.5);
        assert!(d.value.abs() < 1e-9);
    }

    #[test]
    fn exponential_relative_accuracy() {
        let e = std::f64::consts::E;
        let d = derivative_fd(f64::exp, 1.0, DerivativeOrder::First, 0.5);
        assert!(((d.value - e) / e).abs() < 1e-8);
        let d2 = derivative_fd(f64::exp, 1.0, DerivativeOrder::Second, 0.5);
        assert!(((d2.value - e) / e).abs() < 1e-7);
    }
}
