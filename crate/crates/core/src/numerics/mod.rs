//! Numerical kernels shared by the physics modules: adaptive quadrature,
//! bracketed maximization and root finding, fixed-point iteration, an
//! embedded Runge–Kutta integrator and Richardson-extrapolated finite
//! differences. All of them are generic over [`Real`](crate::real::Real).

mod diff;
mod fixed_point;
mod ode;
mod optimize;
mod quadrature;

pub use diff::{derivative_fd, Derivative, DerivativeOrder};
pub use fixed_point::{fixed_point, FixedPoint};
pub use ode::{ode_solve, OdeFailure, OdeFailureKind, OdeOptions, OdeSolution};
pub use optimize::{find_root_bracketed, maximize_bracketed, Maximum};
pub use quadrature::{
    gauss_legendre, integrate_adaptive, integrate_adaptive_points, integrate_real_line, integrate_with, QuadratureError,
    QuadratureOptions, QuadratureResult, DEFAULT_MAX_SUBDIVISIONS,
};

use crate::real::{Integrable, Real};

/// Failures of the numerical kernels, with scalars widened to `f64`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge after {evaluations} evaluations (|estimate| {estimate:e}, error {error_estimate:e})")]
    QuadratureNotConverged { estimate: f64, error_estimate: f64, evaluations: usize },
    #[error("maximum not bracketed in [{lo}, {hi}] (best interior point {best})")]
    BracketFailure { lo: f64, hi: f64, best: f64 },
    #[error("no sign change of the function on [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },
    #[error("fixed-point iteration stopped after {iterations} iterations at {last:e} (residual {residual:e})")]
    FixedPointNotConverged { last: f64, residual: f64, iterations: usize },
    #[error("integration failed at t = {time:e}: {reason}")]
    OdeFailed { time: f64, reason: String },
}

impl<T: Real, V: Integrable<T>> From<QuadratureError<T, V>> for NumericsError {
    fn from(e: QuadratureError<T, V>) -> Self {
        match e {
            QuadratureError::InvalidArgument(msg) => NumericsError::InvalidArgument(msg.into()),
            QuadratureError::NotConverged(best) => NumericsError::QuadratureNotConverged {
                estimate: best.value.modulus().to_f64().unwrap_or(f64::NAN),
                error_estimate: best.error_estimate.to_f64().unwrap_or(f64::NAN),
                evaluations: best.evaluations,
            },
        }
    }
}

impl<T: Real, const N: usize> From<OdeFailure<T, N>> for NumericsError {
    fn from(e: OdeFailure<T, N>) -> Self {
        NumericsError::OdeFailed { time: e.time.to_f64().unwrap_or(f64::NAN), reason: e.to_string() }
    }
}
