//! Dormand–Prince 5(4) integrator with the classic fourth-order continuous
//! extension for output at arbitrary times.

use std::fmt;

use crate::real::Real;

/// Time-ordered samples of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<T, const N: usize> {
    pub samples: Vec<(T, [T; N])>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<T: Real, const N: usize> OdeSolution<T, N> {
    /// Last recorded state, if any.
    pub fn last(&self) -> Option<&(T, [T; N])> {
        self.samples.last()
    }
}

/// Why integration stopped before reaching the end of the span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeFailureKind {
    /// The step size collapsed to round-off; typical of a singular field.
    StepUnderflow,
    TooManySteps,
    InvalidArgument,
}

/// Failure carrying the time reached and everything sampled up to it.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeFailure<T, const N: usize> {
    pub time: T,
    pub kind: OdeFailureKind,
    pub partial: OdeSolution<T, N>,
}

impl<T: Real, const N: usize> fmt::Display for OdeFailure<T, N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OdeFailureKind::StepUnderflow => write!(f, "step size underflow at t = {:e}", self.time),
            OdeFailureKind::TooManySteps => write!(f, "step budget exhausted at t = {:e}", self.time),
            OdeFailureKind::InvalidArgument => write!(f, "invalid integration span or tolerances"),
        }
    }
}

impl<T: Real, const N: usize> std::error::Error for OdeFailure<T, N> {}

/// Tolerances and output control for [`ode_solve`].
#[derive(Debug, Clone)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// First trial step; estimated from the field when absent.
    pub initial_step: Option<T>,
    pub max_steps: usize,
    /// Output times inside the span. When absent every accepted step is
    /// recorded. The span endpoints are always included.
    pub output_times: Option<Vec<T>>,
}

impl<T: Real> OdeOptions<T> {
    pub fn new(rel_tol: T, abs_tol: T) -> Self {
        Self { rel_tol, abs_tol, initial_step: None, max_steps: 200_000, output_times: None }
    }

    pub fn with_output_times(mut self, times: Vec<T>) -> Self {
        self.output_times = Some(times);
        self
    }

    pub fn with_initial_step(mut self, h: T) -> Self {
        self.initial_step = Some(h);
        self
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combine<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (coef, k) in terms {
        let c = T::of(*coef) * h;
        for i in 0..N {
            out[i] = out[i] + c * k[i];
        }
    }
    out
}

fn all_finite<T: Real, const N: usize>(v: &[T; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Coefficients of the continuous extension over one accepted step.
struct DenseStep<T, const N: usize> {
    t_old: T,
    h: T,
    r: [[T; N]; 5],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    fn eval(&self, t: T) -> [T; N] {
        let theta = (t - self.t_old) / self.h;
        let theta1 = T::one() - theta;
        let mut y = [T::zero(); N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        y
    }
}

/// Integrates `dy/dt = field(t, y)` from `t0` to `t1 > t0`.
///
/// Each accepted step keeps the mixed error norm
/// `sqrt(mean((err_i / (abs_tol + rel_tol·max(|y_i|, |y_i'|)))²)) ≤ 1`.
/// Stages that produce non-finite derivatives are treated as rejected steps,
/// so a field that blows up ends in [`OdeFailureKind::StepUnderflow`] near the
/// offending time instead of propagating NaNs.
pub fn ode_solve<T, const N: usize, F>(
    mut field: F,
    y0: [T; N],
    t0: T,
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<OdeSolution<T, N>, OdeFailure<T, N>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let mut solution = OdeSolution { samples: vec![(t0, y0)], accepted_steps: 0, rejected_steps: 0 };
    let invalid = |solution: OdeSolution<T, N>| OdeFailure { time: t0, kind: OdeFailureKind::InvalidArgument, partial: solution };
    if !(t0 < t1) || !(opts.rel_tol >= T::zero()) || !(opts.abs_tol >= T::zero())
        || (opts.rel_tol == T::zero() && opts.abs_tol == T::zero())
        || !all_finite(&y0)
    {
        return Err(invalid(solution));
    }

    let mut pending: Vec<T> = match &opts.output_times {
        Some(times) => {
            if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| *t < t0 || *t > t1) {
                return Err(invalid(solution));
            }
            times.iter().copied().filter(|t| *t > t0).collect()
        }
        None => Vec::new(),
    };
    if opts.output_times.is_some() && pending.last().map_or(true, |t| *t < t1) {
        pending.push(t1);
    }
    pending.reverse();

    let scale = |a: &[T; N], b: &[T; N], i: usize| opts.abs_tol + opts.rel_tol * a[i].abs().max(b[i].abs());

    let mut t = t0;
    let mut y = y0;
    let mut k1 = field(t, &y);
    if !all_finite(&k1) {
        return Err(OdeFailure { time: t, kind: OdeFailureKind::StepUnderflow, partial: solution });
    }

    let span = t1 - t0;
    let mut h = match opts.initial_step {
        Some(h) => h.abs().min(span),
        None => initial_step(&mut field, t, &y, &k1, span, opts),
    };
    let mut last_rejected = false;

    loop {
        if solution.accepted_steps + solution.rejected_steps >= opts.max_steps {
            return Err(OdeFailure { time: t, kind: OdeFailureKind::TooManySteps, partial: solution });
        }
        let min_step = T::of(16.0) * T::epsilon() * t.abs().max(span * T::epsilon());
        if h < min_step {
            return Err(OdeFailure { time: t, kind: OdeFailureKind::StepUnderflow, partial: solution });
        }
        let last_step = t + h >= t1;
        if last_step {
            h = t1 - t;
        }

        let y2 = combine(&y, h, &[(A21, &k1)]);
        let k2 = field(t + T::of(C2) * h, &y2);
        let y3 = combine(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = field(t + T::of(C3) * h, &y3);
        let y4 = combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = field(t + T::of(C4) * h, &y4);
        let y5 = combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = field(t + T::of(C5) * h, &y5);
        let y6 = combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if last_step { t1 } else { t + h };
        let k6 = field(t_new, &y6);
        let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = field(t_new, &y_new);

        let stages_ok = [&k2, &k3, &k4, &k5, &k6, &k7].iter().all(|k| all_finite(k)) && all_finite(&y_new);
        let err = if stages_ok {
            let mut acc = T::zero();
            for i in 0..N {
                let e = h * (T::of(E1) * k1[i] + T::of(E3) * k3[i] + T::of(E4) * k4[i]
                    + T::of(E5) * k5[i] + T::of(E6) * k6[i] + T::of(E7) * k7[i]);
                let r = e / scale(&y, &y_new, i);
                acc = acc + r * r;
            }
            (acc / T::of_usize(N.max(1))).sqrt()
        } else {
            T::infinity()
        };

        if err <= T::one() {
            let dense = DenseStep {
                t_old: t,
                h,
                r: {
                    let mut r = [[T::zero(); N]; 5];
                    for i in 0..N {
                        let dy = y_new[i] - y[i];
                        let bspl = h * k1[i] - dy;
                        r[0][i] = y[i];
                        r[1][i] = dy;
                        r[2][i] = bspl;
                        r[3][i] = dy - h * k7[i] - bspl;
                        r[4][i] = h * (T::of(D1) * k1[i] + T::of(D3) * k3[i] + T::of(D4) * k4[i]
                            + T::of(D5) * k5[i] + T::of(D6) * k6[i] + T::of(D7) * k7[i]);
                    }
                    r
                },
            };
            solution.accepted_steps += 1;
            if opts.output_times.is_some() {
                while let Some(&tau) = pending.last() {
                    if tau > t_new {
                        break;
                    }
                    let state = if tau == t_new { y_new } else { dense.eval(tau) };
                    solution.samples.push((tau, state));
                    pending.pop();
                }
            } else {
                solution.samples.push((t_new, y_new));
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            if last_step {
                return Ok(solution);
            }
            let mut factor = (T::of(0.9) * err.powf(T::of(-0.2))).min(T::of(5.0)).max(T::of(0.2));
            if last_rejected {
                factor = factor.min(T::one());
            }
            h = h * factor;
            last_rejected = false;
        } else {
            solution.rejected_steps += 1;
            let factor = if err.is_finite() {
                (T::of(0.9) * err.powf(T::of(-0.2))).max(T::of(0.1))
            } else {
                T::of(0.25)
            };
            h = h * factor;
            last_rejected = true;
        }
    }
}

/// Hairer–Wanner starting-step heuristic.
fn initial_step<T, const N: usize, F>(
    field: &mut F,
    t: T,
    y: &[T; N],
    f0: &[T; N],
    span: T,
    opts: &OdeOptions<T>,
) -> T
where
    T: Real,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let sk = |i: usize| opts.abs_tol + opts.rel_tol * y[i].abs();
    let rms = |v: &dyn Fn(usize) -> T| {
        let mut acc = T::zero();
        for i in 0..N {
            let r = v(i);
            acc = acc + r * r;
        }
        (acc / T::of_usize(N.max(1))).sqrt()
    };
    let d0 = rms(&|i| y[i] / sk(i));
    let d1 = rms(&|i| f0[i] / sk(i));
    let mut h0 = if d0 < T::of(1e-5) || d1 < T::of(1e-5) { T::of(1e-6) * span } else { T::of(0.01) * d0 / d1 };
    h0 = h0.min(span);
    let y1 = combine(y, h0, &[(1.0, f0)]);
    let f1 = field(t + h0, &y1);
    if !all_finite(&f1) {
        return T::of(1e-6) * span;
    }
    let d2 = rms(&|i| (f1[i] - f0[i]) / sk(i)) / h0;
    let h1 = if d1.max(d2) <= T::of(1e-15) {
        (T::of(1e-6)).max(h0 * T::of(1e-3))
    } else {
        (T::of(0.01) / d1.max(d2)).powf(T::of(0.2))
    };
    (T::of(100.0) * h0).min(h1).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_fall_velocity_integral() {
        let g = 980.7;
        let sol = ode_solve(|t: f64, _y: &[f64; 1]| [-g * t], [0.0], 0.0, 1.0, &OdeOptions::new(1e-10, 1e-12)).unwrap();
        let (t, y) = *sol.last().unwrap();
        assert_eq!(t, 1.0);
        assert!((y[0] + g / 2.0).abs() < 1e-8);
    }

    #[test]
    fn exponential_growth() {
        let sol = ode_solve(|_t: f64, y: &[f64; 1]| [y[0]], [1.0], 0.0, 1.0, &OdeOptions::new(1e-10, 1e-12)).unwrap();
        let y = sol.last().unwrap().1[0];
        assert!((y - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn dense_output_hits_requested_times() {
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let opts = OdeOptions::new(1e-9, 1e-12).with_output_times(times.clone());
        let sol = ode_solve(|_t: f64, y: &[f64; 2]| [y[1], -y[0]], [0.0, 1.0], 0.0, 2.0, &opts).unwrap();
        assert_eq!(sol.samples.len(), times.len());
        for ((t, y), expected) in sol.samples.iter().zip(&times) {
            assert_eq!(t, expected);
            assert!((y[0] - t.sin()).abs() < 1e-7, "t={t}");
        }
        assert!(sol.accepted_steps < times.len() * 4);
    }

    #[test]
    fn singular_field_reports_time() {
        // y' = 1/(0.5 - t) blows up at t = 0.5.
        let err = ode_solve(|t: f64, _y: &[f64; 1]| [1.0 / (0.5 - t).max(0.0)], [0.0], 0.0, 1.0, &OdeOptions::new(1e-8, 1e-10))
            .unwrap_err();
        assert!(matches!(err.kind, OdeFailureKind::StepUnderflow | OdeFailureKind::TooManySteps));
        assert!((err.time - 0.5).abs() < 1e-3, "{}", err.time);
        assert!(!err.partial.samples.is_empty());
    }

    #[test]
    fn times_strictly_increasing_and_span_endpoints_kept() {
        let sol = ode_solve(|t: f64, y: &[f64; 1]| [t.cos() * y[0]], [1.0], 0.0, 3.0, &OdeOptions::new(1e-8, 1e-10)).unwrap();
        assert_eq!(sol.samples.first().unwrap().0, 0.0);
        assert_eq!(sol.samples.last().unwrap().0, 3.0);
        assert!(sol.samples.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
