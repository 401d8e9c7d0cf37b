//! One-dimensional maximization and root bracketing.

use crate::real::Real;

use super::NumericsError;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum<T> {
    pub x: T,
    pub value: T,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Fails with [`NumericsError::BracketFailure`] when an endpoint is at least
/// as high as the best interior point, which means the true maximum may lie
/// outside the bracket.
pub fn maximize_bracketed<T, F>(mut f: F, lo: T, hi: T, x_tol: T) -> Result<Maximum<T>, NumericsError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !(lo < hi) || !(x_tol > T::zero()) {
        return Err(NumericsError::InvalidArgument("maximize_bracketed needs lo < hi and x_tol > 0".into()));
    }
    let inv_phi = T::of(0.618_033_988_749_894_8);
    let mut a = lo;
    let mut b = hi;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > x_tol && iterations < 500 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
        let mid = (a + b) * T::of(0.5);
        if !(a < mid && mid < b) {
            break;
        }
    }
    let (x, value) = if fc > fd { (c, fc) } else { (d, fd) };
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo >= value || f_hi >= value {
        return Err(NumericsError::BracketFailure {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
            best: x.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(Maximum { x, value })
}

/// Brent's method for a root of `f` in `[lo, hi]`; `f(lo)` and `f(hi)` must
/// differ in sign (or one of them be zero).
pub fn find_root_bracketed<T, F>(mut f: F, lo: T, hi: T, x_tol: T) -> Result<T, NumericsError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) || fa.is_nan() || fb.is_nan() {
        return Err(NumericsError::RootNotBracketed {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }
    let two = T::of(2.0);
    let half = T::of(0.5);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * x_tol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::of(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else if m > T::zero() { b + tol } else { b - tol };
        fb = f(b);
    }
    Ok(b)
}
