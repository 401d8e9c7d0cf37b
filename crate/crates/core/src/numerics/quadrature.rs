//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! The panel with the largest error estimate is always bisected first. Error
//! estimates follow the QUADPACK heuristics, including the round-off floor of
//! `50 ε ∫|f|`, so tolerances below that floor report non-convergence rather
//! than a silently optimistic result.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::real::{Integrable, Real};

/// Abscissae of the 21-point Kronrod rule on [-1, 1]; odd indices are the
/// 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Default cap on panel bisections per call.
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 20_000;

/// Outcome of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T, V = T> {
    pub value: V,
    pub error_estimate: T,
    pub evaluations: usize,
}

/// Why an integration failed.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureError<T, V = T> {
    InvalidArgument(&'static str),
    /// Budget exhausted or a panel could not be split further; carries the best estimate.
    NotConverged(QuadratureResult<T, V>),
}

impl<T: Real, V: Integrable<T>> fmt::Display for QuadratureError<T, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadratureError::InvalidArgument(msg) => write!(f, "invalid quadrature argument: {msg}"),
            QuadratureError::NotConverged(best) => write!(
                f,
                "quadrature did not converge after {} evaluations (|estimate| {:e}, error {:e})",
                best.evaluations,
                best.value.modulus(),
                best.error_estimate
            ),
        }
    }
}

impl<T: Real, V: Integrable<T>> std::error::Error for QuadratureError<T, V> {}

/// Tolerances and budget for [`integrate_with`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> QuadratureOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self { abs_tol, rel_tol, max_subdivisions: DEFAULT_MAX_SUBDIVISIONS }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T, V> {
    a: T,
    b: T,
    value: V,
    error: T,
}

impl<T: Real, V> PartialEq for Panel<T, V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real, V> Eq for Panel<T, V> {}

impl<T: Real, V> PartialOrd for Panel<T, V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real, V> Ord for Panel<T, V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// One application of the 21-point Kronrod rule with its embedded Gauss
/// error estimate.
fn kronrod21<T, V, F>(f: &mut F, a: T, b: T) -> Panel<T, V>
where
    T: Real,
    V: Integrable<T>,
    F: FnMut(T) -> V,
{
    let half = T::of(0.5);
    let center = (a + b) * half;
    let half_len = (b - a) * half;

    let fc = f(center);
    let mut res_k = fc * T::of(WGK[10]);
    let mut res_g = V::zero();
    let mut res_abs = fc.modulus() * T::of(WGK[10]);
    let mut samples = [(V::zero(), V::zero()); 10];

    for j in 0..10 {
        let dx = half_len * T::of(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[j] = (f1, f2);
        res_k = res_k + (f1 + f2) * T::of(WGK[j]);
        res_abs = res_abs + (f1.modulus() + f2.modulus()) * T::of(WGK[j]);
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * T::of(WG[j / 2]);
        }
    }

    let mean = res_k * half;
    let mut res_asc = (fc - mean).modulus() * T::of(WGK[10]);
    for (j, (f1, f2)) in samples.iter().enumerate() {
        res_asc = res_asc + ((*f1 - mean).modulus() + (*f2 - mean).modulus()) * T::of(WGK[j]);
    }

    let scale = half_len.abs();
    let value = res_k * half_len;
    res_abs = res_abs * scale;
    res_asc = res_asc * scale;
    let mut error = ((res_k - res_g) * half_len).modulus();
    if res_asc != T::zero() && error != T::zero() {
        let ratio = (T::of(200.0) * error / res_asc).powf(T::of(1.5));
        error = res_asc * ratio.min(T::one());
    }
    let fifty_eps = T::of(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        error = error.max(fifty_eps * res_abs);
    }
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]` until the error estimate is at most
/// `max(abs_tol, rel_tol·|result|)`.
pub fn integrate_adaptive<T, V, F>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<QuadratureResult<T, V>, QuadratureError<T, V>>
where
    T: Real,
    V: Integrable<T>,
    F: FnMut(T) -> V,
{
    integrate_with(f, &[a, b], &QuadratureOptions::new(abs_tol, rel_tol))
}

/// Like [`integrate_adaptive`] but starts from the panels delimited by the
/// strictly increasing `points` (at least two). Use it to place kinks,
/// sign changes or narrow peaks on panel boundaries.
pub fn integrate_adaptive_points<T, V, F>(
    f: F,
    points: &[T],
    abs_tol: T,
    rel_tol: T,
) -> Result<QuadratureResult<T, V>, QuadratureError<T, V>>
where
    T: Real,
    V: Integrable<T>,
    F: FnMut(T) -> V,
{
    integrate_with(f, points, &QuadratureOptions::new(abs_tol, rel_tol))
}

/// Integrates over the whole real line through the map `x = s / (1 - s²)`.
pub fn integrate_real_line<T, V, F>(
    mut f: F,
    abs_tol: T,
    rel_tol: T,
) -> Result<QuadratureResult<T, V>, QuadratureError<T, V>>
where
    T: Real,
    V: Integrable<T>,
    F: FnMut(T) -> V,
{
    let mapped = |s: T| {
        let d = T::one() - s * s;
        let x = s / d;
        f(x) * ((T::one() + s * s) / (d * d))
    };
    let opts = QuadratureOptions::new(abs_tol, rel_tol);
    integrate_with(mapped, &[-T::one(), T::zero(), T::one()], &opts)
}

/// General driver behind the other entry points.
pub fn integrate_with<T, V, F>(
    mut f: F,
    points: &[T],
    opts: &QuadratureOptions<T>,
) -> Result<QuadratureResult<T, V>, QuadratureError<T, V>>
where
    T: Real,
    V: Integrable<T>,
    F: FnMut(T) -> V,
{
    if points.len() < 2 {
        return Err(QuadratureError::InvalidArgument("need at least two breakpoints"));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(QuadratureError::InvalidArgument("breakpoints must be finite and strictly increasing"));
    }
    if !(opts.abs_tol >= T::zero() && opts.rel_tol >= T::zero())
        || (opts.abs_tol == T::zero() && opts.rel_tol == T::zero())
    {
        return Err(QuadratureError::InvalidArgument("tolerances must be non-negative and not both zero"));
    }

    let mut heap: BinaryHeap<Panel<T, V>> = BinaryHeap::with_capacity(points.len() + 64);
    let mut evaluations = 0usize;
    let mut value = V::zero();
    let mut error = T::zero();
    for w in points.windows(2) {
        let panel = kronrod21(&mut f, w[0], w[1]);
        evaluations += 21;
        value = value + panel.value;
        error = error + panel.error;
        heap.push(panel);
    }

    let target = |v: V| opts.abs_tol.max(opts.rel_tol * v.modulus());
    let mut subdivisions = 0usize;
    let mut stuck = false;

    while error > target(value) {
        if subdivisions >= opts.max_subdivisions {
            stuck = true;
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = (worst.a + worst.b) * T::of(0.5);
        if !(worst.a < mid && mid < worst.b) {
            heap.push(worst);
            stuck = true;
            break;
        }
        let left = kronrod21(&mut f, worst.a, mid);
        let right = kronrod21(&mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);

        // Re-sum occasionally so the running totals do not drift.
        if subdivisions % 256 == 0 {
            let (v, e) = resum(&heap);
            value = v;
            error = e;
        }
    }

    let (value, error) = resum(&heap);
    let result = QuadratureResult { value, error_estimate: error, evaluations };
    if stuck && error > target(value) {
        Err(QuadratureError::NotConverged(result))
    } else if !value.modulus().is_finite() {
        Err(QuadratureError::NotConverged(result))
    } else {
        Ok(result)
    }
}

fn resum<T: Real, V: Integrable<T>>(heap: &BinaryHeap<Panel<T, V>>) -> (V, T) {
    let mut panels: Vec<&Panel<T, V>> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    panels
        .iter()
        .fold((V::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::of(-x);
        nodes[n - 1 - i] = T::of(x);
        weights[i] = T::of(w);
        weights[n - 1 - i] = T::of(w);
    }
    (nodes, weights)
}
