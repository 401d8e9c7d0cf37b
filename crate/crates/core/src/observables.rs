//! Widths, means, peak positions, detection probabilities and mean arrival
//! times derived from the evolved packet.

use std::f64::consts::PI;

use crate::config::CutoffWidth;
use crate::error::{Error, Result};
use crate::numerics::{
    find_root_bracketed, fixed_point, integrate_adaptive_points, maximize_bracketed, NumericsError,
};
use crate::units::{PacketParams, PhysicalConstants};
use crate::wavepacket::EvolvedState;

/// The λ coefficients of the non-Gaussian width and the width itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthBreakdown {
    pub lambda0: f64,
    pub lambda2: f64,
    pub lambda4: f64,
    /// cm
    pub sigma_ng: f64,
}

/// RMS width of the evolved packet, in closed form.
pub fn sigma_ng(t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<WidthBreakdown> {
    check_time(t)?;
    let st = EvolvedState::new(*params, *constants)?;
    Ok(width_breakdown(&st, t))
}

pub(crate) fn width_breakdown(st: &EvolvedState, t: f64) -> WidthBreakdown {
    let (m, s0, hbar, al) = (st.mass, st.params.sigma0, st.constants.hbar, st.params.alpha);
    let sg = st.sigma_g(t);
    let e8 = (PI * PI / 8.0).exp();
    let e4 = (PI * PI / 4.0).exp();
    let e16 = (PI * PI / 16.0).exp();
    let pi2 = PI * PI;
    let m2 = m * m;
    let ht2 = hbar * hbar * t * t;
    let lambda0 = 64.0 * e4 * m2 * s0 * s0 * sg * sg;
    let lambda2 = 8.0 * e8 * pi2 * m2 * s0.powi(4) * (1.0 - 2.0 * e16)
        + 64.0 * e8 * m2 * s0 * s0 * sg * sg * (e8 - 1.0)
        + 2.0 * e4 * pi2 * ht2;
    let lambda4 =
        (e8 - 1.0) * (16.0 * m2 * s0 * s0 * sg * sg * (e8 - 1.0) + 4.0 * pi2 * m2 * s0.powi(4) + e8 * pi2 * ht2);
    let a2 = al * al;
    let sigma_ng = (lambda0 + lambda2 * a2 + lambda4 * a2 * a2).sqrt() / (4.0 * m * s0 * (2.0 * e8 + a2 * (e8 - 1.0)));
    WidthBreakdown { lambda0, lambda2, lambda4, sigma_ng }
}

/// Offset of the initial mean from the Gaussian centre, cm.
pub fn initial_mean_offset(params: &PacketParams) -> f64 {
    let a = params.alpha;
    PI * a * params.sigma0 * (-PI * PI / 32.0).exp() / (2.0 + a * a * (1.0 - (-PI * PI / 8.0).exp()))
}

/// `⟨z⟩(t)`, cm. The mass does not enter.
pub fn mean_z(t: f64, params: &PacketParams, constants: &PhysicalConstants) -> f64 {
    initial_mean_offset(params) + (params.u * t - 0.5 * constants.g * t * t)
}

/// `⟨p⟩(t) = m (u - gt)`, g·cm/s.
pub fn mean_p(t: f64, params: &PacketParams, constants: &PhysicalConstants) -> f64 {
    params.mass(constants) * (params.u - constants.g * t)
}

/// Residuals of `m d⟨z⟩/dt = ⟨p⟩` and `d⟨p⟩/dt = -mg`, with both derivatives
/// taken numerically and the results made relative to `m u` and `m g`.
pub fn ehrenfest_residuals(t: f64, params: &PacketParams, constants: &PhysicalConstants) -> (f64, f64) {
    use crate::numerics::{derivative_fd, DerivativeOrder};
    let m = params.mass(constants);
    let h = 1e-3 * (t.abs() + params.u.abs() / constants.g + 1e-3);
    let dz = derivative_fd(|s| mean_z(s, params, constants), t, DerivativeOrder::First, h).value;
    let dp = derivative_fd(|s| mean_p(s, params, constants), t, DerivativeOrder::First, h).value;
    let pscale = m * params.u.abs().max(constants.g * t.abs()).max(1e-300);
    ((m * dz - mean_p(t, params, constants)).abs() / pscale, (dp + m * constants.g).abs() / (m * constants.g))
}

/// Norm, mean and variance of the density by adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Breakpoints spanning `centre ± half_span·width`, one per width.
fn window(centre: f64, width: f64, half_span: i32) -> Vec<f64> {
    (-half_span..=half_span).map(|k| centre + k as f64 * width).collect()
}

/// Moments of `ρ(·, t)` integrated over `⟨z⟩ ± 16 σ_NG`.
pub fn moments_by_quadrature(t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<Moments> {
    check_time(t)?;
    let st = EvolvedState::new(*params, *constants)?;
    let width = width_breakdown(&st, t).sigma_ng;
    let centre = mean_z(t, params, constants);
    let pts = window(centre, width, 16);
    let norm = integrate_adaptive_points(|z| st.density(z, t), &pts, 0.0, 1e-13).map_err(NumericsError::from)?.value;
    // moments about the analytic mean keep the integrands small
    let first = integrate_adaptive_points(|z| (z - centre) * st.density(z, t), &pts, 1e-13 * width, 1e-12)
        .map_err(NumericsError::from)?
        .value;
    let second = integrate_adaptive_points(|z| (z - centre).powi(2) * st.density(z, t), &pts, 0.0, 1e-13)
        .map_err(NumericsError::from)?
        .value;
    let shift = first / norm;
    Ok(Moments { norm, mean: centre + shift, variance: second / norm - shift * shift })
}

/// Location of the global maximum of the density at time `t`, cm.
///
/// A 513-point scan over `⟨z⟩ ± 4σ_NG` (widened once to ±8σ_NG if the best
/// sample sits on the edge) brackets the maximum, golden-section search
/// narrows it, and a root of the exact gradient polishes it to rounding
/// level so that mass-induced shifts of 1e-10 cm stay resolvable.
pub fn z_peak(t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<f64> {
    check_time(t)?;
    let st = EvolvedState::new(*params, *constants)?;
    z_peak_state(&st, t)
}

pub(crate) fn z_peak_state(st: &EvolvedState, t: f64) -> Result<f64> {
    const SCAN: usize = 513;
    let width = width_breakdown(st, t).sigma_ng;
    let centre = mean_z(t, &st.params, &st.constants);
    let mut bracket = None;
    for span in [4.0, 8.0] {
        let lo = centre - span * width;
        let h = 2.0 * span * width / (SCAN - 1) as f64;
        let best = (0..SCAN)
            .map(|i| (i, st.density(lo + i as f64 * h, t)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best.0 > 0 && best.0 < SCAN - 1 {
            bracket = Some((lo + (best.0 - 1) as f64 * h, lo + (best.0 + 1) as f64 * h));
            break;
        }
    }
    let (lo, hi) = bracket.ok_or(NumericsError::BracketFailure {
        lo: centre - 8.0 * width,
        hi: centre + 8.0 * width,
        best: f64::NAN,
    })?;
    let coarse = maximize_bracketed(|z| st.density(z, t), lo, hi, 1e-9)?;
    let grad = |z: f64| st.density_gradient(z, t);
    let (gl, gh) = (grad(lo), grad(hi));
    if gl > 0.0 && gh < 0.0 {
        return Ok(find_root_bracketed(grad, lo, hi, 0.0)?);
    }
    Ok(coarse.x)
}

/// Probability of detection in a window around a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbability {
    pub value: f64,
    /// cm
    pub center: f64,
    /// cm
    pub half_width: f64,
    /// s
    pub at_time: f64,
}

/// `∫ρ(z, t) dz` over `[center - ε, center + ε]`.
pub fn detection_probability(
    center: f64,
    epsilon: f64,
    t: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<DetectionProbability> {
    check_time(t)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("detector half-width must be > 0, got {epsilon}")));
    }
    if !center.is_finite() {
        return Err(Error::Domain("detector centre must be finite".into()));
    }
    let st = EvolvedState::new(*params, *constants)?;
    let width = width_breakdown(&st, t).sigma_ng;
    let scale = st.sigma_g(t).min(width);
    // beyond 40 widths the density is below any double-precision sum
    let mean = mean_z(t, params, constants);
    let lo = (center - epsilon).max(mean - 40.0 * width);
    let hi = (center + epsilon).min(mean + 40.0 * width);
    if !(hi > lo) {
        return Ok(DetectionProbability { value: 0.0, center, half_width: epsilon, at_time: t });
    }
    let panels = (((hi - lo) / (0.5 * scale)).ceil() as usize).clamp(1, 512);
    let pts: Vec<f64> = (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect();
    let r = integrate_adaptive_points(|z| st.density(z, t), &pts, 1e-15, 1e-11).map_err(NumericsError::from)?;
    Ok(DetectionProbability { value: r.value.clamp(0.0, 1.0), center, half_width: epsilon, at_time: t })
}

/// Classical turning time `u/g` and height `u²/2g`.
pub fn turning_point(params: &PacketParams, constants: &PhysicalConstants) -> (f64, f64) {
    let t1 = params.u / constants.g;
    (t1, params.u * t1 - 0.5 * constants.g * t1 * t1)
}

/// Detection around the classical turning point at the turning time.
pub fn detection_at_turning_point(
    epsilon: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<DetectionProbability> {
    let (t1, z_max) = turning_point(params, constants);
    detection_probability(z_max, epsilon, t1, params, constants)
}

/// Detection around the launch point when the packet returns, `t = 2u/g`.
pub fn detection_at_return(
    epsilon: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<DetectionProbability> {
    let t2 = 2.0 * params.u / constants.g;
    detection_probability(0.0, epsilon, t2, params, constants)
}

fn cutoff_width(st: &EvolvedState, t: f64, which: CutoffWidth) -> f64 {
    match which {
        CutoffWidth::NonGaussian => width_breakdown(st, t).sigma_ng,
        CutoffWidth::Gaussian => st.sigma_g(t),
    }
}

fn check_arrival(z_detector: f64, params: &PacketParams) -> Result<()> {
    if !(z_detector < 0.0 && z_detector.is_finite()) {
        return Err(Error::Domain(format!("detector must be below the release point, got Z = {z_detector}")));
    }
    if params.u != 0.0 {
        return Err(Error::Domain(format!("arrival times assume release from rest, got u = {}", params.u)));
    }
    Ok(())
}

/// Self-consistent cutoff `T = sqrt(2(|Z| + 3σ_T(T))/g)`, s, with σ_T the
/// non-Gaussian width.
pub fn arrival_cutoff_t(z_detector: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<f64> {
    arrival_cutoff_t_with(z_detector, params, constants, CutoffWidth::NonGaussian)
}

pub fn arrival_cutoff_t_with(
    z_detector: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
    which: CutoffWidth,
) -> Result<f64> {
    check_arrival(z_detector, params)?;
    let st = EvolvedState::new(*params, *constants)?;
    cutoff_state(&st, z_detector, which)
}

fn cutoff_state(st: &EvolvedState, z_detector: f64, which: CutoffWidth) -> Result<f64> {
    let g = st.constants.g;
    let depth = z_detector.abs();
    let t0 = (2.0 * depth / g).sqrt();
    let fp = fixed_point(|t| (2.0 * (depth + 3.0 * cutoff_width(st, t, which)) / g).sqrt(), t0, 1e-10, 500)?;
    Ok(fp.x)
}

/// Mean arrival time at a detector together with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalTimeResult {
    /// s
    pub tau_mean: f64,
    /// s
    pub cutoff_t: f64,
    /// Width entering the cutoff, evaluated at the cutoff, cm.
    pub sigma_at_t: f64,
    /// `∫ |J| t dt`
    pub numerator: f64,
    /// `∫ |J| dt`
    pub denominator: f64,
    pub zero_crossings_of_j: usize,
}

/// `τ̄ = ∫|J(Z,t)| t dt / ∫|J(Z,t)| dt` over `[0, T]`.
pub fn mean_arrival_time(
    z_detector: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<ArrivalTimeResult> {
    mean_arrival_time_with(z_detector, params, constants, CutoffWidth::NonGaussian)
}

pub fn mean_arrival_time_with(
    z_detector: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
    which: CutoffWidth,
) -> Result<ArrivalTimeResult> {
    const SCAN: usize = 2049;
    check_arrival(z_detector, params)?;
    let st = EvolvedState::new(*params, *constants)?;
    let cutoff = cutoff_state(&st, z_detector, which)?;
    let j = |t: f64| st.current(z_detector, t);

    // sample J, then put every sign change on a panel boundary so each
    // panel sees a smooth |J|
    let ts: Vec<f64> = (0..SCAN).map(|i| cutoff * i as f64 / (SCAN - 1) as f64).collect();
    let js: Vec<f64> = ts.iter().map(|&t| j(t)).collect();
    let mut points = Vec::with_capacity(SCAN + 8);
    let mut crossings = 0;
    for i in 0..SCAN - 1 {
        points.push(ts[i]);
        if js[i] != 0.0 && js[i + 1] != 0.0 && (js[i] > 0.0) != (js[i + 1] > 0.0) {
            crossings += 1;
            let root = find_root_bracketed(j, ts[i], ts[i + 1], 1e-15 * cutoff)?;
            if root > ts[i] && root < ts[i + 1] {
                points.push(root);
            }
        }
    }
    points.push(cutoff);

    let den = integrate_adaptive_points(|t| j(t).abs(), &points, 0.0, 1e-10).map_err(NumericsError::from)?.value;
    if !(den > 1e-300) {
        return Err(Error::Degenerate(format!(
            "current at Z = {z_detector} cm integrates to {den:e} before the cutoff {cutoff} s"
        )));
    }
    let num =
        integrate_adaptive_points(|t| j(t).abs() * t, &points, 0.0, 1e-10).map_err(NumericsError::from)?.value;
    Ok(ArrivalTimeResult {
        tau_mean: num / den,
        cutoff_t: cutoff,
        sigma_at_t: cutoff_width(&st, cutoff, which),
        numerator: num,
        denominator: den,
        zero_crossings_of_j: crossings,
    })
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite and >= 0, got {t}")))
    }
}
