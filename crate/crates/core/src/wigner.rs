//! Phase-space picture: the Wigner function of the evolved state, its
//! position marginal, the resulting mean position and the check that the
//! Wigner function is carried along the classical free-fall flow.
//!
//! With `ψ = envelope · exp(i p_c z / ħ)` and `p_c = m (u - gt)`, the
//! transform becomes
//! `D_w = (1/πħ) ∫ env*(z+y) env(z-y) exp(2i (p - p_c) y / ħ) dy`, so the
//! carrier never enters the quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, integrate_adaptive_points, NumericsError};
use crate::observables::{mean_z, width_breakdown};
use crate::units::{PacketParams, PhysicalConstants};
use crate::wavepacket::EvolvedState;

/// Number of momentum nodes used for the position marginal.
pub const MARGINAL_P_POINTS: usize = 2049;
/// Half-width of the momentum window in units of `ħ/σ0`.
pub const MARGINAL_P_HALF_WIDTH: f64 = 12.0;
/// Imaginary residual allowed in the transform, relative to `1/πħ`.
pub const REALNESS_TOL: f64 = 1e-8;

/// Point of phase space at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    /// cm
    pub z: f64,
    /// g·cm/s
    pub p: f64,
    /// s
    pub t: f64,
}

impl PhasePoint {
    pub fn new(z: f64, p: f64, t: f64) -> Result<Self> {
        if !(z.is_finite() && p.is_finite() && t.is_finite()) {
            return Err(Error::Domain(format!("phase point must be finite, got ({z}, {p}, {t})")));
        }
        Ok(Self { z, p, t })
    }

    /// `p²/2m + mgz`, erg.
    pub fn energy(&self, mass: f64, g: f64) -> f64 {
        self.p * self.p / (2.0 * mass) + mass * g * self.z
    }

    /// Starting point at `t = 0` of the classical free-fall path that
    /// reaches this point.
    pub fn flow_to_origin(&self, mass: f64, g: f64) -> PhasePoint {
        let t = self.t;
        PhasePoint { z: self.z - self.p / mass * t - 0.5 * g * t * t, p: self.p + mass * g * t, t: 0.0 }
    }
}

/// Value of the Wigner function at a phase point, in units of `1/(erg·s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSample {
    pub point: PhasePoint,
    pub value: f64,
    pub error_estimate: f64,
}

/// `D_w(z, p, t)` by adaptive quadrature over `|y| ≤ δ + 10σ_G`, where `δ`
/// is the separation of the sine components.
pub fn wigner(z: f64, p: f64, t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<WignerSample> {
    let st = EvolvedState::new(*params, *constants)?;
    wigner_state(&st, PhasePoint::new(z, p, t)?)
}

pub(crate) fn wigner_state(st: &EvolvedState, point: PhasePoint) -> Result<WignerSample> {
    let PhasePoint { z, p, t } = point;
    let hbar = st.constants.hbar;
    let sg = st.sigma_g(t);
    let delta = (hbar * t * st.beta / st.mass).abs();
    let reach = delta + 10.0 * sg;
    let kappa = 2.0 * (p - st.classical_momentum(t)) / hbar;
    let pieces = 40;
    let pts: Vec<f64> = (0..=pieces).map(|i| -reach + 2.0 * reach * i as f64 / pieces as f64).collect();
    let r = integrate_adaptive_points(
        |y: f64| st.envelope(z + y, t).conj() * st.envelope(z - y, t) * Complex64::from_polar(1.0, kappa * y),
        &pts,
        1e-12,
        1e-10,
    )
    .map_err(NumericsError::from)?;
    if r.value.im.abs() > REALNESS_TOL {
        return Err(Error::NonReal { imaginary: r.value.im.abs(), tolerance: REALNESS_TOL });
    }
    let scale = 1.0 / (PI * hbar);
    Ok(WignerSample { point, value: r.value.re * scale, error_estimate: r.error_estimate * scale })
}

/// Nodes per Gauss–Legendre panel of the fixed y-rule.
const ROW_NODES: usize = 16;
/// Upper bound on the number of y-panels of the fixed rule.
const ROW_MAX_PANELS: usize = 20_000;

/// `D_w(z, p0 + j·dp, t)` for `j = 0..n`.
///
/// The product `env*(z+y) env(z-y)` does not depend on `p`, so it is
/// sampled once on a composite 16-point Gauss–Legendre rule whose panels
/// resolve the fastest phase in the row, and every momentum reuses it.
pub fn wigner_row(
    z: f64,
    t: f64,
    p0: f64,
    dp: f64,
    n: usize,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<Vec<f64>> {
    let st = EvolvedState::new(*params, *constants)?;
    wigner_row_state(&st, z, t, p0, dp, n)
}

pub(crate) fn wigner_row_state(st: &EvolvedState, z: f64, t: f64, p0: f64, dp: f64, n: usize) -> Result<Vec<f64>> {
    let hbar = st.constants.hbar;
    let sg = st.sigma_g(t);
    let tau = st.tau(t);
    let delta = (hbar * t * st.beta / st.mass).abs();
    let reach = delta + 10.0 * sg;
    let pc = st.classical_momentum(t);
    let kappa0 = 2.0 * (p0 - pc) / hbar;
    let dkappa = 2.0 * dp / hbar;
    let kappa_last = kappa0 + dkappa * n.saturating_sub(1) as f64;
    // fastest phase: the transform itself, the sine components and the chirp
    let w = (z - st.classical_position(t)).abs();
    let rate = kappa0.abs().max(kappa_last.abs()) + 4.0 * st.beta + 2.0 * tau * (w + reach) / (sg * sg);
    let width = (0.5 * sg).min(8.0 / rate);
    let panels = ((2.0 * reach / width).ceil() as usize).clamp(2, ROW_MAX_PANELS);
    let (gx, gw) = gauss_legendre::<f64>(ROW_NODES);
    let h = 2.0 * reach / panels as f64;
    let mut ys = Vec::with_capacity(panels * ROW_NODES);
    let mut gs = Vec::with_capacity(panels * ROW_NODES);
    for k in 0..panels {
        let mid = -reach + (k as f64 + 0.5) * h;
        for (x, wt) in gx.iter().zip(&gw) {
            let y = mid + 0.5 * h * x;
            ys.push(y);
            gs.push(st.envelope(z + y, t).conj() * st.envelope(z - y, t) * (0.5 * h * wt));
        }
    }
    // rotate each node's phasor by exp(i dκ y) from one momentum to the next
    let mut phasors: Vec<Complex64> = ys.iter().map(|y| Complex64::from_polar(1.0, kappa0 * y)).collect();
    let steps: Vec<Complex64> = ys.iter().map(|y| Complex64::from_polar(1.0, dkappa * y)).collect();
    let scale = 1.0 / (PI * hbar);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        if j > 0 && j % 256 == 0 {
            // re-anchor to keep the recurrence error at rounding level
            let kappa = kappa0 + dkappa * j as f64;
            for (ph, y) in phasors.iter_mut().zip(&ys) {
                *ph = Complex64::from_polar(1.0, kappa * y);
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (g, ph) in gs.iter().zip(&phasors) {
            acc += g * ph;
        }
        if acc.im.abs() > REALNESS_TOL {
            return Err(Error::NonReal { imaginary: acc.im.abs(), tolerance: REALNESS_TOL });
        }
        out.push(acc.re * scale);
        for (ph, st) in phasors.iter_mut().zip(&steps) {
            *ph *= st;
        }
    }
    Ok(out)
}

/// Momentum at which the conditional momentum distribution at `z` is
/// centred: the classical momentum plus the chirp of the spreading packet.
pub(crate) fn local_momentum(st: &EvolvedState, z: f64, t: f64) -> f64 {
    let sg = st.sigma_g(t);
    st.classical_momentum(t) + st.constants.hbar * st.tau(t) * (z - st.classical_position(t)) / (2.0 * sg * sg)
}

/// Composite Simpson weights for an odd number of uniform nodes.
fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Position marginal `∫ D_w dp`, cm⁻¹, by Simpson's rule on
/// [`MARGINAL_P_POINTS`] nodes spanning `±12ħ/σ0` around the local momentum.
pub fn classical_density(z: f64, t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<f64> {
    let st = EvolvedState::new(*params, *constants)?;
    classical_density_state(&st, z, t)
}

pub(crate) fn classical_density_state(st: &EvolvedState, z: f64, t: f64) -> Result<f64> {
    let n = MARGINAL_P_POINTS;
    let half = MARGINAL_P_HALF_WIDTH * st.constants.hbar / st.params.sigma0;
    let centre = local_momentum(st, z, t);
    let h = 2.0 * half / (n - 1) as f64;
    let row = wigner_row_state(st, z, t, centre - half, h, n)?;
    let sum: f64 = row.iter().enumerate().map(|(i, d)| simpson_weight(i, n) * d).sum();
    Ok(sum * h / 3.0)
}

/// `∫ z ρ_C dz / ∫ ρ_C dz` with the marginal on 161 Simpson nodes over
/// `⟨z⟩ ± 8σ_NG`, cm.
pub fn wigner_mean_z(t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    let st = EvolvedState::new(*params, *constants)?;
    let width = width_breakdown(&st, t).sigma_ng;
    let centre = mean_z(t, params, constants);
    let n = 161;
    let h = 16.0 * width / (n - 1) as f64;
    let (mut norm, mut first) = (0.0, 0.0);
    for i in 0..n {
        let dz = -8.0 * width + i as f64 * h;
        let rho = classical_density_state(&st, centre + dz, t)?;
        let w = simpson_weight(i, n);
        norm += w * rho;
        first += w * dz * rho;
    }
    if !(norm > 0.0) {
        return Err(Error::Degenerate("position marginal vanishes".into()));
    }
    Ok(centre + first / norm)
}

/// `|D_w(z,p,t) - D_w(flow back to t = 0)|` relative to the peak scale
/// `1/πħ`. Exact transport holds for the linear potential, so this measures
/// quadrature error only.
pub fn liouville_transport_check(
    z: f64,
    p: f64,
    t: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("transport check needs t > 0, got {t}")));
    }
    let st = EvolvedState::new(*params, *constants)?;
    let here = PhasePoint::new(z, p, t)?;
    let there = here.flow_to_origin(st.mass, st.constants.g);
    let now = wigner_state(&st, here)?.value;
    let then = wigner_state(&st, there)?.value;
    Ok((now - then).abs() * PI * st.constants.hbar)
}

/// Smallest Wigner value on a `nz × np` grid over `±4σ_G` and
/// `±4ħ/σ0` around the local momentum.
pub fn negativity_scan(
    t: f64,
    nz: usize,
    np: usize,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<WignerSample> {
    if nz < 2 || np < 2 {
        return Err(Error::Domain("negativity scan needs at least a 2 x 2 grid".into()));
    }
    let st = EvolvedState::new(*params, *constants)?;
    let sg = st.sigma_g(t);
    let c = st.classical_position(t);
    let dp = 4.0 * st.constants.hbar / st.params.sigma0;
    let mut best: Option<PhasePoint> = None;
    let mut lowest = f64::INFINITY;
    for i in 0..nz {
        let z = c - 4.0 * sg + 8.0 * sg * i as f64 / (nz - 1) as f64;
        let p0 = local_momentum(&st, z, t) - dp;
        let step = 2.0 * dp / (np - 1) as f64;
        for (j, v) in wigner_row_state(&st, z, t, p0, step, np)?.into_iter().enumerate() {
            if v < lowest {
                lowest = v;
                best = Some(PhasePoint::new(z, p0 + j as f64 * step, t)?);
            }
        }
    }
    // report the minimum with the adaptive transform
    wigner_state(&st, best.expect("grid is non-empty"))
}
