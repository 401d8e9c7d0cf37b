//! Bohmian picture: guidance velocity `v = J/ρ`, the quantum potential,
//! single trajectories, fans of trajectories and an equivariance test of
//! an ensemble.
//!
//! Trajectories are integrated in the comoving offset
//! `ξ = z - (ut - gt²/2)`, which keeps the relative tolerance meaningful
//! when the packet has fallen far compared with its width.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{derivative_fd, ode_solve, DerivativeOrder, NumericsError, OdeFailureKind, OdeOptions};
use crate::observables::{initial_mean_offset, mean_z, width_breakdown};
use crate::units::{PacketParams, PhysicalConstants};
use crate::wavepacket::EvolvedState;

/// Densities below this fraction of the peak scale count as a node.
pub const NODE_FRACTION: f64 = 1e-12;
/// Relative tolerance of the trajectory integrator.
pub const TRAJECTORY_REL_TOL: f64 = 1e-10;
/// Absolute tolerance of the trajectory integrator in units of σ0.
pub const TRAJECTORY_ABS_TOL: f64 = 1e-10;
/// Kolmogorov distance times `√n` below which a sample is accepted at the
/// 95% level.
pub const KS_CRITICAL_95: f64 = 1.358;

/// `N² σ0 / σ_G`, the peak of the Gaussian term of the density. The true
/// peak lies within a factor `(1 + α)²` of it.
fn peak_scale(st: &EvolvedState, t: f64) -> f64 {
    st.norm * st.norm * st.params.sigma0 / st.sigma_g(t)
}

fn guard(st: &EvolvedState, z: f64, t: f64) -> Result<f64> {
    let rho = st.density(z, t);
    if rho >= NODE_FRACTION * peak_scale(st, t) {
        Ok(rho)
    } else {
        Err(Error::NodeProximity { z, t, density: rho })
    }
}

/// Guidance velocity `J/ρ`, cm/s.
pub fn bohm_velocity(z: f64, t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<f64> {
    let st = EvolvedState::new(*params, *constants)?;
    velocity_state(&st, z, t)
}

pub(crate) fn velocity_state(st: &EvolvedState, z: f64, t: f64) -> Result<f64> {
    let rho = guard(st, z, t)?;
    Ok(st.current(z, t) / rho)
}

/// Quantum potential and its gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumForceSample {
    /// cm
    pub z: f64,
    /// s
    pub t: f64,
    /// erg
    pub q: f64,
    /// erg/cm
    pub dq_dz: f64,
}

/// `Q = -(ħ²/2m) (√ρ)''/√ρ`.
///
/// `(√ρ)''/√ρ = ρ''/2ρ - (ρ'/2ρ)²` uses the exact derivatives of the density
/// expansion; the gradient of `Q` is taken by Richardson-extrapolated
/// differences.
pub fn quantum_potential(
    z: f64,
    t: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<QuantumForceSample> {
    let st = EvolvedState::new(*params, *constants)?;
    potential_state(&st, z, t)
}

fn q_value(st: &EvolvedState, z: f64, t: f64) -> f64 {
    let jet = st.density_jet(z, t);
    let hbar = st.constants.hbar;
    let ratio = jet.d2 / (2.0 * jet.value) - (jet.d1 / (2.0 * jet.value)).powi(2);
    -hbar * hbar / (2.0 * st.mass) * ratio
}

pub(crate) fn potential_state(st: &EvolvedState, z: f64, t: f64) -> Result<QuantumForceSample> {
    guard(st, z, t)?;
    let sg = st.sigma_g(t);
    let q = q_value(st, z, t);
    let d = derivative_fd(|x| q_value(st, x, t), z, DerivativeOrder::First, 0.05 * sg);
    if !(q.is_finite() && d.value.is_finite()) {
        return Err(Error::NodeProximity { z, t, density: st.density(z, t) });
    }
    Ok(QuantumForceSample { z, t, q, dq_dz: d.value })
}

/// One sample along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    /// s
    pub t: f64,
    /// cm
    pub z: f64,
    /// cm/s
    pub v: f64,
}

/// A Bohmian trajectory sampled at uniform times.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPath {
    /// Start relative to `⟨z⟩(0)`, cm.
    pub start_offset: f64,
    pub samples: Vec<TrajectorySample>,
    /// Why integration stopped before `t_end`, if it did.
    pub terminated_early: Option<String>,
}

impl TrajectoryPath {
    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }
}

/// Free-fall time of the packet centre down to `z = -1 cm`, s.
pub fn default_t_end(params: &PacketParams, constants: &PhysicalConstants) -> f64 {
    let (u, g) = (params.u, constants.g);
    (u + (u * u + 2.0 * g).sqrt()) / g
}

fn ode_options(st: &EvolvedState) -> OdeOptions<f64> {
    let s0 = st.params.sigma0;
    let spreading_time = 2.0 * st.mass * s0 * s0 / st.constants.hbar;
    let mut opts = OdeOptions::new(TRAJECTORY_REL_TOL, TRAJECTORY_ABS_TOL * s0).with_initial_step(1e-3 * spreading_time);
    opts.max_steps = 1_000_000;
    opts
}

/// Integrates `ξ' = v(z_c + ξ, t) - (u - gt)` on `[0, t_end]`, reporting the
/// states at `times`. Returns the samples reached and the failure, if any.
fn integrate(
    st: &EvolvedState,
    xi0: f64,
    t_end: f64,
    times: Vec<f64>,
) -> (Vec<(f64, f64)>, Option<String>) {
    let field = |t: f64, y: &[f64; 1]| {
        let z = st.classical_position(t) + y[0];
        match velocity_state(st, z, t) {
            Ok(v) => [v - (st.params.u - st.constants.g * t)],
            Err(_) => [f64::NAN],
        }
    };
    let opts = ode_options(st).with_output_times(times);
    match ode_solve(field, [xi0], 0.0, t_end, &opts) {
        Ok(sol) => (sol.samples.into_iter().map(|(t, y)| (t, y[0])).collect(), None),
        Err(fail) => {
            let reason = match fail.kind {
                OdeFailureKind::StepUnderflow => {
                    format!("guidance field singular near a node at t = {:e} s", fail.time)
                }
                _ => fail.to_string(),
            };
            (fail.partial.samples.into_iter().map(|(t, y)| (t, y[0])).collect(), Some(reason))
        }
    }
}

/// Trajectory from `⟨z⟩(0) + start_offset`, sampled at `n_samples` uniform
/// times on `[0, t_end]`. A node encountered on the way ends the path early.
pub fn bohm_trajectory(
    start_offset: f64,
    t_end: f64,
    n_samples: usize,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<TrajectoryPath> {
    let st = EvolvedState::new(*params, *constants)?;
    trajectory_state(&st, start_offset, t_end, n_samples)
}

pub(crate) fn trajectory_state(
    st: &EvolvedState,
    start_offset: f64,
    t_end: f64,
    n_samples: usize,
) -> Result<TrajectoryPath> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be > 0, got {t_end}")));
    }
    if n_samples < 2 {
        return Err(Error::Domain("a trajectory needs at least 2 samples".into()));
    }
    let xi0 = initial_mean_offset(&st.params) + start_offset;
    guard(st, xi0, 0.0)?;
    let times: Vec<f64> = (1..n_samples).map(|i| t_end * i as f64 / (n_samples - 1) as f64).collect();
    let (raw, reason) = integrate(st, xi0, t_end, times);
    let mut samples = Vec::with_capacity(raw.len());
    let mut reason = reason;
    for (t, xi) in raw {
        let z = st.classical_position(t) + xi;
        match velocity_state(st, z, t) {
            Ok(v) => samples.push(TrajectorySample { t, z, v }),
            Err(e) => {
                reason.get_or_insert_with(|| e.to_string());
                break;
            }
        }
    }
    Ok(TrajectoryPath { start_offset, samples, terminated_early: reason })
}

/// One trajectory per offset, integrated independently. Failures of one
/// path do not affect the others.
pub fn trajectory_fan(
    offsets: &[f64],
    t_end: f64,
    n_samples: usize,
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<Vec<Result<TrajectoryPath>>> {
    let st = EvolvedState::new(*params, *constants)?;
    Ok(offsets.par_iter().map(|&o| trajectory_state(&st, o, t_end, n_samples)).collect())
}

/// Default fan offsets: the mean and `∓2σ0` around it.
pub fn default_offsets(params: &PacketParams) -> Vec<f64> {
    vec![0.0, -2.0 * params.sigma0, 2.0 * params.sigma0]
}

/// Acceleration along a path from finite differences of the integrated
/// velocity, against gravity plus the quantum force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResidual {
    pub t: f64,
    pub z: f64,
    /// cm/s², from the path
    pub accel_path: f64,
    /// cm/s², `-g - (1/m) ∂Q/∂z`
    pub accel_force: f64,
    /// `|difference| / max(|accel_force|, g)`
    pub residual: f64,
}

/// Checks `m z̈ = -mg - ∂Q/∂z` at the given times along the path starting at
/// `⟨z⟩(0) + start_offset`.
pub fn newton_residuals(
    start_offset: f64,
    check_times: &[f64],
    params: &PacketParams,
    constants: &PhysicalConstants,
) -> Result<Vec<NewtonResidual>> {
    let st = EvolvedState::new(*params, *constants)?;
    let s0 = params.sigma0;
    let spreading_time = 2.0 * st.mass * s0 * s0 / constants.hbar;
    let mut times = Vec::new();
    let mut steps = Vec::new();
    for &t in check_times {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("check times must be > 0, got {t}")));
        }
        let h = 1e-3 * t.min(spreading_time * (1.0 + (t / spreading_time).powi(2)));
        steps.push(h);
        times.extend([t - h, t, t + h]);
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|a, b| times[*a].total_cmp(&times[*b]));
    let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
    if sorted.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("check times too close together".into()));
    }
    let t_end = *sorted.last().expect("at least one check time");
    let xi0 = initial_mean_offset(params) + start_offset;
    guard(&st, xi0, 0.0)?;
    let (raw, reason) = integrate(&st, xi0, t_end, sorted.clone());
    if let Some(r) = reason {
        return Err(Error::Numerics(NumericsError::OdeFailed { time: raw.last().map_or(0.0, |s| s.0), reason: r }));
    }
    let state_at = |t: f64| -> Result<(f64, f64)> {
        let xi = raw.iter().find(|s| s.0 == t).map(|s| s.1).ok_or_else(|| Error::Domain("missing sample".into()))?;
        let z = st.classical_position(t) + xi;
        Ok((z, velocity_state(&st, z, t)?))
    };
    let mut out = Vec::with_capacity(check_times.len());
    for (&t, &h) in check_times.iter().zip(&steps) {
        let (_, v_minus) = state_at(t - h)?;
        let (z, _) = state_at(t)?;
        let (_, v_plus) = state_at(t + h)?;
        let accel_path = (v_plus - v_minus) / (2.0 * h);
        let force = potential_state(&st, z, t)?;
        let accel_force = -constants.g - force.dq_dz / st.mass;
        let residual = (accel_path - accel_force).abs() / accel_force.abs().max(constants.g);
        out.push(NewtonResidual { t, z, accel_path, accel_force, residual });
    }
    Ok(out)
}

/// Outcome of the equivariance test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivarianceReport {
    /// Kolmogorov–Smirnov distance to the CDF of `ρ(·, t_check)`.
    pub ks: f64,
    pub n_used: usize,
    pub failures: usize,
}

/// Nodes of the tabulated CDFs.
const CDF_POINTS: usize = 20_001;

/// Cumulative trapezoid of the density over `⟨z⟩ ± 12σ_NG`.
fn tabulated_cdf(st: &EvolvedState, t: f64) -> (Vec<f64>, Vec<f64>) {
    let width = width_breakdown(st, t).sigma_ng;
    let centre = mean_z(t, &st.params, &st.constants);
    let lo = centre - 12.0 * width;
    let h = 24.0 * width / (CDF_POINTS - 1) as f64;
    let zs: Vec<f64> = (0..CDF_POINTS).map(|i| lo + i as f64 * h).collect();
    let rho: Vec<f64> = zs.iter().map(|&z| st.density(z, t)).collect();
    let mut cdf = vec![0.0; CDF_POINTS];
    for i in 1..CDF_POINTS {
        cdf[i] = cdf[i - 1] + 0.5 * h * (rho[i - 1] + rho[i]);
    }
    let total = cdf[CDF_POINTS - 1];
    cdf.iter_mut().for_each(|c| *c /= total);
    (zs, cdf)
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => ys[i],
        Err(0) => ys[0],
        Err(i) if i >= xs.len() => ys[xs.len() - 1],
        Err(i) => {
            let f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + f * (ys[i] - ys[i - 1])
        }
    }
}

/// Samples `n_particles` starts from `ρ(·, 0)` by inverse CDF, carries each
/// along its trajectory to `t_check` and measures the KS distance to
/// `ρ(·, t_check)`. Sampling is sequential from one seeded stream, so the
/// result does not depend on how the transport is scheduled.
pub fn equivariance_statistic(
    n_particles: usize,
    t_check: f64,
    params: &PacketParams,
    constants: &PhysicalConstants,
    seed: u64,
) -> Result<EquivarianceReport> {
    if n_particles < 100 {
        return Err(Error::Domain(format!("need at least 100 particles, got {n_particles}")));
    }
    if !(t_check >= 0.0 && t_check.is_finite()) {
        return Err(Error::Domain(format!("check time must be >= 0, got {t_check}")));
    }
    let st = EvolvedState::new(*params, *constants)?;
    let (z0, cdf0) = tabulated_cdf(&st, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<f64> = (0..n_particles).map(|_| interpolate(&cdf0, &z0, rng.gen::<f64>())).collect();

    let ends: Vec<Option<f64>> = if t_check == 0.0 {
        starts.iter().map(|&z| Some(z)).collect()
    } else {
        starts
            .par_iter()
            .map(|&z| {
                guard(&st, z, 0.0).ok()?;
                let (raw, reason) = integrate(&st, z, t_check, vec![t_check]);
                match (reason, raw.last()) {
                    (None, Some(&(t, xi))) if t == t_check => Some(st.classical_position(t) + xi),
                    _ => None,
                }
            })
            .collect()
    };
    let mut finals: Vec<f64> = ends.iter().flatten().copied().collect();
    let failures = n_particles - finals.len();
    if failures * 100 > n_particles {
        return Err(Error::Degenerate(format!("{failures} of {n_particles} trajectories failed")));
    }
    finals.sort_by(f64::total_cmp);
    let (zt, cdft) = tabulated_cdf(&st, t_check);
    let n = finals.len() as f64;
    let ks = finals
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let f = interpolate(&zt, &cdft, z);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(EquivarianceReport { ks, n_used: finals.len(), failures })
}
