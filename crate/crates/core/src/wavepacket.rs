//! Closed-form evolution of the sine-modulated Gaussian packet in a uniform
//! gravitational field.
//!
//! The initial state is `N [1 + α sin(βz)] exp(-z²/4σ0² + i k0 z)` with
//! `β = π/4σ0`. Writing the sine as two exponentials turns it into three
//! Gaussians with wave numbers `k0`, `k0 ± β`, each of which evolves in
//! closed form under the linear-potential propagator.
//!
//! Two evaluation routes are used:
//!
//! * the density and current use the six-exponent expansion of `|ψ|²`. The
//!   printed factorization `e^{E1}[e^{E2} + …]` overflows away from the
//!   centre, so every additive term carries its combined exponent, which is
//!   a non-positive quadratic in the comoving coordinate;
//! * the amplitude itself is evaluated in comoving form: a carrier phase
//!   `(m/ħ)(u - gt) z`, a chirp and three real Gaussians centred at
//!   `w = 0, ±ħtβ/m`. This avoids squaring the huge `m z²/2ħt` phase of the
//!   literal expression.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{PacketParams, PhysicalConstants};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `N` such that the initial density integrates to one, cm^(-1/2).
pub fn normalization(alpha: f64, sigma0: f64) -> f64 {
    let bracket = 1.0 + 0.5 * alpha * alpha * (1.0 - (-PI * PI / 8.0).exp());
    ((2.0 * PI).sqrt() * sigma0 * bracket).powf(-0.5)
}

/// Initial amplitude at `z`.
pub fn psi_initial(z: f64, params: &PacketParams, constants: &PhysicalConstants) -> Complex64 {
    let n = normalization(params.alpha, params.sigma0);
    let s0 = params.sigma0;
    let envelope = n * (1.0 + params.alpha * (params.beta() * z).sin()) * (-z * z / (4.0 * s0 * s0)).exp();
    Complex64::from_polar(envelope, params.k0(constants) * z)
}

/// Kernel `G(z, t | y, 0)` of the linear potential `V = m g z`, cm⁻¹.
///
/// `mass` is in grams. The kernel is singular at `t = 0`.
pub fn propagator(z: f64, t: f64, y: f64, mass: f64, constants: &PhysicalConstants) -> Result<Complex64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("propagator needs t > 0, got {t}")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("propagator needs a positive mass, got {mass}")));
    }
    let (hbar, g) = (constants.hbar, constants.g);
    let pref = (Complex64::from(mass / (2.0 * PI * hbar * t)) / I).sqrt();
    let phase = mass / (2.0 * hbar * t) * (z - y) * (z - y)
        - mass * g * t / (2.0 * hbar) * (z + y)
        - mass * g * g * t * t * t / (24.0 * hbar);
    Ok(pref * Complex64::from_polar(1.0, phase))
}

/// Evolved amplitude `ψ(z, t)`; `t = 0` returns the initial state.
pub fn psi_t(z: f64, t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<Complex64> {
    Ok(EvolvedState::checked(params, constants, t)?.psi(z, t))
}

/// Width of the Gaussian packet with the same σ0 and mass, cm.
pub fn sigma_gaussian(t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<f64> {
    Ok(EvolvedState::checked(params, constants, t)?.sigma_g(t))
}

/// Probability density, cm⁻¹.
pub fn density(z: f64, t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<f64> {
    Ok(EvolvedState::checked(params, constants, t)?.density(z, t))
}

/// Probability current, s⁻¹.
pub fn current(z: f64, t: f64, params: &PacketParams, constants: &PhysicalConstants) -> Result<f64> {
    Ok(EvolvedState::checked(params, constants, t)?.current(z, t))
}

/// The six exponents and three phases of the density expansion, as printed
/// (not combined). `e[0]` is `E1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub e: [f64; 6],
    pub a: [f64; 3],
}

/// Additive decomposition of the density: the Gaussian term, two terms
/// linear in α and three quadratic in α. Term `k` contributes
/// `prefactor · factor[k] · exp(log_magnitude[k])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTerms {
    /// `N² σ0 / σ_G`
    pub prefactor: f64,
    /// Combined exponents, all ≤ 0.
    pub log_magnitude: [f64; 6],
    /// α-dependent coefficient times the trigonometric factor.
    pub factor: [f64; 6],
}

impl DensityTerms {
    pub fn sum(&self) -> f64 {
        let s: f64 = self.log_magnitude.iter().zip(&self.factor).map(|(l, f)| f * l.exp()).sum();
        self.prefactor * s
    }
}

/// Density and its first two z-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Packet parameters with the derived quantities precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedState {
    pub params: PacketParams,
    pub constants: PhysicalConstants,
    /// grams
    pub mass: f64,
    pub norm: f64,
    pub beta: f64,
    pub k0: f64,
}

/// Per-time scalars shared by every evaluation at that time.
#[derive(Debug, Clone, Copy)]
struct TimeSlice {
    tau: f64,
    sg2: f64,
    /// `πħt`
    a: f64,
    /// `32 m² σ_G² σ0²`
    d: f64,
    /// `4 m σ0`, the z-derivative of `b`
    k: f64,
    centre: f64,
}

impl EvolvedState {
    pub fn new(params: PacketParams, constants: PhysicalConstants) -> Result<Self> {
        params.validate()?;
        constants.validate()?;
        let mass = params.mass(&constants);
        Ok(Self {
            params,
            constants,
            mass,
            norm: normalization(params.alpha, params.sigma0),
            beta: params.beta(),
            k0: params.k0(&constants),
        })
    }

    fn checked(params: &PacketParams, constants: &PhysicalConstants, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
        }
        Self::new(*params, *constants)
    }

    fn slice(&self, t: f64) -> TimeSlice {
        let s0 = self.params.sigma0;
        let tau = self.tau(t);
        let sg2 = s0 * s0 * (1.0 + tau * tau);
        let m = self.mass;
        TimeSlice {
            tau,
            sg2,
            a: PI * self.constants.hbar * t,
            d: 32.0 * m * m * sg2 * s0 * s0,
            k: 4.0 * m * s0,
            centre: self.classical_position(t),
        }
    }

    /// Dimensionless time `ħt / 2mσ0²`.
    pub fn tau(&self, t: f64) -> f64 {
        let s0 = self.params.sigma0;
        self.constants.hbar * t / (2.0 * self.mass * s0 * s0)
    }

    /// Complex width `σ0 (1 + iτ)`; exactly σ0 at `t = 0`.
    pub fn s_t(&self, t: f64) -> Complex64 {
        Complex64::new(self.params.sigma0, self.params.sigma0 * self.tau(t))
    }

    pub fn sigma_g(&self, t: f64) -> f64 {
        self.params.sigma0 * self.tau(t).hypot(1.0)
    }

    /// Free-fall trajectory `ut - gt²/2` of the Gaussian centre, cm.
    pub fn classical_position(&self, t: f64) -> f64 {
        self.params.u * t - 0.5 * self.constants.g * t * t
    }

    /// Classical momentum `m (u - gt)`, g·cm/s.
    pub fn classical_momentum(&self, t: f64) -> f64 {
        self.mass * (self.params.u - self.constants.g * t)
    }

    /// The printed exponents and phases at `(z, t)`.
    pub fn exponents(&self, z: f64, t: f64) -> Exponents {
        let ts = self.slice(t);
        let m = self.mass;
        let s0 = self.params.sigma0;
        let w = z - ts.centre;
        let (a, d) = (ts.a, ts.d);
        let b = ts.k * w;
        let e1 = -(a + b) * (a + b) / d;
        let e2 = a * (a + 2.0 * b) / d;
        let e3 = a * (a + 6.0 * b) / (2.0 * d);
        let e4 = a * (a + 2.0 * b) / (2.0 * d);
        let e5 = a * w / (2.0 * m * ts.sg2 * s0);
        Exponents { e: [e1, e2, e3, e4, e5, e5 / 2.0], a: self.phases(w, &ts) }
    }

    fn phases(&self, w: f64, ts: &TimeSlice) -> [f64; 3] {
        let m = self.mass;
        let s0 = self.params.sigma0;
        let b2 = 8.0 * m * s0 * w;
        [
            PI * (-ts.a + b2) / (32.0 * m * ts.sg2),
            PI * (ts.a + b2) / (32.0 * m * ts.sg2),
            PI * s0 * w / (2.0 * ts.sg2),
        ]
    }

    /// Combined exponents `E1`, `E1+E2`, … written as quadratics in
    /// `a = πħt` and `b = 4mσ0 w`, in term order.
    fn combined(&self, w: f64, ts: &TimeSlice) -> [f64; 6] {
        let (a, d) = (ts.a, ts.d);
        let b = ts.k * w;
        [
            -b * b / d,
            -(a * a - 2.0 * a * b + 2.0 * b * b) / (2.0 * d),
            -(a * a + 2.0 * a * b + 2.0 * b * b) / (2.0 * d),
            -(a + b) * (a + b) / d,
            -(a - b) * (a - b) / d,
            -(a * a + b * b) / d,
        ]
    }

    /// z-derivatives of [`Self::combined`].
    fn combined_slope(&self, w: f64, ts: &TimeSlice) -> [f64; 6] {
        let (a, d, k) = (ts.a, ts.d, ts.k);
        let b = k * w;
        [
            -2.0 * b * k / d,
            (a - 2.0 * b) * k / d,
            -(a + 2.0 * b) * k / d,
            -2.0 * (a + b) * k / d,
            2.0 * (a - b) * k / d,
            -2.0 * b * k / d,
        ]
    }

    pub fn density_terms(&self, z: f64, t: f64) -> DensityTerms {
        let ts = self.slice(t);
        let w = z - ts.centre;
        let al = self.params.alpha;
        let [a1, a2, a3] = self.phases(w, &ts);
        DensityTerms {
            prefactor: self.norm * self.norm / (1.0 + ts.tau * ts.tau).sqrt(),
            log_magnitude: self.combined(w, &ts),
            factor: [
                1.0,
                al * a1.sin(),
                al * a2.sin(),
                0.25 * al * al,
                0.25 * al * al,
                -0.5 * al * al * a3.cos(),
            ],
        }
    }

    pub fn density(&self, z: f64, t: f64) -> f64 {
        self.density_terms(z, t).sum().max(0.0)
    }

    /// Density with its exact first and second z-derivatives.
    ///
    /// Each term is `Re(c · exp(Q + iA))` with `Q` quadratic and `A` linear
    /// in z, so the derivatives follow in closed form.
    pub fn density_jet(&self, z: f64, t: f64) -> DensityJet {
        let ts = self.slice(t);
        let w = z - ts.centre;
        let al = self.params.alpha;
        let q = self.combined(w, &ts);
        let dq = self.combined_slope(w, &ts);
        let d2q = -1.0 / ts.sg2;
        let ph = self.phases(w, &ts);
        let dph = [
            PI * self.params.sigma0 / (4.0 * ts.sg2),
            PI * self.params.sigma0 / (4.0 * ts.sg2),
            PI * self.params.sigma0 / (2.0 * ts.sg2),
        ];
        // (coefficient, phase, phase slope)
        let spec: [(Complex64, f64, f64); 6] = [
            (Complex64::new(1.0, 0.0), 0.0, 0.0),
            (Complex64::new(0.0, -al), ph[0], dph[0]),
            (Complex64::new(0.0, -al), ph[1], dph[1]),
            (Complex64::new(0.25 * al * al, 0.0), 0.0, 0.0),
            (Complex64::new(0.25 * al * al, 0.0), 0.0, 0.0),
            (Complex64::new(-0.5 * al * al, 0.0), ph[2], dph[2]),
        ];
        let mut jet = [0.0; 3];
        for (k, (c, phase, slope)) in spec.iter().enumerate() {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let l1 = Complex64::new(dq[k], *slope);
            let term = c * Complex64::from_polar(q[k].exp(), *phase);
            jet[0] += term.re;
            jet[1] += (term * l1).re;
            jet[2] += (term * (l1 * l1 + d2q)).re;
        }
        let pref = self.norm * self.norm / (1.0 + ts.tau * ts.tau).sqrt();
        DensityJet { value: pref * jet[0], d1: pref * jet[1], d2: pref * jet[2] }
    }

    /// `∂ρ/∂z`, cm⁻².
    pub fn density_gradient(&self, z: f64, t: f64) -> f64 {
        self.density_jet(z, t).d1
    }

    /// Probability current from the η expansion, each η term carrying its
    /// combined exponent.
    pub fn current(&self, z: f64, t: f64) -> f64 {
        let ts = self.slice(t);
        let w = z - ts.centre;
        let (m, s0, hbar, g, u) = (self.mass, self.params.sigma0, self.constants.hbar, self.constants.g, self.params.u);
        let al = self.params.alpha;
        let [q0, q1, q2, q3, q4, q5] = self.combined(w, &ts);
        let [a1, a2, a3] = self.phases(w, &ts);
        let (x0, x1, x2, x3, x4, x5) = (q0.exp(), q1.exp(), q2.exp(), q3.exp(), q4.exp(), q5.exp());
        let s03 = s0 * s0 * s0;
        let bb = hbar * hbar * t * (z - 0.5 * g * t * t) + 4.0 * m * m * s0 * s0 * s0 * s0 * (u - g * t);
        let h2t = 2.0 * PI * hbar * hbar * t * s0;
        let eta0 = 8.0 * x0 * bb;
        let eta1 = 8.0 * bb * (x1 * a1.sin() + x2 * a2.sin()) - h2t * (x1 * a1.cos() + x2 * a2.cos())
            + 4.0 * PI * m * hbar * s03 * (x1 * a1.sin() - x2 * a2.sin());
        let eta2 = 2.0 * bb * (x3 + x4 - 2.0 * x5 * a3.cos()) - h2t * x5 * a3.sin()
            + 2.0 * PI * m * hbar * s03 * (x4 - x3);
        let sg = ts.sg2.sqrt();
        self.norm * self.norm / (32.0 * m * m * s0 * sg * sg * sg) * (eta0 + al * eta1 + al * al * eta2)
    }

    /// `ψ = exp(i m (u - gt) z / ħ) · envelope` with the envelope as below.
    pub fn psi(&self, z: f64, t: f64) -> Complex64 {
        if t == 0.0 {
            return psi_initial(z, &self.params, &self.constants);
        }
        let carrier = self.classical_momentum(t) * z / self.constants.hbar + self.global_phase(t);
        self.envelope(z, t) * Complex64::from_polar(1.0, carrier)
    }

    /// Amplitude and its z-derivative.
    pub fn psi_with_derivative(&self, z: f64, t: f64) -> (Complex64, Complex64) {
        let p = self.classical_momentum(t) / self.constants.hbar;
        let (env, denv) = self.envelope_with_derivative(z, t);
        let carrier = Complex64::from_polar(1.0, p * z + self.global_phase(t));
        (env * carrier, (denv + I * p * env) * carrier)
    }

    /// z-independent phase `-(m/ħ)[t(u - gt/2)²/2 + g²t³/24]`.
    fn global_phase(&self, t: f64) -> f64 {
        let (u, g) = (self.params.u, self.constants.g);
        let v = u - 0.5 * g * t;
        -self.mass / self.constants.hbar * (0.5 * t * v * v + g * g * t * t * t / 24.0)
    }

    /// ψ with the carrier phase `m(u - gt)z/ħ` and a global phase removed:
    /// a slowly varying function of `z - (ut - gt²/2)`.
    pub fn envelope(&self, z: f64, t: f64) -> Complex64 {
        self.envelope_with_derivative(z, t).0
    }

    pub fn envelope_with_derivative(&self, z: f64, t: f64) -> (Complex64, Complex64) {
        let ts = self.slice(t);
        let tau = ts.tau;
        let w0 = z - ts.centre;
        let delta = self.constants.hbar * t * self.beta / self.mass;
        let al = self.params.alpha;
        let one_tau2 = 1.0 + tau * tau;
        let pref = self.norm / Complex64::new(1.0, tau).sqrt();
        let chirp = tau * w0 * w0 / (4.0 * ts.sg2);
        let dchirp = tau * w0 / (2.0 * ts.sg2);
        let half_a = Complex64::new(0.0, -0.5 * al); // α / 2i
        let terms: [(Complex64, f64); 3] = [(Complex64::new(1.0, 0.0), 0.0), (half_a, 1.0), (-half_a, -1.0)];
        let mut sum = Complex64::new(0.0, 0.0);
        let mut dsum = Complex64::new(0.0, 0.0);
        for (c, s) in terms {
            if c.norm() == 0.0 {
                continue;
            }
            let wj = w0 - s * delta;
            let theta = s * self.beta * (2.0 * w0 - s * delta) / (2.0 * one_tau2);
            let e = c * Complex64::from_polar((-wj * wj / (4.0 * ts.sg2)).exp(), theta);
            sum += e;
            dsum += e * Complex64::new(-wj / (2.0 * ts.sg2), s * self.beta / one_tau2);
        }
        let phase = Complex64::from_polar(1.0, chirp);
        let env = pref * phase * sum;
        let denv = pref * phase * (dsum + I * dchirp * sum);
        (env, denv)
    }
}
