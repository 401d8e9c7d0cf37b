//! Free fall of a non-Gaussian matter-wave packet in a uniform gravitational
//! field: exact wave function, densities and currents, widths and peak
//! positions, detection probabilities, mean arrival times, the Wigner
//! function and Bohmian trajectories.
//!
//! Numerical kernels in [`numerics`] are generic over [`Real`] (`f32` or
//! `f64`). The physics is evaluated in `f64` because CGS inputs such as
//! `ħ² ≈ 1e-54` are below the `f32` range.

pub mod bohm;
pub mod config;
pub mod error;
pub mod numerics;
pub mod observables;
pub mod real;
pub mod sweeps;
pub mod units;
pub mod wigner;
pub mod wavepacket;

pub use config::{load_config, CutoffWidth, ExperimentConfig, Spacing, SweepValues};
pub use error::{ConfigError, Error, Result};
pub use real::{Integrable, Real};
pub use units::{amu_to_grams, PacketParams, PhysicalConstants};

/// Complex amplitude used throughout the physics modules.
pub type ComplexAmplitude = num_complex::Complex64;
/// Quadrature result over `f64`.
pub type QuadratureResult64 = numerics::QuadratureResult<f64>;
/// ODE solution for a single coordinate in `f64`.
pub type OdeSolution64 = numerics::OdeSolution<f64, 1>;
