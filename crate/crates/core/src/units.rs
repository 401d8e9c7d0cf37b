//! Physical constants and packet parameters. Everything is CGS: lengths in
//! cm, times in s, masses in g. Masses are entered in atomic mass units and
//! converted once.

use crate::error::{ConfigError, Error};

/// ħ, g and the amu-to-gram factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// erg·s
    pub hbar: f64,
    /// cm/s²
    pub g: f64,
    /// g per amu
    pub amu_in_grams: f64,
}

impl Default for PhysicalConstants {
    /// CODATA ħ and amu; g = 980.7 cm/s², the value the tabulated means imply.
    fn default() -> Self {
        Self { hbar: 1.054571817e-27, g: 980.7, amu_in_grams: 1.66053906660e-24 }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in [("hbar", self.hbar), ("g", self.g), ("amu_in_grams", self.amu_in_grams)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(key, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Converts a mass in amu to grams.
    pub fn amu_to_grams(&self, mass_amu: f64) -> Result<f64, Error> {
        if !(mass_amu.is_finite() && mass_amu > 0.0) {
            return Err(Error::Domain(format!("mass must be positive, got {mass_amu} amu")));
        }
        Ok(mass_amu * self.amu_in_grams)
    }
}

/// Converts a mass in amu to grams using the default conversion factor.
pub fn amu_to_grams(mass_amu: f64) -> Result<f64, Error> {
    PhysicalConstants::default().amu_to_grams(mass_amu)
}

/// Inputs that fix the initial state: the non-Gaussianity `alpha`, the
/// initial width `sigma0` (cm), the launch velocity `u` (cm/s) and the mass
/// (amu). The initial mean position of the Gaussian envelope is the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    pub alpha: f64,
    pub sigma0: f64,
    pub u: f64,
    pub mass_amu: f64,
}

impl Default for PacketParams {
    fn default() -> Self {
        Self { alpha: 0.0, sigma0: 0.1, u: 1.0e3, mass_amu: 10.0 }
    }
}

impl PacketParams {
    pub fn new(alpha: f64, sigma0: f64, u: f64, mass_amu: f64) -> Result<Self, ConfigError> {
        let p = Self { alpha, sigma0, u, mass_amu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ConfigError::invalid("alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(ConfigError::invalid("sigma0", format!("must be > 0, got {}", self.sigma0)));
        }
        if !self.u.is_finite() {
            return Err(ConfigError::invalid("u", "must be finite"));
        }
        if !(self.mass_amu.is_finite() && self.mass_amu > 0.0) {
            return Err(ConfigError::invalid("mass", format!("must be > 0, got {}", self.mass_amu)));
        }
        Ok(())
    }

    /// Mass in grams.
    pub fn mass(&self, c: &PhysicalConstants) -> f64 {
        self.mass_amu * c.amu_in_grams
    }

    /// Carrier wave number `k0 = m u / ħ`, cm⁻¹.
    pub fn k0(&self, c: &PhysicalConstants) -> f64 {
        self.mass(c) * self.u / c.hbar
    }

    /// Wave number of the sine modulation, `π / (4 σ0)`, cm⁻¹.
    pub fn beta(&self) -> f64 {
        std::f64::consts::PI / (4.0 * self.sigma0)
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_mass(self, mass_amu: f64) -> Self {
        Self { mass_amu, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amu_conversion_is_linear() {
        assert_eq!(amu_to_grams(1.0).unwrap(), 1.66053906660e-24);
        assert!((amu_to_grams(10.0).unwrap() - 1.6605390666e-23).abs() < 1e-38);
        assert!((amu_to_grams(100.0).unwrap() - 1.66053906660e-22).abs() < 1e-37);
        assert!(amu_to_grams(0.0).is_err());
        assert!(amu_to_grams(-3.0).is_err());
    }

    #[test]
    fn wave_number_round_trip() {
        let c = PhysicalConstants::default();
        for (u, m) in [(1.0e3, 10.0), (0.0, 100.0), (-25.0, 1.0e4), (3.3e2, 0.7)] {
            let p = PacketParams::new(0.5, 0.1, u, m).unwrap();
            let back = p.k0(&c) * c.hbar / p.mass(&c);
            assert!((back - u).abs() <= 4.0 * f64::EPSILON * u.abs(), "u={u} back={back}");
        }
    }

    #[test]
    fn parameter_ranges_enforced() {
        assert!(PacketParams::new(1.5, 0.1, 0.0, 10.0).is_err());
        assert!(PacketParams::new(-0.1, 0.1, 0.0, 10.0).is_err());
        assert!(PacketParams::new(0.5, 0.0, 0.0, 10.0).is_err());
        assert!(PacketParams::new(0.5, 0.1, 0.0, 0.0).is_err());
        assert!(PacketParams::new(1.0, 0.1, 0.0, 10.0).is_ok());
    }
}
