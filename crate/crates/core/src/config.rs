//! Plain-text experiment configuration.
//!
//! One `key = value` pair per line, `#` starts a comment. A line may also
//! hold several comma-separated pairs (`alpha=0.5, sigma0=0.1`). Lists are
//! whitespace separated (`times = 0 1 2`); sweeps additionally accept
//! `lin START STOP COUNT` and `log START STOP COUNT`.
//!
//! | key | unit | default |
//! |-----|------|---------|
//! | `alpha` | – | 0 |
//! | `sigma0` | cm | 0.1 |
//! | `u` | cm/s | 1000 |
//! | `mass` | amu | 10 |
//! | `hbar` | erg·s | 1.054571817e-27 |
//! | `g` | cm/s² | 980.7 |
//! | `amu_in_grams` | g | 1.66053906660e-24 |
//! | `detector_z` | cm | -1 |
//! | `epsilon` | cm | `sigma0` |
//! | `times` | s | 2 |
//! | `z_min`, `z_max` | cm | mean ± 6 widths |
//! | `z_points` | – | 401 |
//! | `masses` | amu | `log 1 10000 17` |
//! | `alphas` | – | `0 0.5 1` |
//! | `offsets` | σ0 | `0 -2 2` |
//! | `t_end` | s | free-fall time to `detector_z` |
//! | `samples` | – | 201 |
//! | `p_points` | – | 41 |
//! | `sigma_t` | – | `ng` (or `gaussian`) |

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::ConfigError;
use crate::units::{PacketParams, PhysicalConstants};

/// Every key understood by [`ExperimentConfig::set`].
pub const KEYS: &[&str] = &[
    "alpha", "sigma0", "u", "mass", "hbar", "g", "amu_in_grams", "detector_z", "epsilon", "times", "z_min", "z_max",
    "z_points", "masses", "alphas", "offsets", "t_end", "samples", "p_points", "sigma_t",
];

/// Which width enters the arrival-time cutoff `T = sqrt(2(|Z| + 3σ_T)/g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutoffWidth {
    /// Width of the non-Gaussian packet.
    #[default]
    NonGaussian,
    /// Width of the Gaussian packet with the same σ0 and mass.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Values along one sweep axis.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize, spacing: Spacing },
}

impl SweepValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepValues::List(v) => v.clone(),
            SweepValues::Range { start, stop, count, spacing } => {
                let n = *count;
                if n == 1 {
                    return vec![*start];
                }
                (0..n)
                    .map(|i| {
                        if i + 1 == n {
                            return *stop;
                        }
                        let f = i as f64 / (n - 1) as f64;
                        match spacing {
                            Spacing::Linear => start + f * (stop - start),
                            Spacing::Log => 10f64.powf(start.log10() + f * (stop.log10() - start.log10())),
                        }
                    })
                    .collect()
            }
        }
    }

    fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if let SweepValues::Range { start, stop, count, spacing } = self {
            if *count == 0 {
                return Err(ConfigError::invalid(key, "range needs at least one point"));
            }
            if *spacing == Spacing::Log && !(*start > 0.0 && *stop > 0.0) {
                return Err(ConfigError::invalid(key, "log spacing needs positive endpoints"));
            }
        }
        let v = self.values();
        if v.is_empty() {
            return Err(ConfigError::invalid(key, "no values"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError::invalid(key, "values must be finite"));
        }
        let increasing = v.windows(2).all(|w| w[0] < w[1]);
        let decreasing = v.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(ConfigError::invalid(key, "values must be strictly monotone"));
        }
        Ok(())
    }

    fn to_text(&self) -> String {
        match self {
            SweepValues::List(v) => join(v),
            SweepValues::Range { start, stop, count, spacing } => {
                let tag = match spacing {
                    Spacing::Linear => "lin",
                    Spacing::Log => "log",
                };
                format!("{tag} {start} {stop} {count}")
            }
        }
    }
}

impl FromStr for SweepValues {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        let words: Vec<&str> = s.split_whitespace().collect();
        match words.first().copied() {
            Some(tag @ ("lin" | "log")) if words.len() == 4 => {
                let start = words[1].parse().map_err(|_| ())?;
                let stop = words[2].parse().map_err(|_| ())?;
                let count = words[3].parse().map_err(|_| ())?;
                let spacing = if tag == "lin" { Spacing::Linear } else { Spacing::Log };
                Ok(SweepValues::Range { start, stop, count, spacing })
            }
            _ => parse_list(s).map(SweepValues::List),
        }
    }
}

/// Validated configuration shared by every scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub packet: PacketParams,
    pub constants: PhysicalConstants,
    /// Detector position for arrival times, cm.
    pub detector_z: f64,
    /// Detector half-width, cm; `None` means `sigma0`.
    pub epsilon: Option<f64>,
    pub times: Vec<f64>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
    pub z_points: usize,
    pub masses: SweepValues,
    pub alphas: SweepValues,
    /// Trajectory start offsets in units of σ0.
    pub offsets: Vec<f64>,
    pub t_end: Option<f64>,
    pub samples: usize,
    pub p_points: usize,
    pub sigma_t: CutoffWidth,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            packet: PacketParams::default(),
            constants: PhysicalConstants::default(),
            detector_z: -1.0,
            epsilon: None,
            times: vec![2.0],
            z_min: None,
            z_max: None,
            z_points: 401,
            masses: SweepValues::Range { start: 1.0, stop: 1.0e4, count: 17, spacing: Spacing::Log },
            alphas: SweepValues::List(vec![0.0, 0.5, 1.0]),
            offsets: vec![0.0, -2.0, 2.0],
            t_end: None,
            samples: 201,
            p_points: 41,
            sigma_t: CutoffWidth::NonGaussian,
        }
    }
}

/// Parses a configuration document on top of the defaults.
pub fn load_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::default().merged(text)
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| ConfigError::Unparsable { key: key.into(), value: value.into() })
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Unparsable { key: key.into(), value: value.into() })
}

fn parse_list(s: &str) -> Result<Vec<f64>, ()> {
    s.split(|c: char| c.is_whitespace() || c == ';')
        .filter(|w| !w.is_empty())
        .map(|w| w.parse::<f64>().map_err(|_| ()))
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Splits a document into `(line, key, value)` triples.
fn pairs(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let pieces: Vec<&str> = line.split(',').collect();
        let segments = if pieces.len() > 1 && pieces.iter().all(|p| p.contains('=')) { pieces } else { vec![line] };
        for seg in segments {
            let (k, v) = seg
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: idx + 1, text: raw.trim().to_string() })?;
            let key = k.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: idx + 1, text: raw.trim().to_string() });
            }
            out.push((idx + 1, key.to_string(), v.trim().to_string()));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Applies a document on top of `self` and validates the result.
    pub fn merged(mut self, text: &str) -> Result<Self, ConfigError> {
        for (_, key, value) in pairs(text)? {
            self.set_unchecked(&key, &value)?;
        }
        self.validate()?;
        Ok(self)
    }

    /// Applies a single `key = value` override and re-validates.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let mut next = self.clone();
        next.set_unchecked(key, value)?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    fn set_unchecked(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let list = |key: &str| parse_list(value).map_err(|_| ConfigError::Unparsable { key: key.into(), value: value.into() });
        let sweep = |key: &str| {
            value.parse::<SweepValues>().map_err(|_| ConfigError::Unparsable { key: key.into(), value: value.into() })
        };
        match key {
            "alpha" => self.packet.alpha = parse_f64(key, value)?,
            "sigma0" => self.packet.sigma0 = parse_f64(key, value)?,
            "u" => self.packet.u = parse_f64(key, value)?,
            "mass" => self.packet.mass_amu = parse_f64(key, value)?,
            "hbar" => self.constants.hbar = parse_f64(key, value)?,
            "g" => self.constants.g = parse_f64(key, value)?,
            "amu_in_grams" => self.constants.amu_in_grams = parse_f64(key, value)?,
            "detector_z" => self.detector_z = parse_f64(key, value)?,
            "epsilon" => self.epsilon = Some(parse_f64(key, value)?),
            "times" => self.times = list(key)?,
            "z_min" => self.z_min = Some(parse_f64(key, value)?),
            "z_max" => self.z_max = Some(parse_f64(key, value)?),
            "z_points" => self.z_points = parse_usize(key, value)?,
            "masses" => self.masses = sweep(key)?,
            "alphas" => self.alphas = sweep(key)?,
            "offsets" => self.offsets = list(key)?,
            "t_end" => self.t_end = Some(parse_f64(key, value)?),
            "samples" => self.samples = parse_usize(key, value)?,
            "p_points" => self.p_points = parse_usize(key, value)?,
            "sigma_t" => {
                self.sigma_t = match value.trim() {
                    "ng" | "non_gaussian" => CutoffWidth::NonGaussian,
                    "gaussian" | "g" => CutoffWidth::Gaussian,
                    _ => return Err(ConfigError::Unparsable { key: key.into(), value: value.into() }),
                }
            }
            _ => return Err(ConfigError::UnknownKey { key: key.into() }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.packet.validate()?;
        self.constants.validate()?;
        if !self.detector_z.is_finite() {
            return Err(ConfigError::invalid("detector_z", "must be finite"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(ConfigError::invalid("epsilon", format!("must be > 0, got {eps}")));
            }
        }
        if self.times.is_empty() {
            return Err(ConfigError::invalid("times", "at least one time is required"));
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(ConfigError::invalid("times", "times must be finite and non-negative"));
        }
        if !self.times.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError::invalid("times", "times must be strictly increasing"));
        }
        for (key, v) in [("z_min", self.z_min), ("z_max", self.z_max), ("t_end", self.t_end)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(ConfigError::invalid(key, "must be finite"));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (self.z_min, self.z_max) {
            if !(lo < hi) {
                return Err(ConfigError::invalid("z_max", "grid must be strictly increasing (z_min < z_max)"));
            }
        }
        if self.z_points < 2 {
            return Err(ConfigError::invalid("z_points", "need at least 2 points"));
        }
        self.masses.validate("masses")?;
        if self.masses.values().iter().any(|m| *m <= 0.0) {
            return Err(ConfigError::invalid("masses", "masses must be positive"));
        }
        self.alphas.validate("alphas")?;
        if self.alphas.values().iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(ConfigError::invalid("alphas", "alpha values must lie in [0, 1]"));
        }
        if self.offsets.is_empty() || self.offsets.iter().any(|o| !o.is_finite()) {
            return Err(ConfigError::invalid("offsets", "need at least one finite offset"));
        }
        if let Some(t) = self.t_end {
            if t <= 0.0 {
                return Err(ConfigError::invalid("t_end", "must be > 0"));
            }
        }
        if self.samples < 2 {
            return Err(ConfigError::invalid("samples", "need at least 2 samples"));
        }
        if self.p_points < 2 {
            return Err(ConfigError::invalid("p_points", "need at least 2 points"));
        }
        Ok(())
    }

    /// Detector half-width, defaulting to σ0.
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(self.packet.sigma0)
    }

    /// Serializes every field; parsing the output yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.packet;
        let c = &self.constants;
        let _ = writeln!(s, "alpha = {}", p.alpha);
        let _ = writeln!(s, "sigma0 = {}", p.sigma0);
        let _ = writeln!(s, "u = {}", p.u);
        let _ = writeln!(s, "mass = {}", p.mass_amu);
        let _ = writeln!(s, "hbar = {:e}", c.hbar);
        let _ = writeln!(s, "g = {}", c.g);
        let _ = writeln!(s, "amu_in_grams = {:e}", c.amu_in_grams);
        let _ = writeln!(s, "detector_z = {}", self.detector_z);
        if let Some(eps) = self.epsilon {
            let _ = writeln!(s, "epsilon = {eps}");
        }
        let _ = writeln!(s, "times = {}", join(&self.times));
        if let Some(v) = self.z_min {
            let _ = writeln!(s, "z_min = {v}");
        }
        if let Some(v) = self.z_max {
            let _ = writeln!(s, "z_max = {v}");
        }
        let _ = writeln!(s, "z_points = {}", self.z_points);
        let _ = writeln!(s, "masses = {}", self.masses.to_text());
        let _ = writeln!(s, "alphas = {}", self.alphas.to_text());
        let _ = writeln!(s, "offsets = {}", join(&self.offsets));
        if let Some(v) = self.t_end {
            let _ = writeln!(s, "t_end = {v}");
        }
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "p_points = {}", self.p_points);
        let _ = writeln!(
            s,
            "sigma_t = {}",
            match self.sigma_t {
                CutoffWidth::NonGaussian => "ng",
                CutoffWidth::Gaussian => "gaussian",
            }
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_setup_on_one_line() {
        let cfg = load_config("alpha=0.5, sigma0=0.1, u=1000, mass=10").unwrap();
        assert_eq!(cfg.packet, PacketParams { alpha: 0.5, sigma0: 0.1, u: 1000.0, mass_amu: 10.0 });
        assert_eq!(cfg.constants, PhysicalConstants::default());
    }

    #[test]
    fn gaussian_limit_keeps_other_defaults() {
        let cfg = load_config("alpha=0").unwrap();
        assert_eq!(cfg.packet.alpha, 0.0);
        assert_eq!(cfg.packet.sigma0, PacketParams::default().sigma0);
    }

    #[test]
    fn out_of_range_alpha_names_key() {
        let err = load_config("alpha=1.5").unwrap_err();
        assert_eq!(err.key(), Some("alpha"));
    }

    #[test]
    fn unknown_and_unparsable_keys() {
        assert!(matches!(load_config("colour = red"), Err(ConfigError::UnknownKey { .. })));
        let err = load_config("sigma0 = abc").unwrap_err();
        assert!(matches!(err, ConfigError::Unparsable { .. }));
        assert_eq!(err.key(), Some("sigma0"));
        assert!(matches!(load_config("just words"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn comments_lists_and_ranges() {
        let cfg = load_config(
            "# header\n\
             times = 0 1 2   # seconds\n\
             masses = log 10 1000 3\n\
             alphas = lin 0 1 5\n\
             epsilon = 1e-3\n",
        )
        .unwrap();
        assert_eq!(cfg.times, vec![0.0, 1.0, 2.0]);
        let m = cfg.masses.values();
        assert_eq!(m.len(), 3);
        assert!((m[1] - 100.0).abs() < 1e-9);
        assert_eq!(m[2], 1000.0);
        assert_eq!(cfg.alphas.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cfg.epsilon(), 1e-3);
    }

    #[test]
    fn detector_and_grid_invariants() {
        assert_eq!(load_config("epsilon = 0").unwrap_err().key(), Some("epsilon"));
        assert_eq!(load_config("z_min = 1\nz_max = 0").unwrap_err().key(), Some("z_max"));
        assert_eq!(load_config("times = 2 1").unwrap_err().key(), Some("times"));
        assert_eq!(load_config("masses = log -1 10 4").unwrap_err().key(), Some("masses"));
        assert_eq!(load_config("alphas = 0 0.5 0.5").unwrap_err().key(), Some("alphas"));
    }

    #[test]
    fn set_override_is_atomic() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.set("alpha", "7").is_err());
        assert_eq!(cfg.packet.alpha, 0.0);
        cfg.set("alpha", "0.25").unwrap();
        assert_eq!(cfg.packet.alpha, 0.25);
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            0.0f64..=1.0,
            1e-8f64..1.0,
            -1e4f64..1e4,
            1e-2f64..1e6,
            prop::option::of(1e-9f64..1.0),
            prop::collection::vec(0.0f64..10.0, 1..5),
            2usize..2000,
            prop::bool::ANY,
        )
            .prop_map(|(alpha, sigma0, u, mass, eps, mut times, z_points, gaussian)| {
                times.sort_by(|a, b| a.partial_cmp(b).unwrap());
                times.dedup();
                ExperimentConfig {
                    packet: PacketParams { alpha, sigma0, u, mass_amu: mass },
                    epsilon: eps,
                    times,
                    z_points,
                    sigma_t: if gaussian { CutoffWidth::Gaussian } else { CutoffWidth::NonGaussian },
                    ..ExperimentConfig::default()
                }
            })
    }

    proptest! {
        #[test]
        fn serialization_round_trips(cfg in arb_config()) {
            let text = cfg.to_text();
            let back = load_config(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
