//! Scenario commands behind the CLI. Each command turns a configuration
//! into one or more [`CsvTable`]s; sweep cells run in parallel and are
//! assembled in sweep order, so the output does not depend on the number of
//! workers.

pub mod csv;
pub mod golden;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bohm::{default_t_end, trajectory_fan};
use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Error, Result};
use crate::observables::{
    detection_at_return, detection_at_turning_point, mean_arrival_time_with, mean_z, sigma_ng, z_peak,
};
use crate::units::PacketParams;
use crate::wavepacket::EvolvedState;
use crate::wigner::{
    classical_density, liouville_transport_check, local_momentum, wigner_row, MARGINAL_P_HALF_WIDTH,
};

pub use csv::{Cell, CsvTable};
pub use golden::{verify_tables, Verification};

/// Scenario selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Density,
    WidthSweep,
    ProbSweep,
    TauSweep,
    Tables,
    Trajectories,
    Wigner,
    PeakTrack,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Density,
        Command::WidthSweep,
        Command::ProbSweep,
        Command::TauSweep,
        Command::Tables,
        Command::Trajectories,
        Command::Wigner,
        Command::PeakTrack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::WidthSweep => "width-sweep",
            Command::ProbSweep => "prob-sweep",
            Command::TauSweep => "tau-sweep",
            Command::Tables => "tables",
            Command::Trajectories => "trajectories",
            Command::Wigner => "wigner",
            Command::PeakTrack => "peak-track",
        }
    }

    /// Settings applied before the user's configuration file.
    pub fn preset_text(self) -> &'static str {
        match self {
            Command::Density => "",
            Command::WidthSweep => "sigma0 = 1e-3\nu = 1000\ntimes = 1\nalphas = lin 0 1 11\nmasses = log 1 10000 5\n",
            Command::ProbSweep => "sigma0 = 1e-3\nu = 1000\n",
            Command::TauSweep => "sigma0 = 1e-6\nu = 0\ndetector_z = -1\n",
            Command::Tables => {
                "sigma0 = 0.1\nu = 1000\nmass = 10\nalpha = 0.5\ntimes = 2\nalphas = lin 0 1 11\nmasses = 30 60 90 120 150\n"
            }
            Command::Trajectories => {
                "sigma0 = 1e-6\nu = 0\nalpha = 0.5\nmass = 100\nmasses = 10 100 1000\nalphas = 0 0.5 1\n"
            }
            Command::Wigner => "alpha = 0.5\ntimes = 2\nz_points = 41\np_points = 81\n",
            Command::PeakTrack => {
                "sigma0 = 1e-7\nu = 1000\nmass = 50\nalpha = 0.5\n\
                 times = 0 0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9 1 1.1 1.2 1.3 1.4 1.5 1.6 1.7 1.8 1.9 2\n"
            }
        }
    }

    /// Defaults with the command's preset applied.
    pub fn preset(self) -> ExperimentConfig {
        ExperimentConfig::default().merged(self.preset_text()).expect("presets are valid")
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            format!("unknown command '{s}', expected one of {}", names.join(", "))
        })
    }
}

/// Parameter swept by a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Mass,
    Alpha,
    Time,
    Position,
}

/// Values along one axis with the other packet parameters held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub fixed: PacketParams,
}

impl SweepSpec {
    pub fn new(axis: Axis, values: Vec<f64>, fixed: PacketParams) -> Result<Self> {
        let key = match axis {
            Axis::Mass => "masses",
            Axis::Alpha => "alphas",
            Axis::Time => "times",
            Axis::Position => "z_points",
        };
        if values.is_empty() {
            return Err(ConfigError::invalid(key, "sweep has no values").into());
        }
        let up = values.windows(2).all(|w| w[0] < w[1]);
        let down = values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) || values.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(key, "sweep values must be finite and strictly monotone").into());
        }
        let spec = Self { axis, values, fixed };
        for v in &spec.values {
            spec.params_at(*v).validate()?;
        }
        Ok(spec)
    }

    /// Packet parameters at one sweep value.
    pub fn params_at(&self, v: f64) -> PacketParams {
        match self.axis {
            Axis::Mass => self.fixed.with_mass(v),
            Axis::Alpha => self.fixed.with_alpha(v),
            Axis::Time | Axis::Position => self.fixed,
        }
    }
}

/// Output switches shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub verify: bool,
    pub timestamp: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { verify: false, timestamp: true, jobs: None }
    }
}

/// Tables produced by a command plus the verification outcome, if requested.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub provenance: Vec<String>,
    pub tables: Vec<CsvTable>,
    pub verification: Option<Verification>,
}

impl Report {
    /// Full CSV document: provenance block, then each table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for line in &self.provenance {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        if let Some(v) = &self.verification {
            s.push_str(&format!("# verify: {}\n", if v.passed() { "PASS" } else { "FAIL" }));
            for line in v.report() {
                s.push_str("# verify: ");
                s.push_str(&line);
                s.push('\n');
            }
        }
        for t in &self.tables {
            s.push_str(&t.render_body());
        }
        s
    }

    pub fn table(&self, name: &str) -> Option<&CsvTable> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Lines that reproduce the run: tool version, command and every
/// configuration value. Stripping the `config: ` prefix yields a
/// configuration file.
pub fn provenance(command: Command, cfg: &ExperimentConfig, timestamp: bool) -> Vec<String> {
    let mut lines = vec![format!("weqsim {} {}", env!("CARGO_PKG_VERSION"), command.name())];
    if timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        lines.push(format!("generated: unix {secs}"));
    }
    lines.extend(cfg.to_text().lines().map(|l| format!("config: {l}")));
    lines
}

/// Recovers the configuration from a rendered document.
pub fn config_from_provenance(text: &str) -> std::result::Result<ExperimentConfig, ConfigError> {
    let body: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# config: "))
        .map(|l| format!("{l}\n"))
        .collect();
    crate::config::load_config(&body)
}

/// Runs a command with the given configuration.
pub fn run(command: Command, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    if opts.verify && command != Command::Tables {
        return Err(ConfigError::invalid("verify", "only the tables command has reference values").into());
    }
    let work = || -> Result<Vec<CsvTable>> {
        match command {
            Command::Density => cmd_density(cfg).map(|t| vec![t]),
            Command::WidthSweep => cmd_width_sweep(cfg).map(|t| vec![t]),
            Command::ProbSweep => cmd_prob_sweep(cfg).map(|t| vec![t]),
            Command::TauSweep => cmd_tau_sweep(cfg).map(|t| vec![t]),
            Command::Tables => cmd_tables(cfg).map(|(a, b)| vec![a, b]),
            Command::Trajectories => cmd_trajectories(cfg).map(|t| vec![t]),
            Command::Wigner => cmd_wigner(cfg).map(|t| vec![t]),
            Command::PeakTrack => cmd_peak_track(cfg).map(|t| vec![t]),
        }
    };
    let tables = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Degenerate(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let verification = (opts.verify && command == Command::Tables).then(|| verify_tables(&tables[0], &tables[1]));
    Ok(Report { command, provenance: provenance(command, cfg, opts.timestamp), tables, verification })
}

/// Evaluates `f` on every cell in parallel and returns the results in cell
/// order; the first failing cell in that order determines the error.
fn par_cells<C: Sync, R: Send>(cells: &[C], f: impl Fn(&C) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    cells.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn time_of(cfg: &ExperimentConfig) -> f64 {
    cfg.times[0]
}

/// `(z, t, ρ, J)` on a uniform grid at every requested time.
pub fn cmd_density(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let st = EvolvedState::new(cfg.packet, cfg.constants)?;
    let mut table = CsvTable::new("density", &["z_cm", "t_s", "rho_per_cm", "J_per_s"]);
    let n = cfg.z_points;
    for &t in &cfg.times {
        if t < 0.0 {
            return Err(ConfigError::invalid("times", "density needs t >= 0").into());
        }
        let width = sigma_ng(t, &cfg.packet, &cfg.constants)?.sigma_ng;
        let centre = mean_z(t, &cfg.packet, &cfg.constants);
        let lo = cfg.z_min.unwrap_or(centre - 6.0 * width);
        let hi = cfg.z_max.unwrap_or(centre + 6.0 * width);
        if !(hi > lo) {
            return Err(ConfigError::invalid("z_max", "must exceed z_min").into());
        }
        let h = (hi - lo) / (n - 1) as f64;
        let rows: Vec<(f64, f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let z = if i + 1 == n { hi } else { lo + i as f64 * h };
                (z, st.density(z, t), st.current(z, t))
            })
            .collect();
        let riemann: f64 = rows.iter().map(|r| r.1).sum::<f64>() * h;
        table.note(format!("riemann_sum t={t:e}: {riemann:e}"));
        for (z, rho, j) in rows {
            table.push(vec![z.into(), t.into(), rho.into(), j.into()]);
        }
    }
    Ok(table)
}

/// `σ_NG` against α, one series per mass, at the first configured time.
pub fn cmd_width_sweep(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let t = time_of(cfg);
    let masses = cfg.masses.values();
    let alpha = SweepSpec::new(Axis::Alpha, cfg.alphas.values(), cfg.packet)?;
    SweepSpec::new(Axis::Mass, masses.clone(), cfg.packet)?;
    let cells: Vec<(f64, f64)> = masses.iter().flat_map(|&m| alpha.values.iter().map(move |&a| (m, a))).collect();
    let values = par_cells(&cells, |&(m, a)| {
        let p = cfg.packet.with_mass(m).with_alpha(a);
        let w = sigma_ng(t, &p, &cfg.constants)?;
        let st = EvolvedState::new(p, cfg.constants)?;
        Ok((w.sigma_ng, st.sigma_g(t)))
    })?;
    let mut table = CsvTable::new("width", &["mass_amu", "alpha", "t_s", "sigma_ng_cm", "sigma_g_cm"]);
    for (&(m, a), &(ng, g)) in cells.iter().zip(&values) {
        table.push(vec![m.into(), a.into(), t.into(), ng.into(), g.into()]);
    }
    for (k, &m) in masses.iter().enumerate() {
        let series: Vec<f64> = values[k * alpha.values.len()..(k + 1) * alpha.values.len()].iter().map(|v| v.0).collect();
        let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        table.note(format!("spread_over_alpha mass={m:e}: {:e}", (hi - lo) / mean));
    }
    Ok(table)
}

/// Detection probabilities at the turning point and on return, against
/// mass, one series per α.
pub fn cmd_prob_sweep(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let eps = cfg.epsilon();
    let masses = SweepSpec::new(Axis::Mass, cfg.masses.values(), cfg.packet)?;
    let alphas = SweepSpec::new(Axis::Alpha, cfg.alphas.values(), cfg.packet)?;
    let cells: Vec<(f64, f64)> =
        alphas.values.iter().flat_map(|&a| masses.values.iter().map(move |&m| (a, m))).collect();
    let values = par_cells(&cells, |&(a, m)| {
        let p = cfg.packet.with_alpha(a).with_mass(m);
        Ok((detection_at_turning_point(eps, &p, &cfg.constants)?.value, detection_at_return(eps, &p, &cfg.constants)?.value))
    })?;
    let mut table = CsvTable::new("probability", &["alpha", "mass_amu", "epsilon_cm", "P1", "P2"]);
    for (&(a, m), &(p1, p2)) in cells.iter().zip(&values) {
        table.push(vec![a.into(), m.into(), eps.into(), p1.into(), p2.into()]);
    }
    let top = masses.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &a in &alphas.values {
        let p = cfg.packet.with_alpha(a);
        let hi = p.with_mass(top);
        let lo = p.with_mass(top / 2.0);
        let d1 = detection_at_turning_point(eps, &hi, &cfg.constants)?.value
            - detection_at_turning_point(eps, &lo, &cfg.constants)?.value;
        let d2 = detection_at_return(eps, &hi, &cfg.constants)?.value - detection_at_return(eps, &lo, &cfg.constants)?.value;
        table.note(format!("saturation alpha={a:e} mass={top:e}: dP1={d1:e} dP2={d2:e}"));
    }
    Ok(table)
}

/// Mean arrival time at the detector against mass, one series per α.
pub fn cmd_tau_sweep(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let masses = SweepSpec::new(Axis::Mass, cfg.masses.values(), cfg.packet)?;
    let alphas = SweepSpec::new(Axis::Alpha, cfg.alphas.values(), cfg.packet)?;
    let cells: Vec<(f64, f64)> =
        alphas.values.iter().flat_map(|&a| masses.values.iter().map(move |&m| (a, m))).collect();
    let values = par_cells(&cells, |&(a, m)| {
        let p = cfg.packet.with_alpha(a).with_mass(m);
        mean_arrival_time_with(cfg.detector_z, &p, &cfg.constants, cfg.sigma_t)
    })?;
    let mut table =
        CsvTable::new("arrival_time", &["alpha", "mass_amu", "detector_z_cm", "tau_s", "cutoff_T_s", "j_sign_changes"]);
    for (&(a, m), r) in cells.iter().zip(&values) {
        table.push(vec![
            a.into(),
            m.into(),
            cfg.detector_z.into(),
            r.tau_mean.into(),
            r.cutoff_t.into(),
            r.zero_crossings_of_j.into(),
        ]);
    }
    let classical = (2.0 * cfg.detector_z.abs() / cfg.constants.g).sqrt();
    table.note(format!("classical_free_fall_time: {classical:e}"));
    Ok(table)
}

fn peak_and_mean(t: f64, p: &PacketParams, cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    Ok((z_peak(t, p, &cfg.constants)?, mean_z(t, p, &cfg.constants)))
}

/// `z_peak` and `⟨z⟩` against α at fixed mass, and against mass at fixed α.
pub fn cmd_tables(cfg: &ExperimentConfig) -> Result<(CsvTable, CsvTable)> {
    let t = time_of(cfg);
    let alphas = SweepSpec::new(Axis::Alpha, cfg.alphas.values(), cfg.packet)?;
    let masses = SweepSpec::new(Axis::Mass, cfg.masses.values(), cfg.packet)?;

    let by_alpha = par_cells(&alphas.values, |&a| peak_and_mean(t, &alphas.params_at(a), cfg))?;
    let mut first = CsvTable::new("table_alpha", &["alpha", "z_peak_cm", "mean_z_cm"]);
    first.note(format!("mass_amu={:e} t_s={t:e}", cfg.packet.mass_amu));
    for (&a, &(zp, zm)) in alphas.values.iter().zip(&by_alpha) {
        first.push(vec![a.into(), zp.into(), zm.into()]);
    }

    let by_mass = par_cells(&masses.values, |&m| peak_and_mean(t, &masses.params_at(m), cfg))?;
    let mut second = CsvTable::new("table_mass", &["mass_amu", "z_peak_cm", "mean_z_cm"]);
    second.note(format!("alpha={:e} t_s={t:e}", cfg.packet.alpha));
    for (&m, &(zp, zm)) in masses.values.iter().zip(&by_mass) {
        second.push(vec![m.into(), zp.into(), zm.into()]);
    }
    Ok((first, second))
}

/// Trajectory fans for every mass at the configured α and every α at the
/// configured mass, in long format.
pub fn cmd_trajectories(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let masses = SweepSpec::new(Axis::Mass, cfg.masses.values(), cfg.packet)?;
    let alphas = SweepSpec::new(Axis::Alpha, cfg.alphas.values(), cfg.packet)?;
    let mut cells: Vec<PacketParams> = masses.values.iter().map(|&m| masses.params_at(m)).collect();
    for &a in &alphas.values {
        let p = alphas.params_at(a);
        if !cells.contains(&p) {
            cells.push(p);
        }
    }
    let t_end = cfg.t_end.unwrap_or_else(|| default_t_end(&cfg.packet, &cfg.constants));
    let offsets: Vec<f64> = cfg.offsets.iter().map(|k| k * cfg.packet.sigma0).collect();
    let fans = par_cells(&cells, |p| trajectory_fan(&offsets, t_end, cfg.samples, p, &cfg.constants))?;

    let mut table = CsvTable::new(
        "trajectories",
        &["series_id", "mass_amu", "alpha", "offset_sigma0", "t_s", "z_cm", "v_cm_per_s", "status"],
    );
    let mut series = 0usize;
    for (p, fan) in cells.iter().zip(fans) {
        for (&k, path) in cfg.offsets.iter().zip(fan) {
            let path = path?;
            let status = if path.terminated_early.is_some() { "terminated" } else { "ok" };
            if let Some(reason) = &path.terminated_early {
                table.note(format!("series {series} stopped early: {reason}"));
            }
            for s in &path.samples {
                table.push(vec![
                    series.into(),
                    p.mass_amu.into(),
                    p.alpha.into(),
                    k.into(),
                    s.t.into(),
                    s.z.into(),
                    s.v.into(),
                    status.into(),
                ]);
            }
            series += 1;
        }
    }
    Ok(table)
}

/// Wigner function on a `(z, p)` grid at the first configured time, with a
/// summary of the marginal and transport checks.
pub fn cmd_wigner(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let t = time_of(cfg);
    let (p_cfg, c) = (&cfg.packet, &cfg.constants);
    let st = EvolvedState::new(*p_cfg, *c)?;
    let width = sigma_ng(t, p_cfg, c)?.sigma_ng;
    let centre = mean_z(t, p_cfg, c);
    let z_lo = cfg.z_min.unwrap_or(centre - 4.0 * width);
    let z_hi = cfg.z_max.unwrap_or(centre + 4.0 * width);
    if !(z_hi > z_lo) {
        return Err(ConfigError::invalid("z_max", "must exceed z_min").into());
    }
    let (nz, np) = (cfg.z_points, cfg.p_points);
    let hz = (z_hi - z_lo) / (nz - 1) as f64;
    let reach = MARGINAL_P_HALF_WIDTH * c.hbar / p_cfg.sigma0;
    let (pa, pb) = (local_momentum(&st, z_lo, t), local_momentum(&st, z_hi, t));
    let p_lo = pa.min(pb) - reach;
    let hp = (pa.max(pb) + reach - p_lo) / (np - 1) as f64;
    let zs: Vec<f64> = (0..nz).map(|i| z_lo + i as f64 * hz).collect();

    let rows = par_cells(&zs, |&z| {
        let row = wigner_row(z, t, p_lo, hp, np, p_cfg, c)?;
        let marginal = classical_density(z, t, p_cfg, c)?;
        Ok((row, marginal, st.density(z, t)))
    })?;
    let peak = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let marginal_dev = rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max) / peak;
    let (mut lowest, mut total) = (f64::INFINITY, 0.0);
    for (i, (row, _, _)) in rows.iter().enumerate() {
        let wz = if i == 0 || i + 1 == nz { 0.5 } else { 1.0 };
        for (j, &d) in row.iter().enumerate() {
            let wp = if j == 0 || j + 1 == np { 0.5 } else { 1.0 };
            total += wz * wp * d;
            lowest = lowest.min(d);
        }
    }
    total *= hz * hp;
    let scale = 1.0 / (std::f64::consts::PI * c.hbar);

    let mut table = CsvTable::new("wigner", &["z_cm", "p_cgs", "t_s", "D_w"]);
    table.note(format!("max_marginal_deviation_rel_peak: {marginal_dev:e}"));
    if t > 0.0 {
        let probes: Vec<f64> = [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|k| centre + k * width).collect();
        let residuals = par_cells(&probes, |&z| liouville_transport_check(z, local_momentum(&st, z, t), t, p_cfg, c))?;
        table.note(format!("max_transport_residual: {:e}", residuals.iter().copied().fold(0.0, f64::max)));
    } else {
        table.note("max_transport_residual: n/a at t = 0");
    }
    table.note(format!("min_D_w_rel_peak: {:e}", lowest / scale));
    table.note(format!("negative_values: {}", lowest < -1e-8 * scale));
    table.note(format!("grid_integral: {total:e}"));
    for (z, (row, _, _)) in zs.iter().zip(&rows) {
        for (j, &d) in row.iter().enumerate() {
            table.push(vec![(*z).into(), (p_lo + j as f64 * hp).into(), t.into(), d.into()]);
        }
    }
    Ok(table)
}

/// `z_peak` and `⟨z⟩` at each configured time.
pub fn cmd_peak_track(cfg: &ExperimentConfig) -> Result<CsvTable> {
    let values = par_cells(&cfg.times, |&t| peak_and_mean(t, &cfg.packet, cfg))?;
    let mut table = CsvTable::new("peak_track", &["t_s", "z_peak_cm", "mean_z_cm"]);
    for (&t, &(zp, zm)) in cfg.times.iter().zip(&values) {
        table.push(vec![t.into(), zp.into(), zm.into()]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(cmd: Command, extra: &str) -> Report {
        let cfg = cmd.preset().merged(extra).unwrap();
        run(cmd, &cfg, &RunOptions { timestamp: false, ..RunOptions::default() }).unwrap()
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
            c.preset();
        }
        assert!("plot".parse::<Command>().is_err());
    }

    #[test]
    fn sweep_spec_rejects_bad_axes() {
        let p = PacketParams::default();
        assert!(SweepSpec::new(Axis::Mass, vec![], p).is_err());
        assert!(SweepSpec::new(Axis::Mass, vec![1.0, 1.0], p).is_err());
        assert!(SweepSpec::new(Axis::Mass, vec![-1.0, 2.0], p).is_err());
        assert!(SweepSpec::new(Axis::Alpha, vec![0.5, 1.5], p).is_err());
        let s = SweepSpec::new(Axis::Alpha, vec![1.0, 0.5], p).unwrap();
        assert_eq!(s.params_at(0.5).alpha, 0.5);
    }

    #[test]
    fn gaussian_density_and_riemann_note() {
        let r = quick(Command::Density, "z_points = 201\ntimes = 0 1");
        let t = &r.tables[0];
        assert_eq!(t.rows.len(), 402);
        let p = PacketParams::default();
        let st = EvolvedState::new(p, Default::default()).unwrap();
        let row = &t.rows[100];
        let (z, rho) = (row[0].as_f64().unwrap(), row[2].as_f64().unwrap());
        let s = p.sigma0;
        let gauss = (-(z * z) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        assert!((rho - gauss).abs() < 1e-12 * gauss);
        assert_eq!(rho, st.density(z, 0.0));
        for note in &t.comments {
            let v: f64 = note.rsplit(' ').next().unwrap().parse().unwrap();
            assert!((v - 1.0).abs() < 1e-6, "{note}");
        }
    }

    #[test]
    fn density_peak_at_table_setup() {
        let r = quick(Command::Density, "alpha = 0.5\nz_points = 2001");
        let t = &r.tables[0];
        let (z, rho) = (t.column("z_cm").unwrap(), t.column("rho_per_cm").unwrap());
        let i = (0..rho.len()).max_by(|a, b| rho[*a].total_cmp(&rho[*b])).unwrap();
        assert!((z[i] - 38.65787).abs() < (z[1] - z[0]));
    }

    #[test]
    fn width_series_ordering() {
        let r = quick(Command::WidthSweep, "");
        let t = &r.tables[0];
        let (m, a, ng, g) =
            (t.column("mass_amu").unwrap(), t.column("alpha").unwrap(), t.column("sigma_ng_cm").unwrap(), t.column("sigma_g_cm").unwrap());
        for i in 0..m.len() {
            if a[i] == 0.0 {
                assert!((ng[i] - g[i]).abs() <= 1e-14 * g[i]);
            }
        }
        // rows are grouped by mass in increasing order, 11 α values each
        for i in 11..m.len() {
            assert!(ng[i] < ng[i - 11], "row {i}");
        }
    }

    #[test]
    fn probability_ordering_and_range() {
        let r = quick(Command::ProbSweep, "masses = log 1 10000 9");
        let t = &r.tables[0];
        let (p1, p2) = (t.column("P1").unwrap(), t.column("P2").unwrap());
        assert!(p1.iter().chain(&p2).all(|p| (0.0..=1.0).contains(p)));
        // three α blocks of nine masses; compare the smallest mass
        assert!(p1[0] > p1[9] && p1[9] > p1[18]);
        assert!(p2[0] > p2[9] && p2[9] > p2[18]);
        for note in &t.comments {
            for part in note.split(' ').filter(|w| w.starts_with("dP")) {
                let v: f64 = part.split('=').nth(1).unwrap().parse().unwrap();
                assert!(v.abs() < 5e-3, "{note}");
            }
        }
    }

    #[test]
    fn arrival_time_trends() {
        let r = quick(Command::TauSweep, "masses = 10 100 1000 10000\nalphas = 0 1");
        let tau = r.tables[0].column("tau_s").unwrap();
        assert!(tau[0] > tau[1] && tau[1] > tau[2]);
        assert!((tau[3] / (2.0f64 / 980.7).sqrt() - 1.0).abs() < 0.01);
        assert!(tau[4] > tau[0]);
        let bad = Command::TauSweep.preset().merged("u = 5").unwrap();
        assert!(matches!(run(Command::TauSweep, &bad, &RunOptions::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn tables_verify() {
        let cfg = Command::Tables.preset();
        let r = run(Command::Tables, &cfg, &RunOptions { verify: true, timestamp: false, jobs: Some(1) }).unwrap();
        let v = r.verification.as_ref().unwrap();
        assert!(v.passed(), "{:#?}", v.report());
        assert_eq!(v.checks.len(), 32);
        let mean = r.table("table_mass").unwrap().column("mean_z_cm").unwrap();
        assert!(mean.iter().all(|m| m.to_bits() == mean[0].to_bits()));
        assert!(r.render().contains("# verify: PASS\n"));

        let moved = cfg.clone().merged("g = 981").unwrap();
        let r = run(Command::Tables, &moved, &RunOptions { verify: true, ..RunOptions::default() }).unwrap();
        assert!(!r.verification.unwrap().passed());
        assert!(run(Command::Density, &cfg, &RunOptions { verify: true, ..RunOptions::default() }).is_err());
    }

    #[test]
    fn trajectory_cells_and_classical_centre() {
        let r = quick(Command::Trajectories, "samples = 11\nalphas = 0 0.5");
        let t = &r.tables[0];
        let ids = t.column("series_id").unwrap();
        // masses 10, 100, 1000 at α = 0.5 plus α = 0 at 100 amu, three offsets each
        assert_eq!(ids.last().copied(), Some(11.0));
        assert_eq!(t.rows.len(), 12 * 11);
        let status = t.column_index("status").unwrap();
        assert!(t.rows.iter().all(|r| r[status] == Cell::from("ok")));
        for row in t.rows.iter().filter(|r| r[2].as_f64() == Some(0.0) && r[3].as_f64() == Some(0.0)) {
            let (time, z) = (row[4].as_f64().unwrap(), row[5].as_f64().unwrap());
            assert!((z + 0.5 * 980.7 * time * time).abs() < 1e-9);
        }
    }

    #[test]
    fn wigner_summary() {
        let r = quick(Command::Wigner, "z_points = 11\np_points = 41");
        let t = &r.tables[0];
        assert_eq!(t.rows.len(), 11 * 41);
        let value = |key: &str| -> String {
            t.comments.iter().find_map(|c| c.strip_prefix(key)).unwrap().trim().to_string()
        };
        assert!(value("max_marginal_deviation_rel_peak:").parse::<f64>().unwrap() < 1e-6);
        assert!(value("max_transport_residual:").parse::<f64>().unwrap() < 1e-6);
        assert_eq!(value("negative_values:"), "true");
        assert!((value("grid_integral:").parse::<f64>().unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn peak_track_starts_at_origin() {
        let r = quick(Command::PeakTrack, "times = 0 1 2");
        let t = &r.tables[0];
        let (zp, zm) = (t.column("z_peak_cm").unwrap(), t.column("mean_z_cm").unwrap());
        assert!(zp[0].abs() < 1e-7 && zm[0].abs() < 1e-7);
        for i in 1..3 {
            assert!((zp[i] - zm[i]).abs() < 1e-4);
        }
    }

    #[test]
    fn provenance_reproduces_config() {
        let cfg = Command::ProbSweep.preset().merged("masses = 3 9\nepsilon = 2e-3").unwrap();
        let r = run(Command::ProbSweep, &cfg, &RunOptions::default()).unwrap();
        let text = r.render();
        assert!(text.lines().any(|l| l.starts_with("# generated: unix ")));
        assert_eq!(config_from_provenance(&text).unwrap(), cfg);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let cfg = Command::TauSweep.preset().merged("masses = log 10 1000 4\nalphas = 0 1").unwrap();
        let render = |jobs| {
            run(Command::TauSweep, &cfg, &RunOptions { verify: false, timestamp: false, jobs: Some(jobs) })
                .unwrap()
                .render()
        };
        assert_eq!(render(1), render(3));
    }
}
