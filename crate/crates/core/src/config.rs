//! Run configuration files.
//!
//! Files are TOML with an optional top-level `preset` and the sections
//! `[atom]`, `[cavity]`, `[laser]` and `[numerics]`. Every key is optional;
//! missing keys keep the preset value. Frequencies may be given as plain
//! numbers (rad/s) or as strings carrying a unit:
//!
//! ```toml
//! preset = "optical"
//!
//! [laser]
//! omega = "0.7 2pi.MHz"
//! delta = "-30 2pi.MHz"
//!
//! [numerics]
//! dt = "10 ns"
//! trajectories = 40
//! ```

use std::fmt::Write as _;

use thiserror::Error;
use toml::{Table, Value};

use crate::grid::Grid;
use crate::montecarlo::{RecoilDistribution, TrajectoryOptions};
use crate::params::{self, ModeProfile, PhysicalParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("unknown section [{0}]")]
    UnknownSection(String),

    #[error("unknown key `{section}.{key}`")]
    UnknownKey { section: String, key: String },

    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },

    #[error("unknown preset `{0}` (expected optical or microwave)")]
    UnknownPreset(String),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), message: message.into() }
}

const FREQUENCY_UNITS: &[(&str, f64)] = &[
    ("2pi.MHz", 2.0 * std::f64::consts::PI * 1e6),
    ("2pi.kHz", 2.0 * std::f64::consts::PI * 1e3),
    ("2pi.Hz", 2.0 * std::f64::consts::PI),
    ("Mrad/s", 1e6),
    ("krad/s", 1e3),
    ("rad/s", 1.0),
];

const TIME_UNITS: &[(&str, f64)] = &[("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9), ("s", 1.0)];

fn parse_with_units(s: &str, units: &[(&str, f64)]) -> Result<f64, String> {
    let s = s.trim();
    let (number, scale) = units
        .iter()
        .find_map(|(u, f)| s.strip_suffix(u).map(|rest| (rest.trim_end(), *f)))
        .unwrap_or((s, 1.0));
    let v: f64 = number.parse().map_err(|_| format!("cannot parse `{s}` as a number with unit"))?;
    let v = v * scale;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

/// Parses an angular frequency such as `"0.7 2pi.MHz"`, `"4 krad/s"` or
/// `"1e4"` (bare numbers are rad/s). Returns rad/s.
pub fn parse_frequency(s: &str) -> Result<f64, ConfigError> {
    parse_with_units(s, FREQUENCY_UNITS).map_err(|m| invalid("frequency", m))
}

/// Parses a duration such as `"10 ns"` or `"2e-3"` (bare numbers are seconds).
pub fn parse_duration(s: &str) -> Result<f64, ConfigError> {
    parse_with_units(s, TIME_UNITS).map_err(|m| invalid("duration", m))
}

/// Grid, step sizes and run controls.
#[derive(Clone, Debug, PartialEq)]
pub struct Numerics {
    pub points: usize,
    /// Half-width of the box in 1/k; `None` means four cavity widths.
    pub half_extent: Option<f64>,
    /// Real-time step, s.
    pub dt: f64,
    /// Imaginary-time step, s.
    pub dtau: f64,
    /// Ground-state convergence threshold on |dE/dτ|; `None` uses `1e-4 V0`.
    pub ground_tol: Option<f64>,
    pub t_max: f64,
    pub sample_every: usize,
    pub absorbing_fraction: f64,
    pub overshoot: f64,
    pub recoil: RecoilDistribution,
    pub kick: f64,
    /// Base seed; TOML integers limit it to `i64::MAX`.
    pub seed: u64,
    pub trajectories: usize,
}

impl Numerics {
    pub fn optical() -> Self {
        Numerics {
            points: 128,
            half_extent: None,
            dt: 1e-8,
            dtau: 2e-6,
            ground_tol: None,
            t_max: 3e-3,
            sample_every: 1000,
            absorbing_fraction: 0.05,
            overshoot: 0.0,
            recoil: RecoilDistribution::DipoleLinear,
            kick: 1.0,
            seed: 1,
            trajectories: 20,
        }
    }

    pub fn microwave() -> Self {
        // negligible recoil makes the ground state narrow; the finer grid
        // raises the kinetic bound, hence the smaller step
        Numerics { points: 1024, dt: 5e-6, dtau: 1e-4, t_max: 40.0, ..Numerics::optical() }
    }

    pub fn resolved_half_extent(&self, p: &PhysicalParams) -> f64 {
        self.half_extent.unwrap_or(4.0 * p.cavity_width)
    }

    pub fn trajectory_options(&self) -> TrajectoryOptions {
        TrajectoryOptions {
            dt: self.dt,
            t_max: self.t_max,
            sample_every: self.sample_every,
            absorbing_fraction: self.absorbing_fraction,
            overshoot: self.overshoot,
            recoil: self.recoil,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub params: PhysicalParams,
    pub numerics: Numerics,
}

impl Default for Config {
    fn default() -> Self {
        Config::preset("optical").expect("optical preset exists")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn as_f64(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) if f.is_finite() => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(invalid(key, format!("expected a number, got {v}"))),
    }
}

fn frequency(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::String(s) => parse_with_units(s, FREQUENCY_UNITS).map_err(|m| invalid(key, m)),
        _ => as_f64(key, v),
    }
}

fn duration(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v {
        Value::String(s) => parse_with_units(s, TIME_UNITS).map_err(|m| invalid(key, m)),
        _ => as_f64(key, v),
    }
}

fn count(key: &str, v: &Value) -> Result<u64, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(invalid(key, format!("expected a non-negative integer, got {v}"))),
    }
}

fn text<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or_else(|| invalid(key, format!("expected a string, got {v}")))
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be > 0, got {v}")))
    }
}

impl Config {
    pub fn preset(name: &str) -> Result<Config, ConfigError> {
        let params = params::preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.into()))?;
        let numerics = if name == "microwave" { Numerics::microwave() } else { Numerics::optical() };
        Ok(Config { params, numerics })
    }

    pub fn parse(input: &str) -> Result<Config, ConfigError> {
        Config::parse_with_preset(input, None)
    }

    /// Like [`Config::parse`], but `preset` (when given) replaces the
    /// preset named in the file.
    pub fn parse_with_preset(input: &str, preset: Option<&str>) -> Result<Config, ConfigError> {
        let table: Table = input.parse().map_err(|e: toml::de::Error| ConfigError::Syntax {
            line: e.span().map(|s| line_of(input, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        let named = table.get("preset").map(|v| text("preset", v)).transpose()?;
        let mut cfg = Config::preset(preset.or(named).unwrap_or("optical"))?;
        for (section, body) in &table {
            if section == "preset" {
                continue;
            }
            let Value::Table(body) = body else {
                return Err(ConfigError::UnknownKey { section: String::new(), key: section.clone() });
            };
            for (key, value) in body {
                cfg.set_value(section, key, value)?;
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Applies a `section.key=value` override. The value is read as a TOML
    /// value when possible and as a bare string otherwise, so both
    /// `numerics.points=256` and `laser.omega=0.7 2pi.MHz` work.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| invalid(assignment, "expected section.key=value"))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| invalid(path, "expected section.key"))?;
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        self.set_value(section, key, &value)?;
        self.check()
    }

    fn set_value(&mut self, section: &str, key: &str, v: &Value) -> Result<(), ConfigError> {
        let full = format!("{section}.{key}");
        let k = full.as_str();
        let p = &mut self.params;
        let n = &mut self.numerics;
        match (section, key) {
            ("atom", "gamma") => p.gamma = frequency(k, v)?,
            ("atom", "recoil_energy") => p.recoil_energy = frequency(k, v)?,
            ("cavity", "g0") => p.g0 = frequency(k, v)?,
            ("cavity", "kappa") => p.kappa = frequency(k, v)?,
            ("cavity", "width") => p.cavity_width = as_f64(k, v)?,
            ("cavity", "profile") => {
                let s = text(k, v)?;
                p.mode_profile =
                    ModeProfile::from_name(s).ok_or_else(|| invalid(k, format!("unknown profile `{s}`")))?;
            }
            ("laser", "omega") => p.omega = frequency(k, v)?,
            ("laser", "delta") => p.delta = frequency(k, v)?,
            ("numerics", "points") => n.points = count(k, v)? as usize,
            ("numerics", "half_extent") => n.half_extent = Some(as_f64(k, v)?),
            ("numerics", "dt") => n.dt = duration(k, v)?,
            ("numerics", "dtau") => n.dtau = duration(k, v)?,
            ("numerics", "ground_tol") => n.ground_tol = Some(as_f64(k, v)?),
            ("numerics", "t_max") => n.t_max = duration(k, v)?,
            ("numerics", "sample_every") => n.sample_every = count(k, v)? as usize,
            ("numerics", "absorbing_fraction") => n.absorbing_fraction = as_f64(k, v)?,
            ("numerics", "overshoot") => n.overshoot = duration(k, v)?,
            ("numerics", "recoil") => {
                let s = text(k, v)?;
                n.recoil = RecoilDistribution::from_name(s)
                    .ok_or_else(|| invalid(k, format!("unknown recoil distribution `{s}`")))?;
            }
            ("numerics", "kick") => n.kick = as_f64(k, v)?,
            ("numerics", "seed") => n.seed = count(k, v)?,
            ("numerics", "trajectories") => n.trajectories = count(k, v)? as usize,
            ("atom" | "cavity" | "laser" | "numerics", _) => {
                return Err(ConfigError::UnknownKey { section: section.into(), key: key.into() })
            }
            _ => return Err(ConfigError::UnknownSection(section.into())),
        }
        Ok(())
    }

    /// Range checks that do not depend on the physics. Physical consistency
    /// is reported separately by [`PhysicalParams::validate`].
    fn check(&self) -> Result<(), ConfigError> {
        let n = &self.numerics;
        positive("cavity.width", self.params.cavity_width)?;
        if let Some(l) = n.half_extent {
            positive("numerics.half_extent", l)?;
        }
        positive("numerics.dt", n.dt)?;
        positive("numerics.dtau", n.dtau)?;
        positive("numerics.t_max", n.t_max)?;
        if let Some(t) = n.ground_tol {
            positive("numerics.ground_tol", t)?;
        }
        if n.seed > i64::MAX as u64 {
            return Err(invalid("numerics.seed", "must fit in a signed 64-bit integer"));
        }
        if n.sample_every == 0 {
            return Err(invalid("numerics.sample_every", "must be >= 1"));
        }
        if n.trajectories == 0 {
            return Err(invalid("numerics.trajectories", "must be >= 1"));
        }
        if !(0.0..0.5).contains(&n.absorbing_fraction) {
            return Err(invalid("numerics.absorbing_fraction", "must be in [0, 0.5)"));
        }
        if !(n.overshoot >= 0.0) {
            return Err(invalid("numerics.overshoot", "must be >= 0"));
        }
        if !n.kick.is_finite() {
            return Err(invalid("numerics.kick", "must be finite"));
        }
        Ok(())
    }

    /// Simulation grid described by the numerics section.
    pub fn grid(&self) -> crate::Result<Grid> {
        Grid::new(self.numerics.points, self.numerics.resolved_half_extent(&self.params))
    }

    /// Replaces defaults that depend on other keys with explicit values.
    pub fn resolved(&self) -> Config {
        let mut c = self.clone();
        c.numerics.half_extent = Some(self.numerics.resolved_half_extent(&self.params));
        c
    }

    /// Configuration text with every set key, SI units and 17 significant
    /// digits. [`Config::parse`] reads it back to an identical value.
    pub fn to_toml(&self) -> String {
        let p = &self.params;
        let n = &self.numerics;
        let mut s = String::new();
        let f = |v: f64| format!("{v:.17e}");
        let _ = writeln!(s, "[atom]");
        let _ = writeln!(s, "gamma = {}", f(p.gamma));
        let _ = writeln!(s, "recoil_energy = {}", f(p.recoil_energy));
        let _ = writeln!(s, "\n[cavity]");
        let _ = writeln!(s, "g0 = {}", f(p.g0));
        let _ = writeln!(s, "kappa = {}", f(p.kappa));
        let _ = writeln!(s, "width = {}", f(p.cavity_width));
        let _ = writeln!(s, "profile = \"{}\"", p.mode_profile.name());
        let _ = writeln!(s, "\n[laser]");
        let _ = writeln!(s, "omega = {}", f(p.omega));
        let _ = writeln!(s, "delta = {}", f(p.delta));
        let _ = writeln!(s, "\n[numerics]");
        let _ = writeln!(s, "points = {}", n.points);
        if let Some(l) = n.half_extent {
            let _ = writeln!(s, "half_extent = {}", f(l));
        }
        let _ = writeln!(s, "dt = {}", f(n.dt));
        let _ = writeln!(s, "dtau = {}", f(n.dtau));
        if let Some(t) = n.ground_tol {
            let _ = writeln!(s, "ground_tol = {}", f(t));
        }
        let _ = writeln!(s, "t_max = {}", f(n.t_max));
        let _ = writeln!(s, "sample_every = {}", n.sample_every);
        let _ = writeln!(s, "absorbing_fraction = {}", f(n.absorbing_fraction));
        let _ = writeln!(s, "overshoot = {}", f(n.overshoot));
        let _ = writeln!(s, "recoil = \"{}\"", n.recoil.name());
        let _ = writeln!(s, "kick = {}", f(n.kick));
        let _ = writeln!(s, "seed = {}", n.seed);
        let _ = writeln!(s, "trajectories = {}", n.trajectories);
        s
    }
}

impl std::str::FromStr for Config {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Config::parse(s)
    }
}
