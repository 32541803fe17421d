//! Physical parameters of the atom-cavity-laser system.
//!
//! Every frequency and rate is an angular frequency in rad/s (ħ = 1). Positions
//! are measured in units of 1/k, with k the optical wavenumber, so a single
//! photon recoil is the phase factor `exp(-i u x)` with `|u| <= 1` and the
//! kinetic energy of a momentum `p` (in units of ħk) is `recoil_energy * p²`.
//!
//! Quoted laboratory values of the form "16 × 2π MHz" convert as `v · 2π · 10⁶`.
//! Bare "kHz" figures for the trap depth and the recoil energy are read as
//! 10³ rad/s. Under that reading the optical laser parameters (0.70 × 2π MHz,
//! −30 × 2π MHz) give a trap depth of 1.02 × 10⁴ rad/s and an effective
//! lifetime of 0.176 ms, and the recoil energy keeps its ratio to the depth.

use std::f64::consts::TAU;
use std::fmt;

/// Converts a frequency quoted as `v × 2π MHz` into rad/s.
pub fn two_pi_mhz(v: f64) -> f64 {
    v * TAU * 1e6
}

/// Converts a frequency quoted as `v × 2π kHz` into rad/s.
pub fn two_pi_khz(v: f64) -> f64 {
    v * TAU * 1e3
}

/// Converts a frequency quoted as `v × 2π Hz` into rad/s.
pub fn two_pi_hz(v: f64) -> f64 {
    v * TAU
}

/// Default cavity width σ in units of 1/k.
pub const DEFAULT_CAVITY_WIDTH: f64 = 4.0;

/// Recoil energy used for the optical regime, rad/s.
pub const OPTICAL_RECOIL_ENERGY: f64 = 4.0e3;

/// Recoil energy used for the microwave regime, rad/s. Rydberg transitions
/// carry a negligible photon momentum.
pub const MICROWAVE_RECOIL_ENERGY: f64 = 1.0;

/// A quantity counts as "much smaller" than another when their ratio is
/// below this value.
pub const MUCH_LESS_RATIO: f64 = 0.1;

/// Functional form of the position-dependent coupling g(x).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeProfile {
    /// `g0 · exp(-x² / 2σ²)`
    Gaussian,
    /// `g0 · cos²(π x / 4σ)` for `|x| < 2σ`, zero outside.
    SquaredCosineEnvelope,
}

impl ModeProfile {
    pub fn name(self) -> &'static str {
        match self {
            ModeProfile::Gaussian => "gaussian",
            ModeProfile::SquaredCosineEnvelope => "squared-cosine",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Some(ModeProfile::Gaussian),
            "squared-cosine" | "squared_cosine" | "cos2" => {
                Some(ModeProfile::SquaredCosineEnvelope)
            }
            _ => None,
        }
    }
}

impl fmt::Display for ModeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Peak atom-cavity coupling, rad/s.
    pub g0: f64,
    /// Cavity field decay rate, rad/s.
    pub kappa: f64,
    /// Atomic decay rate, rad/s.
    pub gamma: f64,
    /// Laser Rabi frequency, rad/s.
    pub omega: f64,
    /// Laser detuning ω_L − ω_0, rad/s. Negative for trapping.
    pub delta: f64,
    /// ħ²k²/2m, rad/s.
    pub recoil_energy: f64,
    /// Width σ of the coupling envelope, in units of 1/k.
    pub cavity_width: f64,
    pub mode_profile: ModeProfile,
}

impl PhysicalParams {
    /// Coupling g(x) at position `x` (units of 1/k). Even in `x`, bounded by
    /// `g0` and equal to `g0` only at the origin.
    pub fn coupling_at(&self, x: f64) -> f64 {
        let s = self.cavity_width;
        match self.mode_profile {
            ModeProfile::Gaussian => self.g0 * (-x * x / (2.0 * s * s)).exp(),
            ModeProfile::SquaredCosineEnvelope => {
                if x.abs() < 2.0 * s {
                    let c = (std::f64::consts::PI * x / (4.0 * s)).cos();
                    self.g0 * c * c
                } else {
                    0.0
                }
            }
        }
    }

    pub fn with_laser(mut self, omega: f64, delta: f64) -> Self {
        self.omega = omega;
        self.delta = delta;
        self
    }

    pub fn with_decay(mut self, kappa: f64, gamma: f64) -> Self {
        self.kappa = kappa;
        self.gamma = gamma;
        self
    }

    pub fn with_cavity_width(mut self, sigma: f64) -> Self {
        self.cavity_width = sigma;
        self
    }

    /// Checks the parameter set and reports problems without failing.
    ///
    /// ERROR diagnostics flag values that violate the basic invariants, and a
    /// detuning in `[-g0, 0]` when `trapping` is requested. WARN diagnostics
    /// flag departures from the perturbative regime Ω ≪ |Δ+g0| ≪ g0, in which
    /// the closed-form estimates lose accuracy but the simulation stays valid.
    pub fn validate(&self, trapping: bool) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut positive = |name: &str, v: f64, strict: bool| {
            let bad = !v.is_finite() || if strict { v <= 0.0 } else { v < 0.0 };
            if bad {
                let rel = if strict { "> 0" } else { ">= 0" };
                out.push(Diagnostic::error(
                    DiagnosticCode::InvalidValue,
                    format!("{name} must be finite and {rel}, got {v}"),
                ));
            }
        };
        positive("g0", self.g0, true);
        positive("kappa", self.kappa, false);
        positive("gamma", self.gamma, false);
        positive("omega", self.omega, false);
        positive("recoil_energy", self.recoil_energy, true);
        positive("cavity_width", self.cavity_width, true);
        if !self.delta.is_finite() {
            out.push(Diagnostic::error(
                DiagnosticCode::InvalidValue,
                format!("delta must be finite, got {}", self.delta),
            ));
        }
        if !out.is_empty() {
            return out;
        }

        if trapping && self.delta >= -self.g0 && self.delta <= 0.0 {
            out.push(Diagnostic::error(
                DiagnosticCode::NoAttractivePotential,
                format!(
                    "no attractive potential: delta = {:.4} g0 lies in [-g0, 0]",
                    self.delta / self.g0
                ),
            ));
        }
        if trapping && self.delta > 0.0 {
            out.push(Diagnostic::error(
                DiagnosticCode::NoAttractivePotential,
                "no attractive potential: trapping needs a red detuning (delta < -g0)".into(),
            ));
        }

        let offset = (self.delta + self.g0).abs();
        if self.omega > 0.0 && self.omega >= MUCH_LESS_RATIO * offset {
            out.push(Diagnostic::warn(
                DiagnosticCode::OutsidePerturbativeRegime,
                format!(
                    "omega = {:.4} |delta+g0| is not << |delta+g0|",
                    self.omega / offset
                ),
            ));
        }
        if offset >= MUCH_LESS_RATIO * self.g0 {
            out.push(Diagnostic::warn(
                DiagnosticCode::OutsidePerturbativeRegime,
                format!("|delta+g0| = {:.4} g0 is not << g0", offset / self.g0),
            ));
        }
        out
    }

    pub fn has_errors(&self, trapping: bool) -> bool {
        self.validate(trapping)
            .iter()
            .any(|d| d.severity == Severity::Error)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warn,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticCode {
    InvalidValue,
    NoAttractivePotential,
    OutsidePerturbativeRegime,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub message: String,
}

impl Diagnostic {
    fn warn(code: DiagnosticCode, message: String) -> Self {
        Diagnostic { severity: Severity::Warn, code, message }
    }

    fn error(code: DiagnosticCode, message: String) -> Self {
        Diagnostic { severity: Severity::Error, code, message }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warn => "WARN",
            Severity::Error => "ERROR",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Optical regime: ⁸⁵Rb in a high-finesse Fabry-Perot cavity, with the laser
/// set to the lifetime-optimal point for a 10⁴ rad/s deep trap.
pub fn optical_preset() -> PhysicalParams {
    PhysicalParams {
        g0: two_pi_mhz(16.0),
        kappa: two_pi_mhz(1.4),
        gamma: two_pi_mhz(3.0),
        omega: two_pi_mhz(0.70),
        delta: two_pi_mhz(-30.0),
        recoil_energy: OPTICAL_RECOIL_ENERGY,
        cavity_width: DEFAULT_CAVITY_WIDTH,
        mode_profile: ModeProfile::Gaussian,
    }
}

/// Microwave regime: circular Rydberg states in a superconducting cavity.
pub fn microwave_preset() -> PhysicalParams {
    let g0 = two_pi_khz(67.0);
    PhysicalParams {
        g0,
        kappa: two_pi_hz(1.6),
        gamma: two_pi_hz(1.6),
        omega: two_pi_khz(54.0),
        delta: -2.06 * g0,
        recoil_energy: MICROWAVE_RECOIL_ENERGY,
        cavity_width: DEFAULT_CAVITY_WIDTH,
        mode_profile: ModeProfile::Gaussian,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimePreset {
    pub name: &'static str,
    pub params: PhysicalParams,
}

pub fn presets() -> [RegimePreset; 2] {
    [
        RegimePreset { name: "optical", params: optical_preset() },
        RegimePreset { name: "microwave", params: microwave_preset() },
    ]
}

pub fn preset(name: &str) -> Option<PhysicalParams> {
    presets()
        .into_iter()
        .find(|p| p.name.eq_ignore_ascii_case(name.trim()))
        .map(|p| p.params)
}
