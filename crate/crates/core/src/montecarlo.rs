//! Monte Carlo wavefunction trajectories.
//!
//! Each step either applies a quantum jump or advances the state under the
//! effective Hamiltonian and renormalizes. Jump probabilities are first
//! order in `dt`. Atoms reaching the absorbing layer at the box edge are
//! counted as escaped.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{Propagator, StepMode, Workspace};
use crate::grid::{Channel, Grid, WaveState, C64};
use crate::params::PhysicalParams;
use crate::stats;

/// Largest accepted total jump probability per step.
pub const MAX_JUMP_PROBABILITY: f64 = 0.1;

/// Inside probability at which the atom counts as having left the cavity.
pub const ESCAPE_THRESHOLD: f64 = 0.5;

/// Angular distribution `N(u)` of the recoil momentum projected on the
/// cavity axis, `u ∈ [-1, 1]` in units of ħk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum RecoilDistribution {
    /// `3/4 (1 - u²)`: linearly polarized dipole.
    #[default]
    DipoleLinear,
    /// `3/8 (1 + u²)`: circularly polarized dipole.
    DipoleCircular,
    /// `1/2`.
    Uniform,
}

impl RecoilDistribution {
    pub const ALL: [RecoilDistribution; 3] = [
        RecoilDistribution::DipoleLinear,
        RecoilDistribution::DipoleCircular,
        RecoilDistribution::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RecoilDistribution::DipoleLinear => "dipole-linear",
            RecoilDistribution::DipoleCircular => "dipole-circular",
            RecoilDistribution::Uniform => "uniform",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == s || d.name().replace('-', "_") == s)
    }

    pub fn density(self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        match self {
            RecoilDistribution::DipoleLinear => 0.75 * (1.0 - u * u),
            RecoilDistribution::DipoleCircular => 0.375 * (1.0 + u * u),
            RecoilDistribution::Uniform => 0.5,
        }
    }

    pub fn cdf(self, u: f64) -> f64 {
        let u = u.clamp(-1.0, 1.0);
        match self {
            RecoilDistribution::DipoleLinear => (2.0 + 3.0 * u - u * u * u) / 4.0,
            RecoilDistribution::DipoleCircular => (4.0 + 3.0 * u + u * u * u) / 8.0,
            RecoilDistribution::Uniform => (u + 1.0) / 2.0,
        }
    }

    /// Closed-form inverse of [`cdf`](Self::cdf) for `r ∈ [0, 1]`.
    pub fn inverse_cdf(self, r: f64) -> f64 {
        let r = r.clamp(0.0, 1.0);
        let u = match self {
            // u³ - 3u + (4r - 2) = 0, root in [-1, 1]
            RecoilDistribution::DipoleLinear => {
                2.0 * ((2.0 * PI - (1.0 - 2.0 * r).acos()) / 3.0).cos()
            }
            // u³ + 3u - (8r - 4) = 0 has a single real root
            RecoilDistribution::DipoleCircular => {
                let q = 4.0 * r - 2.0;
                let s = (q * q + 1.0).sqrt();
                (q + s).cbrt() + (q - s).cbrt()
            }
            RecoilDistribution::Uniform => 2.0 * r - 1.0,
        };
        u.clamp(-1.0, 1.0)
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.random::<f64>())
    }

    /// `⟨u²⟩` of the distribution.
    pub fn second_moment(self) -> f64 {
        match self {
            RecoilDistribution::DipoleLinear => 0.2,
            RecoilDistribution::DipoleCircular => 0.4,
            RecoilDistribution::Uniform => 1.0 / 3.0,
        }
    }
}

impl fmt::Display for RecoilDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which decay channel produced a jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JumpChannel {
    /// Photon leaked through a mirror: `|g,1⟩ → |g,0⟩`.
    Cavity,
    /// Spontaneous emission with recoil: `|e,0⟩ → |g,0⟩`.
    Atom,
}

impl JumpChannel {
    pub fn name(self) -> &'static str {
        match self {
            JumpChannel::Cavity => "cavity",
            JumpChannel::Atom => "atom",
        }
    }

    fn source(self) -> Channel {
        match self {
            JumpChannel::Cavity => Channel::G1,
            JumpChannel::Atom => Channel::E0,
        }
    }
}

/// `(p_cav, p_atom)` for one step of length `dt`, relative to the current norm.
pub fn jump_probabilities(state: &WaveState, p: &PhysicalParams, grid: &Grid, dt: f64) -> (f64, f64) {
    let norm = state.norm_sq(grid);
    if norm <= 0.0 {
        return (0.0, 0.0);
    }
    let cav = 2.0 * p.kappa * state.channel_norm_sq(grid, Channel::G1) * dt / norm;
    let atom = 2.0 * p.gamma * state.channel_norm_sq(grid, Channel::E0) * dt / norm;
    (cav, atom)
}

fn apply_jump(state: &mut WaveState, grid: &Grid, source: Channel, kick: f64) -> Result<()> {
    if state.channel_norm_sq(grid, source) <= 0.0 {
        return Err(Error::EmptyChannel(source));
    }
    let moved = std::mem::take(&mut state.channels_mut()[source.index()]);
    let n = moved.len();
    for ch in state.channels_mut().iter_mut() {
        *ch = vec![C64::new(0.0, 0.0); n];
    }
    state.channels_mut()[Channel::G0.index()] = moved;
    state.apply_momentum_kick(grid, kick, &[Channel::G0]);
    state.normalize(grid);
    Ok(())
}

/// Moves the `|g,1⟩` profile to `|g,0⟩`, clears the rest and renormalizes.
pub fn apply_cavity_jump(state: &mut WaveState, grid: &Grid) -> Result<()> {
    apply_jump(state, grid, Channel::G1, 0.0)
}

/// Moves the `|e,0⟩` profile, multiplied by `exp(-i u x)`, to `|g,0⟩`,
/// clears the rest and renormalizes.
pub fn apply_atom_jump(state: &mut WaveState, grid: &Grid, u: f64) -> Result<()> {
    apply_jump(state, grid, Channel::E0, u)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub channel: JumpChannel,
    /// Recoil along the axis, ħk; zero for cavity jumps.
    pub u: f64,
    /// `⟨p⟩` of the emitting profile before the kick.
    pub mean_momentum_before: f64,
    /// Kinetic energy of the emitting profile before the kick, rad/s.
    pub kinetic_before: f64,
    /// Kinetic energy right after the jump, rad/s.
    pub kinetic_after: f64,
}

/// When the inside probability first fell to one half.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrapTime {
    Escaped(f64),
    NotEscaped,
}

impl TrapTime {
    pub fn time(self) -> Option<f64> {
        match self {
            TrapTime::Escaped(t) => Some(t),
            TrapTime::NotEscaped => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    /// Probability of `|x| < σ`, including the weight already absorbed.
    pub inside: f64,
    /// Weight lost to the absorbing layer so far.
    pub escaped: f64,
    pub p_g0: f64,
    pub p_e0: f64,
    pub p_g1: f64,
    pub kinetic: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Steps between samples of the inside probability.
    pub sample_every: usize,
    /// Fraction of the box on each side covered by the absorbing layer.
    pub absorbing_fraction: f64,
    /// Extra time to simulate after escape; infinite runs to `t_max`.
    pub overshoot: f64,
    pub recoil: RecoilDistribution,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            dt: 1e-8,
            t_max: 3e-3,
            sample_every: 1000,
            absorbing_fraction: 0.05,
            overshoot: 0.0,
            recoil: RecoilDistribution::DipoleLinear,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub events: Vec<JumpEvent>,
    pub samples: Vec<TrajectorySample>,
    pub trap_time: TrapTime,
    /// Simulated time when the run stopped.
    pub t_end: f64,
}

impl TrajectoryRecord {
    pub fn count(&self, channel: JumpChannel) -> usize {
        self.events.iter().filter(|e| e.channel == channel).count()
    }
}

/// Reusable per-trajectory machinery: cached operators and absorbing mask.
#[derive(Clone, Debug)]
pub struct TrajectoryRunner<'a> {
    p: &'a PhysicalParams,
    grid: &'a Grid,
    opts: TrajectoryOptions,
    prop: Propagator,
    mask: Option<Vec<f64>>,
}

impl<'a> TrajectoryRunner<'a> {
    pub fn new(p: &'a PhysicalParams, grid: &'a Grid, opts: TrajectoryOptions) -> Result<Self> {
        if !(opts.t_max > 0.0) {
            return Err(Error::DegenerateInput(format!("t_max must be > 0, got {}", opts.t_max)));
        }
        if !(0.0..0.5).contains(&opts.absorbing_fraction) {
            return Err(Error::DegenerateInput(format!(
                "absorbing fraction must be in [0, 0.5), got {}",
                opts.absorbing_fraction
            )));
        }
        if !(opts.overshoot >= 0.0) {
            return Err(Error::DegenerateInput(format!("overshoot must be >= 0, got {}", opts.overshoot)));
        }
        let prop = Propagator::new(p, grid, opts.dt, StepMode::RealEffective)?;
        let mask = (opts.absorbing_fraction > 0.0).then(|| grid.absorbing_mask(opts.absorbing_fraction));
        Ok(TrajectoryRunner { p, grid, opts, prop, mask })
    }

    pub fn options(&self) -> &TrajectoryOptions {
        &self.opts
    }

    fn sample(&self, t: f64, state: &WaveState, escaped: f64) -> TrajectorySample {
        let g = self.grid;
        TrajectorySample {
            t,
            inside: (1.0 - escaped) * state.inside_probability(g, self.p.cavity_width),
            escaped,
            p_g0: state.channel_norm_sq(g, Channel::G0),
            p_e0: state.channel_norm_sq(g, Channel::E0),
            p_g1: state.channel_norm_sq(g, Channel::G1),
            kinetic: state.kinetic_energy(g, self.p.recoil_energy),
        }
    }

    pub fn run(&self, init: &WaveState, seed: u64) -> Result<TrajectoryRecord> {
        let (p, grid, opts) = (self.p, self.grid, &self.opts);
        init.check_grid(grid)?;
        let mut state = init.clone();
        if state.normalize(grid) <= 0.0 {
            return Err(Error::DegenerateInput("initial state has zero norm".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ws = Workspace::new(grid);
        let every = opts.sample_every.max(1);
        let mut escaped = 0.0;
        let mut events = Vec::new();
        let mut samples = vec![self.sample(0.0, &state, escaped)];
        let mut trap_time = TrapTime::NotEscaped;
        let mut stop_at = opts.t_max;
        let mut k: u64 = 0;

        loop {
            let t = k as f64 * opts.dt;
            if t >= stop_at {
                break;
            }
            let (p_cav, p_atom) = jump_probabilities(&state, p, grid, opts.dt);
            let total = p_cav + p_atom;
            if total >= MAX_JUMP_PROBABILITY {
                return Err(Error::StepTooLarge {
                    quantity: "jump probability per step",
                    value: total,
                    limit: MAX_JUMP_PROBABILITY,
                });
            }
            let r: f64 = rng.random();
            k += 1;
            let t = k as f64 * opts.dt;
            if r < total {
                let channel = if r < p_cav { JumpChannel::Cavity } else { JumpChannel::Atom };
                let u = match channel {
                    JumpChannel::Cavity => 0.0,
                    JumpChannel::Atom => opts.recoil.sample(&mut rng),
                };
                let src = channel.source();
                let profile = WaveState::from_channels(
                    state.channel(src).to_vec(),
                    vec![C64::new(0.0, 0.0); grid.n()],
                    vec![C64::new(0.0, 0.0); grid.n()],
                )?;
                apply_jump(&mut state, grid, src, u)?;
                events.push(JumpEvent {
                    t,
                    channel,
                    u,
                    mean_momentum_before: profile.mean_momentum(grid),
                    kinetic_before: profile.kinetic_energy(grid, p.recoil_energy),
                    kinetic_after: state.kinetic_energy(grid, p.recoil_energy),
                });
            } else {
                self.prop.step(grid, &mut state, &mut ws);
                state.normalize(grid);
            }
            if let Some(mask) = &self.mask {
                for ch in state.channels_mut().iter_mut() {
                    ch.iter_mut().zip(mask).for_each(|(a, m)| *a *= m);
                }
                let kept = state.normalize(grid);
                escaped += (1.0 - escaped) * (1.0 - kept);
            }
            if k % every as u64 == 0 {
                let s = self.sample(t, &state, escaped);
                if trap_time == TrapTime::NotEscaped && s.inside <= ESCAPE_THRESHOLD {
                    let prev = samples.last().expect("initial sample");
                    let f = if prev.inside > s.inside {
                        (prev.inside - ESCAPE_THRESHOLD) / (prev.inside - s.inside)
                    } else {
                        1.0
                    };
                    let te = prev.t + f.clamp(0.0, 1.0) * (s.t - prev.t);
                    trap_time = TrapTime::Escaped(te);
                    stop_at = stop_at.min(te + opts.overshoot);
                }
                samples.push(s);
            }
        }
        let t_end = k as f64 * opts.dt;
        if samples.last().map(|s| s.t) != Some(t_end) {
            samples.push(self.sample(t_end, &state, escaped));
        }
        Ok(TrajectoryRecord { seed, events, samples, trap_time, t_end })
    }
}

pub fn run_trajectory(
    p: &PhysicalParams,
    grid: &Grid,
    init: &WaveState,
    seed: u64,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryRecord> {
    TrajectoryRunner::new(p, grid, opts.clone())?.run(init, seed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySummary {
    pub seed: u64,
    pub trap_time: TrapTime,
    pub n_events: usize,
    pub t_end: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub trajectories: Vec<TrajectorySummary>,
    /// `None` when more than half of the runs are censored.
    pub median_trap_time: Option<f64>,
    pub n_censored: usize,
    pub mean_events: f64,
    /// Total jumps divided by total simulated time, 1/s.
    pub jump_rate: f64,
}

impl EnsembleStats {
    pub fn from_records(records: &[TrajectoryRecord]) -> Self {
        let trajectories: Vec<TrajectorySummary> = records
            .iter()
            .map(|r| TrajectorySummary {
                seed: r.seed,
                trap_time: r.trap_time,
                n_events: r.events.len(),
                t_end: r.t_end,
            })
            .collect();
        let times: Vec<Option<f64>> = trajectories.iter().map(|s| s.trap_time.time()).collect();
        let n_events: usize = trajectories.iter().map(|s| s.n_events).sum();
        let total_t: f64 = trajectories.iter().map(|s| s.t_end).sum();
        let n = trajectories.len().max(1) as f64;
        EnsembleStats {
            median_trap_time: stats::median_censored(&times),
            n_censored: times.iter().filter(|t| t.is_none()).count(),
            mean_events: n_events as f64 / n,
            jump_rate: if total_t > 0.0 { n_events as f64 / total_t } else { 0.0 },
            trajectories,
        }
    }
}

/// Runs `n` trajectories with seeds `base_seed + i` in parallel and returns
/// the records in seed order.
pub fn run_ensemble_records(
    p: &PhysicalParams,
    grid: &Grid,
    init: &WaveState,
    opts: &TrajectoryOptions,
    n: usize,
    base_seed: u64,
) -> Result<Vec<TrajectoryRecord>> {
    if n == 0 {
        return Err(Error::DegenerateInput("ensemble needs at least one trajectory".into()));
    }
    let runner = TrajectoryRunner::new(p, grid, opts.clone())?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| runner.run(init, base_seed.wrapping_add(i)))
        .collect()
}

pub fn run_ensemble(
    p: &PhysicalParams,
    grid: &Grid,
    init: &WaveState,
    opts: &TrajectoryOptions,
    n: usize,
    base_seed: u64,
) -> Result<EnsembleStats> {
    run_ensemble_records(p, grid, init, opts, n, base_seed).map(|r| EnsembleStats::from_records(&r))
}

/// Event log with columns `t, channel, u`.
pub fn write_events_csv<W: Write>(mut w: W, events: &[JumpEvent]) -> io::Result<()> {
    writeln!(w, "t,channel,u")?;
    for e in events {
        writeln!(w, "{:.9e},{},{:.9e}", e.t, e.channel.name(), e.u)?;
    }
    Ok(())
}

/// Ensemble summary with columns `seed, trap_time, n_events, censored`.
/// Censored runs leave `trap_time` empty.
pub fn write_summary_csv<W: Write>(mut w: W, stats: &EnsembleStats) -> io::Result<()> {
    writeln!(w, "seed,trap_time,n_events,censored")?;
    for s in &stats.trajectories {
        match s.trap_time {
            TrapTime::Escaped(t) => writeln!(w, "{},{:.9e},{},false", s.seed, t, s.n_events)?,
            TrapTime::NotEscaped => writeln!(w, "{},,{},true", s.seed, s.n_events)?,
        }
    }
    Ok(())
}

/// Samples of one trajectory with columns `t, inside, escaped, P_g0, P_e0, P_g1, E_kin`.
pub fn write_samples_csv<W: Write>(mut w: W, samples: &[TrajectorySample]) -> io::Result<()> {
    writeln!(w, "t,inside,escaped,p_g0,p_e0,p_g1,kinetic_energy")?;
    for s in samples {
        writeln!(
            w,
            "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            s.t, s.inside, s.escaped, s.p_g0, s.p_e0, s.p_g1, s.kinetic
        )?;
    }
    Ok(())
}
