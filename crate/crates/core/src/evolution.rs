//! Split-step propagation of the three-channel wavefunction.
//!
//! One step is `K(dt/2) · U(dt) · K(dt/2)` where `K` is the free-particle
//! phase applied in momentum space and `U` is the exact exponential of the
//! 3×3 internal Hamiltonian at each grid point. The constant `Δ/2` is removed
//! from the internal Hamiltonian before exponentiating; it only contributes
//! a global phase (real time) or a global factor that renormalization
//! removes (imaginary time).
//!
//! Because the internal part is integrated exactly, the only splitting
//! error comes from the kinetic operator. The step-size guard is therefore
//! expressed against the kinetic spectral bound `E_R (π/dx)²`.

use std::io::{self, Write};

use nalgebra::Matrix3;

use crate::analytic;
use crate::error::{Error, Result};
use crate::grid::{Channel, Grid, WaveState, C64};
use crate::params::PhysicalParams;

/// Largest accepted `dt · E_max` for real-time steps.
pub const MAX_STEP_PHASE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepMode {
    /// Unitary evolution under the Hermitian Hamiltonian.
    RealHermitian,
    /// No-jump evolution under the damped effective Hamiltonian.
    RealEffective,
    /// `exp(-H dτ)` followed by renormalization.
    Imaginary,
}

/// Internal Hamiltonian at one grid point, basis `(|g,0⟩, |e,0⟩, |g,1⟩)`:
/// diagonal `(Δ/2, -Δ/2, -Δ/2)`, `Ω/2` between `|g,0⟩` and `|e,0⟩`, `g(x)`
/// between `|e,0⟩` and `|g,1⟩`. The effective variant adds `-iΓ` on `|e,0⟩`
/// and `-iκ` on `|g,1⟩`.
pub type SubspaceMatrix = Matrix3<C64>;

pub fn build_subspace_matrix(p: &PhysicalParams, x: f64, effective: bool) -> SubspaceMatrix {
    let mut m = analytic::subspace_hamiltonian(p, p.coupling_at(x)).map(|v| C64::new(v, 0.0));
    if effective {
        m[(1, 1)] -= C64::new(0.0, p.gamma);
        m[(2, 2)] -= C64::new(0.0, p.kappa);
    }
    m
}

/// Spectral bound of the kinetic operator on `grid`, rad/s.
pub fn kinetic_bound(p: &PhysicalParams, grid: &Grid) -> f64 {
    let pm = grid.max_momentum();
    p.recoil_energy * pm * pm
}

/// Cached operators for repeated steps with fixed parameters, grid and
/// step size. Immutable and shareable between threads; scratch space lives
/// in a separate [`Workspace`].
#[derive(Clone, Debug)]
pub struct Propagator {
    mode: StepMode,
    dt: f64,
    /// Half-step kinetic factor with the 1/n of the inverse transform folded in.
    kinetic_half: Vec<C64>,
    internal: Vec<Matrix3<C64>>,
}

#[derive(Clone, Debug)]
pub struct Workspace {
    scratch: Vec<C64>,
}

impl Workspace {
    pub fn new(grid: &Grid) -> Self {
        Workspace { scratch: grid.scratch() }
    }
}

impl Propagator {
    pub fn new(p: &PhysicalParams, grid: &Grid, dt: f64, mode: StepMode) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::DegenerateInput(format!("time step must be > 0, got {dt}")));
        }
        if mode != StepMode::Imaginary {
            let phase = dt * kinetic_bound(p, grid);
            if phase > MAX_STEP_PHASE {
                return Err(Error::StepTooLarge {
                    quantity: "dt * E_max",
                    value: phase,
                    limit: MAX_STEP_PHASE,
                });
            }
        }
        let inv_n = 1.0 / grid.n() as f64;
        let kinetic_half = grid
            .p()
            .iter()
            .map(|&k| {
                let e = p.recoil_energy * k * k * dt / 2.0;
                match mode {
                    StepMode::Imaginary => C64::new((-e).exp() * inv_n, 0.0),
                    _ => C64::from_polar(inv_n, -e),
                }
            })
            .collect();
        let shift = SubspaceMatrix::identity() * C64::new(p.delta / 2.0, 0.0);
        let effective = mode == StepMode::RealEffective;
        let factor = match mode {
            StepMode::Imaginary => C64::new(-dt, 0.0),
            _ => C64::new(0.0, -dt),
        };
        let internal = grid
            .x()
            .iter()
            .map(|&x| ((build_subspace_matrix(p, x, effective) - shift) * factor).exp())
            .collect();
        Ok(Propagator { mode, dt, kinetic_half, internal })
    }

    pub fn mode(&self) -> StepMode {
        self.mode
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn kinetic(&self, grid: &Grid, state: &mut WaveState, ws: &mut Workspace) {
        for ch in state.channels_mut().iter_mut() {
            grid.forward(ch, &mut ws.scratch);
            for (a, k) in ch.iter_mut().zip(&self.kinetic_half) {
                *a *= k;
            }
            grid.inverse_unnormalized(ch, &mut ws.scratch);
        }
    }

    /// Advances `state` by one step in place. Imaginary steps renormalize.
    pub fn step(&self, grid: &Grid, state: &mut WaveState, ws: &mut Workspace) {
        debug_assert_eq!(state.len(), grid.n());
        self.kinetic(grid, state, ws);
        let [a, b, c] = state.channels_mut();
        for (j, m) in self.internal.iter().enumerate() {
            let (x0, x1, x2) = (a[j], b[j], c[j]);
            a[j] = m[(0, 0)] * x0 + m[(0, 1)] * x1 + m[(0, 2)] * x2;
            b[j] = m[(1, 0)] * x0 + m[(1, 1)] * x1 + m[(1, 2)] * x2;
            c[j] = m[(2, 0)] * x0 + m[(2, 1)] * x1 + m[(2, 2)] * x2;
        }
        self.kinetic(grid, state, ws);
        if self.mode == StepMode::Imaginary {
            state.normalize(grid);
        }
    }
}

/// One split step without caching. Prefer [`Propagator`] in loops.
pub fn step(
    state: &WaveState,
    p: &PhysicalParams,
    grid: &Grid,
    dt: f64,
    mode: StepMode,
) -> Result<WaveState> {
    state.check_grid(grid)?;
    let prop = Propagator::new(p, grid, dt, mode)?;
    let mut out = state.clone();
    prop.step(grid, &mut out, &mut Workspace::new(grid));
    Ok(out)
}

/// `⟨H⟩ - Δ/2 ⟨1⟩` for the Hermitian Hamiltonian, divided by the norm.
fn shifted_energy(state: &WaveState, p: &PhysicalParams, grid: &Grid) -> f64 {
    let norm = state.norm_sq(grid);
    if norm <= 0.0 {
        return 0.0;
    }
    let kinetic = state.kinetic_energy(grid, p.recoil_energy);
    let [a, b, c] = state.channels();
    let w = p.omega / 2.0;
    let mut pot = 0.0;
    for (j, &x) in grid.x().iter().enumerate() {
        let g = p.coupling_at(x);
        // H - Δ/2 = diag(0, -Δ, -Δ) + couplings
        let diag = -p.delta * (b[j].norm_sqr() + c[j].norm_sqr());
        let cross = 2.0 * w * (a[j].conj() * b[j]).re + 2.0 * g * (b[j].conj() * c[j]).re;
        pot += diag + cross;
    }
    kinetic + pot * grid.dx() / norm
}

/// Energy expectation of the Hermitian Hamiltonian in the rotating frame, rad/s.
pub fn energy(state: &WaveState, p: &PhysicalParams, grid: &Grid) -> f64 {
    shifted_energy(state, p, grid) + p.delta / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundStateOptions {
    /// Imaginary-time step, seconds.
    pub dtau: f64,
    /// Convergence threshold on |dE/dτ|, rad/s per second.
    pub tol: f64,
    pub max_iterations: usize,
    /// Density width of the Gaussian seed in `|g,0⟩`; `None` means σ/4.
    pub seed_width: Option<f64>,
    /// Iterations between energy evaluations.
    pub check_every: usize,
}

impl GroundStateOptions {
    /// Tolerance of `1e-4 V0`, falling back to `1e-4 E_R` when there is no trap.
    pub fn for_params(p: &PhysicalParams, dtau: f64) -> Self {
        let v0 = analytic::potential_depth_exact(p).unwrap_or(0.0);
        let scale = if v0 > 0.0 { v0 } else { p.recoil_energy };
        GroundStateOptions {
            dtau,
            tol: 1e-4 * scale,
            max_iterations: 200_000,
            seed_width: None,
            check_every: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub state: WaveState,
    /// Rotating-frame energy, rad/s.
    pub energy: f64,
    pub iterations: usize,
}

/// Imaginary-time relaxation from a Gaussian seed in `|g,0⟩` until the
/// energy stops changing.
pub fn ground_state(p: &PhysicalParams, grid: &Grid, opts: &GroundStateOptions) -> Result<GroundState> {
    let width = opts.seed_width.unwrap_or(p.cavity_width / 4.0);
    let seed = WaveState::gaussian(grid, 0.0, width, Channel::G0);
    relax(seed, p, grid, opts)
}

/// Imaginary-time relaxation from an arbitrary normalizable state.
pub fn relax(
    mut state: WaveState,
    p: &PhysicalParams,
    grid: &Grid,
    opts: &GroundStateOptions,
) -> Result<GroundState> {
    state.check_grid(grid)?;
    if !(opts.tol > 0.0) {
        return Err(Error::DegenerateInput(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    if state.normalize(grid) <= 0.0 {
        return Err(Error::DegenerateInput("relaxation seed has zero norm".into()));
    }
    let prop = Propagator::new(p, grid, opts.dtau, StepMode::Imaginary)?;
    let mut ws = Workspace::new(grid);
    let every = opts.check_every.max(1);
    let mut last = shifted_energy(&state, p, grid);
    let mut rate = f64::INFINITY;
    let mut it = 0;
    while it < opts.max_iterations {
        for _ in 0..every {
            prop.step(grid, &mut state, &mut ws);
        }
        it += every;
        let e = shifted_energy(&state, p, grid);
        rate = (e - last).abs() / (every as f64 * opts.dtau);
        last = e;
        if rate < opts.tol {
            return Ok(GroundState { state, energy: e + p.delta / 2.0, iterations: it });
        }
    }
    Err(Error::NoConvergence { iterations: it, last_rate: rate, tol: opts.tol })
}

/// Ground state of the scalar adiabatic Hamiltonian `E_R p² + λ0(x)` acting
/// on `|g,0⟩` alone, by the same imaginary-time scheme. Returns the
/// normalized profile and its energy.
pub fn adiabatic_ground_state(
    p: &PhysicalParams,
    grid: &Grid,
    opts: &GroundStateOptions,
) -> Result<(Vec<C64>, f64)> {
    let potential: Vec<f64> = grid
        .x()
        .iter()
        .map(|&x| analytic::perturbative_levels(p, x).map(|l| l.lambda0 - p.delta / 2.0))
        .collect::<Result<_>>()?;
    let n = grid.n();
    let inv_n = 1.0 / n as f64;
    let kin: Vec<f64> = grid
        .p()
        .iter()
        .map(|&k| (-p.recoil_energy * k * k * opts.dtau / 2.0).exp() * inv_n)
        .collect();
    let pot: Vec<f64> = potential.iter().map(|v| (-v * opts.dtau).exp()).collect();
    let width = opts.seed_width.unwrap_or(p.cavity_width / 4.0);
    let mut psi: Vec<C64> = grid
        .x()
        .iter()
        .map(|&x| C64::new((-x * x / (4.0 * width * width)).exp(), 0.0))
        .collect();
    let mut scratch = grid.scratch();
    let normalize = |psi: &mut Vec<C64>| {
        let s: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
        psi.iter_mut().for_each(|a| *a /= s.sqrt());
    };
    let energy = |psi: &[C64]| {
        let spec = grid.to_spectral(psi);
        let (m, nn) = spec
            .iter()
            .zip(grid.p())
            .fold((0.0, 0.0), |(m, nn), (a, &k)| (m + a.norm_sqr() * k * k, nn + a.norm_sqr()));
        let v: f64 = psi.iter().zip(&potential).map(|(a, v)| a.norm_sqr() * v).sum::<f64>() * grid.dx();
        p.recoil_energy * m / nn + v
    };
    normalize(&mut psi);
    let every = opts.check_every.max(1);
    let mut last = energy(&psi);
    let mut rate = f64::INFINITY;
    let mut it = 0;
    let half_kinetic = |psi: &mut Vec<C64>, scratch: &mut Vec<C64>| {
        grid.forward(psi, scratch);
        psi.iter_mut().zip(&kin).for_each(|(a, k)| *a *= k);
        grid.inverse_unnormalized(psi, scratch);
    };
    while it < opts.max_iterations {
        for _ in 0..every {
            half_kinetic(&mut psi, &mut scratch);
            psi.iter_mut().zip(&pot).for_each(|(a, v)| *a *= v);
            half_kinetic(&mut psi, &mut scratch);
            normalize(&mut psi);
        }
        it += every;
        let e = energy(&psi);
        rate = (e - last).abs() / (every as f64 * opts.dtau);
        last = e;
        if rate < opts.tol {
            return Ok((psi, e + p.delta / 2.0));
        }
    }
    Err(Error::NoConvergence { iterations: it, last_rate: rate, tol: opts.tol })
}

/// Dresses a `|g,0⟩` profile with the position-dependent perturbative
/// admixtures of `|g,1⟩` and `|e,0⟩`, then normalizes.
pub fn dress_profile(p: &PhysicalParams, grid: &Grid, profile: &[C64]) -> Result<WaveState> {
    let mut g1 = Vec::with_capacity(grid.n());
    let mut e0 = Vec::with_capacity(grid.n());
    for (&x, &a) in grid.x().iter().zip(profile) {
        let l = analytic::perturbative_levels(p, x)?;
        g1.push(a * l.amp_g1_in_psi0);
        e0.push(a * l.amp_e0_in_psi0);
    }
    let mut s = WaveState::from_channels(profile.to_vec(), e0, g1)?;
    s.normalize(grid);
    Ok(s)
}

/// Shape summary of a trapped state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensitySummary {
    /// Peak `|φ_g1|²` over peak `|φ_g0|²`.
    pub g1_peak_ratio: f64,
    /// Peak `|φ_e0|²` over peak `|φ_g0|²`.
    pub e0_peak_ratio: f64,
    /// Distance from the density maximum, on the positive side, at which
    /// the total density first drops to half its peak.
    pub half_density_radius: f64,
}

impl DensitySummary {
    pub fn excited_peak_ratio(&self) -> f64 {
        self.g1_peak_ratio + self.e0_peak_ratio
    }

    pub fn of(state: &WaveState, grid: &Grid) -> Self {
        let peak = |c: Channel| state.channel(c).iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
        let g0 = peak(Channel::G0);
        let total = state.density();
        let (imax, &dmax) = total
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty state");
        let x = grid.x();
        let mut radius = x[x.len() - 1] - x[imax];
        for j in imax + 1..total.len() {
            if total[j] <= dmax / 2.0 {
                let (d0, d1) = (total[j - 1], total[j]);
                let f = (d0 - dmax / 2.0) / (d0 - d1);
                radius = x[j - 1] + f * (x[j] - x[j - 1]) - x[imax];
                break;
            }
        }
        DensitySummary {
            g1_peak_ratio: peak(Channel::G1) / g0,
            e0_peak_ratio: peak(Channel::E0) / g0,
            half_density_radius: radius,
        }
    }
}

/// One row of an observable history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistorySample {
    pub t: f64,
    pub norm_sq: f64,
    pub p_g0: f64,
    pub p_g1: f64,
    pub p_e0: f64,
    pub mean_x: f64,
    pub kinetic: f64,
}

impl HistorySample {
    pub fn of(t: f64, state: &WaveState, p: &PhysicalParams, grid: &Grid) -> Self {
        HistorySample {
            t,
            norm_sq: state.norm_sq(grid),
            p_g0: state.channel_norm_sq(grid, Channel::G0),
            p_g1: state.channel_norm_sq(grid, Channel::G1),
            p_e0: state.channel_norm_sq(grid, Channel::E0),
            mean_x: state.mean_position(grid),
            kinetic: state.kinetic_energy(grid, p.recoil_energy),
        }
    }
}

/// Writes a history with columns `t, norm², P_g0, P_g1, P_e0, ⟨x⟩, E_kin`.
pub fn write_history_csv<W: Write>(mut w: W, rows: &[HistorySample]) -> io::Result<()> {
    writeln!(w, "t,norm_sq,p_g0,p_g1,p_e0,mean_x,kinetic_energy")?;
    for r in rows {
        writeln!(
            w,
            "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            r.t, r.norm_sq, r.p_g0, r.p_g1, r.p_e0, r.mean_x, r.kinetic
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct DecayRun {
    /// Time at which the norm² first reaches 1/e, interpolated in log(norm²).
    pub decay_time: f64,
    pub history: Vec<HistorySample>,
}

/// Evolves `s0` under the effective Hamiltonian and records when the
/// probability of no emission falls to 1/e. `record_every` steps between
/// history rows (0 records nothing but the endpoints).
pub fn no_jump_decay(
    s0: &WaveState,
    p: &PhysicalParams,
    grid: &Grid,
    dt: f64,
    t_max: f64,
    record_every: usize,
) -> Result<DecayRun> {
    s0.check_grid(grid)?;
    let prop = Propagator::new(p, grid, dt, StepMode::RealEffective)?;
    let mut ws = Workspace::new(grid);
    let mut state = s0.clone();
    let target = -1.0;
    let mut history = vec![HistorySample::of(0.0, &state, p, grid)];
    let mut prev = state.norm_sq(grid);
    let mut k: usize = 0;
    loop {
        let t_prev = k as f64 * dt;
        if t_prev >= t_max {
            return Err(Error::Timeout { t_max, norm_sq: prev });
        }
        prop.step(grid, &mut state, &mut ws);
        k += 1;
        let t = k as f64 * dt;
        let n2 = state.norm_sq(grid);
        if record_every > 0 && k % record_every == 0 {
            history.push(HistorySample::of(t, &state, p, grid));
        }
        if n2 <= (-1.0f64).exp() {
            let (l0, l1) = (prev.ln(), n2.ln());
            let f = if l1 < l0 { (l0 - target) / (l0 - l1) } else { 1.0 };
            history.push(HistorySample::of(t, &state, p, grid));
            return Ok(DecayRun { decay_time: t_prev + f * dt, history });
        }
        prev = n2;
    }
}

pub fn no_jump_decay_time(
    s0: &WaveState,
    p: &PhysicalParams,
    grid: &Grid,
    dt: f64,
    t_max: f64,
) -> Result<f64> {
    no_jump_decay(s0, p, grid, dt, t_max, 0).map(|r| r.decay_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{optical_preset, two_pi_mhz};
    use approx::assert_relative_eq;

    fn small() -> (PhysicalParams, Grid) {
        (optical_preset(), Grid::new(128, 20.0).unwrap())
    }

    #[test]
    fn hermitian_matrix_is_hermitian() {
        let p = optical_preset();
        for x in [0.0, 1.3, 9.0] {
            let m = build_subspace_matrix(&p, x, false);
            assert_eq!(m, m.adjoint());
            let e = build_subspace_matrix(&p, x, true);
            assert_ne!(e, e.adjoint());
        }
    }

    #[test]
    fn zero_laser_centre_spectrum() {
        let p = optical_preset().with_laser(0.0, two_pi_mhz(-30.0));
        let m = build_subspace_matrix(&p, 0.0, false).map(|c| c.re);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let mut want = [p.delta / 2.0, -p.delta / 2.0 - p.g0, -p.delta / 2.0 + p.g0];
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(want) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn effective_eigenvalues_are_damped() {
        let p = optical_preset();
        let m = build_subspace_matrix(&p, 0.7, true);
        for ev in m.schur().eigenvalues().unwrap().iter() {
            assert!(ev.im <= 1e-6);
        }
    }

    #[test]
    fn step_guard() {
        let (p, g) = small();
        let bound = kinetic_bound(&p, &g);
        assert!(Propagator::new(&p, &g, 0.1 / bound, StepMode::RealHermitian).is_ok());
        assert!(matches!(
            Propagator::new(&p, &g, 0.11 / bound, StepMode::RealEffective),
            Err(Error::StepTooLarge { .. })
        ));
        // imaginary steps are a contraction at any size
        assert!(Propagator::new(&p, &g, 1e-3, StepMode::Imaginary).is_ok());
        assert!(Propagator::new(&p, &g, 0.0, StepMode::Imaginary).is_err());
    }

    #[test]
    fn hermitian_step_is_unitary() {
        let (p, g) = small();
        let dt = MAX_STEP_PHASE / kinetic_bound(&p, &g);
        let prop = Propagator::new(&p, &g, dt, StepMode::RealHermitian).unwrap();
        let mut ws = Workspace::new(&g);
        let mut s = WaveState::gaussian(&g, 1.0, 1.5, Channel::G0);
        s.apply_momentum_kick(&g, 2.0, &[Channel::G0]);
        let mut last = s.norm_sq(&g);
        for _ in 0..200 {
            prop.step(&g, &mut s, &mut ws);
            let n = s.norm_sq(&g);
            assert!((n - last).abs() < 1e-10);
            last = n;
        }
    }

    #[test]
    fn effective_norm_never_grows() {
        let (p, g) = small();
        let prop = Propagator::new(&p, &g, 1e-8, StepMode::RealEffective).unwrap();
        let mut ws = Workspace::new(&g);
        let mut s = WaveState::gaussian(&g, 0.0, 1.5, Channel::G0);
        let mut last = s.norm_sq(&g);
        for _ in 0..500 {
            prop.step(&g, &mut s, &mut ws);
            let n = s.norm_sq(&g);
            assert!(n <= last * (1.0 + 1e-13));
            last = n;
        }
        assert!(last < 1.0);
    }

    #[test]
    fn cavity_channel_norm_decays_at_two_kappa() {
        // Short step on a pure |g,1⟩ packet: d(norm²)/dt = -2κ norm².
        let (p, g) = small();
        let s = WaveState::gaussian(&g, 0.0, 1.5, Channel::G1);
        let dt = 1e-10;
        let out = step(&s, &p, &g, dt, StepMode::RealEffective).unwrap();
        let rate = -(out.norm_sq(&g) - 1.0) / dt;
        assert!((rate / (2.0 * p.kappa) - 1.0).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn pure_cavity_packet_decay_time() {
        // Off resonance of everything but the cavity: kill the coupling.
        let (mut p, g) = small();
        p.g0 = 1e-9;
        p.omega = 0.0;
        let s = WaveState::gaussian(&g, 0.0, 1.5, Channel::G1);
        let t = no_jump_decay_time(&s, &p, &g, 1e-9, 1e-5).unwrap();
        assert!((t * 2.0 * p.kappa - 1.0).abs() < 0.02, "t = {t}");
    }

    #[test]
    fn closed_system_times_out() {
        let (p, g) = small();
        let p = p.with_decay(0.0, 0.0);
        let s = WaveState::gaussian(&g, 0.0, 1.5, Channel::G0);
        assert!(matches!(no_jump_decay_time(&s, &p, &g, 1e-8, 1e-6), Err(Error::Timeout { .. })));
    }

    #[test]
    fn ground_state_relaxes_and_is_stationary() {
        let (p, g) = small();
        let opts = GroundStateOptions::for_params(&p, 2e-6);
        let gs = ground_state(&p, &g, &opts).unwrap();
        assert!((gs.state.norm_sq(&g) - 1.0).abs() < 1e-12);
        // bound below the asymptotic ground level
        let far = analytic::levels_at_coupling(&p, 0.0).unwrap().lambda0;
        assert!(gs.energy < far);

        let prop = Propagator::new(&p, &g, 1e-8, StepMode::RealHermitian).unwrap();
        let mut ws = Workspace::new(&g);
        let mut s = gs.state.clone();
        let e0 = shifted_energy(&s, &p, &g);
        for _ in 0..1000 {
            prop.step(&g, &mut s, &mut ws);
        }
        assert!((s.norm_sq(&g) - 1.0).abs() < 1e-7);
        assert!(((shifted_energy(&s, &p, &g) - e0) / e0).abs() < 1e-6);
    }

    #[test]
    fn relax_rejects_bad_input() {
        let (p, g) = small();
        let mut opts = GroundStateOptions::for_params(&p, 2e-6);
        assert!(relax(WaveState::zeros(128), &p, &g, &opts).is_err());
        opts.tol = 0.0;
        assert!(ground_state(&p, &g, &opts).is_err());
        let mut opts = GroundStateOptions::for_params(&p, 2e-6);
        opts.max_iterations = 10;
        assert!(matches!(ground_state(&p, &g, &opts), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn history_csv_header() {
        let (p, g) = small();
        let s = WaveState::gaussian(&g, 0.0, 1.0, Channel::G0);
        let mut buf = Vec::new();
        write_history_csv(&mut buf, &[HistorySample::of(0.0, &s, &p, &g)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,norm_sq,p_g0,p_g1,p_e0,mean_x,kinetic_energy\n"));
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 7);
    }
}
