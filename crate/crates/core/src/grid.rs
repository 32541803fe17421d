//! Uniform periodic 1D grid and the three-channel wavefunction.
//!
//! Positions are in units of 1/k and momenta in units of ħk, so the kinetic
//! energy of a plane wave `exp(i p x)` is `E_R p²`.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest grid spacing that still resolves the unit-wavenumber recoil phase.
pub const MAX_RECOIL_SPACING: f64 = 0.5;

/// Smallest accepted number of grid points.
pub const MIN_POINTS: usize = 64;

#[derive(Clone)]
pub struct Grid {
    n: usize,
    half_extent: f64,
    dx: f64,
    x: Vec<f64>,
    p: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("half_extent", &self.half_extent)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_extent == other.half_extent
    }
}

impl Grid {
    /// Grid of `n` points on `[-half_extent, half_extent)`. `n` must be a
    /// power of two no smaller than [`MIN_POINTS`].
    pub fn new(n: usize, half_extent: f64) -> Result<Grid> {
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= {MIN_POINTS}, got {n}"
            )));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half extent must be finite and positive, got {half_extent}"
            )));
        }
        let dx = 2.0 * half_extent / n as f64;
        let x = (0..n).map(|j| -half_extent + j as f64 * dx).collect();
        let dp = std::f64::consts::TAU / (n as f64 * dx);
        let p = (0..n)
            .map(|j| {
                let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                k * dp
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft
            .get_inplace_scratch_len()
            .max(ifft.get_inplace_scratch_len());
        Ok(Grid { n, half_extent, dx, x, p, fft, ifft, scratch_len })
    }

    /// Fails when the spacing is too coarse for single-photon recoil phases.
    pub fn check_recoil_resolution(&self) -> Result<()> {
        if self.dx > MAX_RECOIL_SPACING {
            return Err(Error::InvalidGrid(format!(
                "spacing {:.4} exceeds {MAX_RECOIL_SPACING}; recoil phases are not resolved",
                self.dx
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Momenta in wrap-around (FFT) order.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Largest representable |p|, equal to π/dx.
    pub fn max_momentum(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }

    pub fn scratch(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.scratch_len]
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.fft.process_with_scratch(buf, scratch);
    }

    /// Unnormalized inverse transform in place; divide by `n` to undo
    /// [`Grid::forward`].
    pub fn inverse_unnormalized(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.ifft.process_with_scratch(buf, scratch);
    }

    pub fn to_spectral(&self, data: &[C64]) -> Vec<C64> {
        let mut out = data.to_vec();
        let mut s = self.scratch();
        self.forward(&mut out, &mut s);
        out
    }

    pub fn from_spectral(&self, data: &[C64]) -> Vec<C64> {
        let mut out = data.to_vec();
        let mut s = self.scratch();
        self.inverse_unnormalized(&mut out, &mut s);
        let inv = 1.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= inv);
        out
    }

    /// Weight turning `Σ|ψ̃_k|²` into the position-space norm.
    pub fn spectral_weight(&self) -> f64 {
        self.dx / self.n as f64
    }

    /// Multiplicative mask that is 1 in the interior and falls to 0 as a cos²
    /// ramp over the outer `fraction` of each half of the box.
    pub fn absorbing_mask(&self, fraction: f64) -> Vec<f64> {
        let width = fraction * self.half_extent;
        let inner = self.half_extent - width;
        self.x
            .iter()
            .map(|&x| {
                let a = x.abs();
                if a <= inner || width <= 0.0 {
                    1.0
                } else {
                    let s = ((a - inner) / width).min(1.0);
                    (s * std::f64::consts::FRAC_PI_2).cos().powi(2)
                }
            })
            .collect()
    }
}

/// Internal channel of the atom-cavity system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Ground-state atom, empty cavity.
    G0,
    /// Excited atom, empty cavity.
    E0,
    /// Ground-state atom, one photon.
    G1,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::G0, Channel::E0, Channel::G1];

    /// Position of the channel in the `(g0, e0, g1)` ordering used by the
    /// internal Hamiltonian.
    pub fn index(self) -> usize {
        match self {
            Channel::G0 => 0,
            Channel::E0 => 1,
            Channel::G1 => 2,
        }
    }
}

/// Wavefunction amplitudes `⟨x|φ_i⟩` on a grid for the three channels.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    channels: [Vec<C64>; 3],
}

impl WaveState {
    pub fn zeros(n: usize) -> Self {
        WaveState { channels: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]) }
    }

    pub fn from_channels(g0: Vec<C64>, e0: Vec<C64>, g1: Vec<C64>) -> Result<Self> {
        if g0.len() != e0.len() || g0.len() != g1.len() {
            return Err(Error::GridMismatch { state: g0.len(), grid: e0.len().max(g1.len()) });
        }
        Ok(WaveState { channels: [g0, e0, g1] })
    }

    /// Real Gaussian `exp(-(x-centre)²/(4 w²))` in one channel, normalized,
    /// so `w` is the standard deviation of the density.
    pub fn gaussian(grid: &Grid, centre: f64, width: f64, channel: Channel) -> Self {
        let mut s = WaveState::zeros(grid.n());
        for (a, &x) in s.channels[channel.index()].iter_mut().zip(grid.x()) {
            let d = x - centre;
            *a = C64::new((-d * d / (4.0 * width * width)).exp(), 0.0);
        }
        s.normalize(grid);
        s
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, c: Channel) -> &[C64] {
        &self.channels[c.index()]
    }

    pub fn channel_mut(&mut self, c: Channel) -> &mut [C64] {
        &mut self.channels[c.index()]
    }

    pub(crate) fn channels_mut(&mut self) -> &mut [Vec<C64>; 3] {
        &mut self.channels
    }

    pub(crate) fn channels(&self) -> &[Vec<C64>; 3] {
        &self.channels
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.n() {
            return Err(Error::GridMismatch { state: self.len(), grid: grid.n() });
        }
        Ok(())
    }

    pub fn channel_norm_sq(&self, grid: &Grid, c: Channel) -> f64 {
        self.channels[c.index()].iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx()
    }

    /// Total `Σ_channels Σ_j |φ(x_j)|² dx`.
    pub fn norm_sq(&self, grid: &Grid) -> f64 {
        Channel::ALL.iter().map(|&c| self.channel_norm_sq(grid, c)).sum()
    }

    /// Norm computed from the discrete spectrum; equals [`WaveState::norm_sq`]
    /// by Parseval's identity.
    pub fn spectral_norm_sq(&self, grid: &Grid) -> f64 {
        self.channels
            .iter()
            .map(|ch| grid.to_spectral(ch).iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            * grid.spectral_weight()
    }

    pub fn scale(&mut self, factor: f64) {
        for ch in &mut self.channels {
            ch.iter_mut().for_each(|a| *a *= factor);
        }
    }

    /// Rescales to unit norm and returns the norm² before rescaling. A zero
    /// state is left unchanged.
    pub fn normalize(&mut self, grid: &Grid) -> f64 {
        let n2 = self.norm_sq(grid);
        if n2 > 0.0 {
            self.scale(1.0 / n2.sqrt());
        }
        n2
    }

    /// Total density `Σ_channels |φ(x_j)|²` at each grid point.
    pub fn density(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.channels.iter().map(|ch| ch[j].norm_sqr()).sum())
            .collect()
    }

    /// Probability of finding the atom within `|x| < sigma`, relative to the
    /// current norm.
    pub fn inside_probability(&self, grid: &Grid, sigma: f64) -> f64 {
        let total = self.norm_sq(grid);
        if total <= 0.0 {
            return 0.0;
        }
        let inside: f64 = grid
            .x()
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() < sigma)
            .map(|(j, _)| self.channels.iter().map(|ch| ch[j].norm_sqr()).sum::<f64>())
            .sum();
        inside * grid.dx() / total
    }

    /// Multiplies the selected channels by `exp(-i u x)`, shifting their
    /// momentum by `-u` (units of ħk).
    pub fn apply_momentum_kick(&mut self, grid: &Grid, u: f64, channels: &[Channel]) {
        if u == 0.0 {
            return;
        }
        let phase: Vec<C64> = grid.x().iter().map(|&x| C64::from_polar(1.0, -u * x)).collect();
        for &c in channels {
            for (a, ph) in self.channels[c.index()].iter_mut().zip(&phase) {
                *a *= ph;
            }
        }
    }

    /// `Σ_k p_k^m |ψ̃_k|²` summed over channels, and the plain spectral norm.
    fn momentum_moment(&self, grid: &Grid, power: i32) -> (f64, f64) {
        let mut moment = 0.0;
        let mut norm = 0.0;
        for ch in &self.channels {
            let spec = grid.to_spectral(ch);
            for (a, &p) in spec.iter().zip(grid.p()) {
                let w = a.norm_sqr();
                moment += w * p.powi(power);
                norm += w;
            }
        }
        (moment, norm)
    }

    /// Kinetic energy expectation `E_R ⟨p²⟩`, rad/s.
    pub fn kinetic_energy(&self, grid: &Grid, recoil_energy: f64) -> f64 {
        let (m, n) = self.momentum_moment(grid, 2);
        if n == 0.0 {
            return 0.0;
        }
        recoil_energy * m / n
    }

    /// `⟨p⟩` in units of ħk.
    pub fn mean_momentum(&self, grid: &Grid) -> f64 {
        let (m, n) = self.momentum_moment(grid, 1);
        if n == 0.0 {
            return 0.0;
        }
        m / n
    }

    /// `⟨x⟩` in units of 1/k.
    pub fn mean_position(&self, grid: &Grid) -> f64 {
        let total = self.norm_sq(grid);
        if total <= 0.0 {
            return 0.0;
        }
        let s: f64 = grid
            .x()
            .iter()
            .enumerate()
            .map(|(j, &x)| x * self.channels.iter().map(|ch| ch[j].norm_sqr()).sum::<f64>())
            .sum();
        s * grid.dx() / total
    }

    /// `|⟨a|b⟩|` with the grid measure, for states of equal length.
    pub fn overlap(&self, other: &WaveState, grid: &Grid) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in self.channels.iter().zip(&other.channels) {
            for (x, y) in a.iter().zip(b) {
                acc += x.conj() * y;
            }
        }
        acc.norm() * grid.dx()
    }
}

/// Writes a density snapshot with columns `x, |φ_g0|², |φ_g1|², |φ_e0|²`.
pub fn write_density_csv<W: Write>(mut w: W, grid: &Grid, state: &WaveState) -> io::Result<()> {
    writeln!(w, "x,density_g0,density_g1,density_e0")?;
    let g0 = state.channel(Channel::G0);
    let g1 = state.channel(Channel::G1);
    let e0 = state.channel(Channel::E0);
    for (j, &x) in grid.x().iter().enumerate() {
        writeln!(
            w,
            "{:.9e},{:.9e},{:.9e},{:.9e}",
            x,
            g0[j].norm_sqr(),
            g1[j].norm_sqr(),
            e0[j].norm_sqr()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_arithmetic() {
        let g = Grid::new(1024, 400.0).unwrap();
        assert_eq!(g.dx(), 0.78125);
        assert!(g.check_recoil_resolution().is_err());

        let g = Grid::new(4096, 400.0).unwrap();
        assert_relative_eq!(g.dx(), 0.1953125);
        assert_relative_eq!(g.max_momentum(), 16.084954386379742, max_relative = 1e-12);
        assert!(g.check_recoil_resolution().is_ok());
        assert_eq!(g.x()[2048], 0.0);
        assert_eq!(g.p()[0], 0.0);
        assert!(g.p()[2048] < 0.0);
    }

    #[test]
    fn invalid_grids() {
        assert!(matches!(Grid::new(100, 400.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(32, 400.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(128, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(128, f64::INFINITY), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn gaussian_norm_and_scaling() {
        let g = Grid::new(512, 40.0).unwrap();
        let mut s = WaveState::gaussian(&g, 0.0, 2.0, Channel::G0);
        assert!((s.norm_sq(&g) - 1.0).abs() < 1e-6);
        s.scale(0.5);
        assert_relative_eq!(s.norm_sq(&g), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn inside_probability_cases() {
        let g = Grid::new(512, 40.0).unwrap();
        let s = WaveState::gaussian(&g, 0.0, 0.5, Channel::G0);
        // support well within σ/2 = 5
        assert!((s.inside_probability(&g, 10.0) - 1.0).abs() < 1e-9);

        let a = WaveState::gaussian(&g, 7.0, 3.0, Channel::E0);
        let b = WaveState::gaussian(&g, -7.0, 3.0, Channel::E0);
        assert_relative_eq!(a.inside_probability(&g, 8.0), b.inside_probability(&g, 8.0), max_relative = 1e-9);
    }

    #[test]
    fn kick_properties() {
        let g = Grid::new(512, 40.0).unwrap();
        let s0 = WaveState::gaussian(&g, 0.0, 3.0, Channel::G0);
        let mut s = s0.clone();
        s.apply_momentum_kick(&g, 0.0, &Channel::ALL);
        assert_eq!(s, s0);

        let e0 = s0.kinetic_energy(&g, 4e3);
        s.apply_momentum_kick(&g, 1.0, &Channel::ALL);
        assert_relative_eq!(s.norm_sq(&g), s0.norm_sq(&g), max_relative = 1e-12);
        assert!((s.mean_momentum(&g) + 1.0).abs() < 1e-9);
        assert_relative_eq!(s.kinetic_energy(&g, 4e3), e0 + 4e3, max_relative = 1e-9);
    }

    #[test]
    fn plane_wave_kinetic_energy() {
        let g = Grid::new(256, 32.0).unwrap();
        let k = g.p()[5];
        let amp: Vec<C64> = g.x().iter().map(|&x| C64::from_polar(1.0, k * x)).collect();
        let s = WaveState::from_channels(amp, vec![C64::new(0.0, 0.0); 256], vec![C64::new(0.0, 0.0); 256]).unwrap();
        assert_relative_eq!(s.kinetic_energy(&g, 4e3), 4e3 * k * k, max_relative = 1e-12);
    }

    #[test]
    fn even_state_has_zero_momentum() {
        let g = Grid::new(256, 32.0).unwrap();
        let s = WaveState::gaussian(&g, 0.0, 2.0, Channel::G1);
        assert!(s.mean_momentum(&g).abs() < 1e-10);
        assert!(s.mean_position(&g).abs() < 1e-10);
    }

    #[test]
    fn gaussian_kinetic_energy() {
        // density std w → ⟨p²⟩ = 1/(4w²)
        let g = Grid::new(1024, 64.0).unwrap();
        for w in [1.0, 2.5, 4.0] {
            let s = WaveState::gaussian(&g, 0.0, w, Channel::G0);
            let ke = s.kinetic_energy(&g, 4e3);
            assert!((ke / (4e3 / (4.0 * w * w)) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn absorbing_mask_shape() {
        let g = Grid::new(256, 20.0).unwrap();
        let m = g.absorbing_mask(0.05);
        assert_eq!(m[128], 1.0);
        assert!(m[0] < 1e-12);
        assert!(m.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn density_csv_format() {
        let g = Grid::new(64, 8.0).unwrap();
        let s = WaveState::gaussian(&g, 0.0, 1.0, Channel::G0);
        let mut buf = Vec::new();
        write_density_csv(&mut buf, &g, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,density_g0,density_g1,density_e0");
        assert_eq!(lines.clone().count(), 64);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 4);
        assert_eq!(first[0], "-8.000000000e0");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn state(grid: &Grid, seed: &[(f64, f64)]) -> WaveState {
            let n = grid.n();
            let mut s = WaveState::zeros(n);
            for (j, c) in Channel::ALL.iter().enumerate() {
                let ch = s.channel_mut(*c);
                for i in 0..n {
                    let (a, b) = seed[(i * 7 + j * 13) % seed.len()];
                    ch[i] = C64::new(a, b);
                }
            }
            s
        }

        proptest! {
            #[test]
            fn parseval_and_round_trip(seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5..40)) {
                let g = Grid::new(128, 20.0).unwrap();
                let s = state(&g, &seed);
                let a = s.norm_sq(&g);
                let b = s.spectral_norm_sq(&g);
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
                for c in Channel::ALL {
                    let back = g.from_spectral(&g.to_spectral(s.channel(c)));
                    for (x, y) in back.iter().zip(s.channel(c)) {
                        prop_assert!((x - y).norm() < 1e-12);
                    }
                }
            }

            #[test]
            fn kick_inverse_is_identity(u in -3.0f64..3.0, seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5..40)) {
                let g = Grid::new(128, 20.0).unwrap();
                let s0 = state(&g, &seed);
                let mut s = s0.clone();
                s.apply_momentum_kick(&g, u, &Channel::ALL);
                prop_assert!((s.norm_sq(&g) - s0.norm_sq(&g)).abs() < 1e-12 * s0.norm_sq(&g));
                s.apply_momentum_kick(&g, -u, &Channel::ALL);
                for c in Channel::ALL {
                    for (x, y) in s.channel(c).iter().zip(s0.channel(c)) {
                        prop_assert!((x - y).norm() < 1e-12);
                    }
                }
            }
        }
    }
}
