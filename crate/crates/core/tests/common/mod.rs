//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use cavitrap::evolution::{Propagator, StepMode, Workspace};
use cavitrap::grid::{Channel, Grid, WaveState};
use cavitrap::params::PhysicalParams;
use num_complex::Complex64 as C64;

/// Observables of the averaged state at the end of a run.
#[derive(Clone, Copy, Debug)]
pub struct Populations {
    pub p_g0: f64,
    pub p_e0: f64,
    pub p_g1: f64,
    pub kinetic: f64,
}

/// Fourier transform of the dipole-linear recoil density `3(1-u²)/4` on
/// `[-1, 1]`, by composite Simpson quadrature.
fn recoil_characteristic(s: f64) -> f64 {
    let m = 2000;
    let h = 2.0 / m as f64;
    let f = |u: f64| 3.0 * (1.0 - u * u) / 4.0 * (u * s).cos();
    let mut acc = f(-1.0) + f(1.0);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(-1.0 + i as f64 * h);
    }
    acc * h / 3.0
}

fn column_state(col: &[C64], n: usize) -> WaveState {
    WaveState::from_channels(col[..n].to_vec(), col[n..2 * n].to_vec(), col[2 * n..].to_vec()).unwrap()
}

fn write_column(state: &WaveState, col: &mut [C64], n: usize) {
    col[..n].copy_from_slice(state.channel(Channel::G0));
    col[n..2 * n].copy_from_slice(state.channel(Channel::E0));
    col[2 * n..].copy_from_slice(state.channel(Channel::G1));
}

/// Dense `3n × 3n` density matrix, stored by columns.
struct Density {
    dim: usize,
    data: Vec<C64>,
}

impl Density {
    fn pure(state: &WaveState, n: usize) -> Self {
        let dim = 3 * n;
        let mut v = vec![C64::new(0.0, 0.0); dim];
        write_column(state, &mut v, n);
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for b in 0..dim {
            for a in 0..dim {
                data[b * dim + a] = v[a] * v[b].conj();
            }
        }
        Density { dim, data }
    }

    fn get(&self, a: usize, b: usize) -> C64 {
        self.data[b * self.dim + a]
    }

    /// Applies the propagator to every column.
    fn left(&mut self, prop: &Propagator, grid: &Grid, ws: &mut Workspace) {
        let n = grid.n();
        for col in self.data.chunks_mut(self.dim) {
            let mut s = column_state(col, n);
            prop.step(grid, &mut s, ws);
            write_column(&s, col, n);
        }
    }

    fn adjoint(&mut self) {
        let d = self.dim;
        for b in 0..d {
            for a in 0..=b {
                let x = self.data[b * d + a];
                let y = self.data[a * d + b];
                self.data[b * d + a] = y.conj();
                self.data[a * d + b] = x.conj();
            }
        }
    }
}

/// Master-equation reference for the jump unravelling: the density matrix
/// of atom plus field on the grid, advanced by `ρ → UρU† + dt·J(ρ)` where
/// `U` is one non-Hermitian step and `J` holds both emission channels with
/// the dipole-linear recoil averaged analytically. Only practical for small
/// grids.
pub fn master_equation_reference(
    p: &PhysicalParams,
    grid: &Grid,
    init: &WaveState,
    dt: f64,
    steps: usize,
) -> Populations {
    let n = grid.n();
    let prop = Propagator::new(p, grid, dt, StepMode::RealEffective).unwrap();
    let mut ws = Workspace::new(grid);
    let mut rho = Density::pure(init, n);
    let x = grid.x().to_vec();
    let chi: Vec<Vec<f64>> =
        (0..n).map(|j| (0..n).map(|k| recoil_characteristic(x[j] - x[k])).collect()).collect();
    let (g0, e0, g1) = (0, n, 2 * n);
    for _ in 0..steps {
        let prev = rho.data.clone();
        rho.left(&prop, grid, &mut ws);
        rho.adjoint();
        rho.left(&prop, grid, &mut ws);
        rho.adjoint();
        let d = rho.dim;
        for k in 0..n {
            for j in 0..n {
                let cav = prev[(g1 + k) * d + g1 + j];
                let atom = prev[(e0 + k) * d + e0 + j] * chi[j][k];
                rho.data[(g0 + k) * d + g0 + j] += (2.0 * p.kappa * cav + 2.0 * p.gamma * atom) * dt;
            }
        }
    }

    let block_trace = |off: usize| (0..n).map(|j| rho.get(off + j, off + j).re).sum::<f64>();
    let (t0, te, t1) = (block_trace(g0), block_trace(e0), block_trace(g1));
    let total = t0 + te + t1;

    // ⟨p²⟩ from the diagonal of F ρ F† in each block
    let mut moment = 0.0;
    let mut weight = 0.0;
    for off in [g0, e0, g1] {
        let m: Vec<Vec<C64>> = (0..n)
            .map(|k| grid.to_spectral(&(0..n).map(|j| rho.get(off + j, off + k)).collect::<Vec<_>>()))
            .collect();
        // m[k][q] = (F ρ)_{q,k}; transform the conjugated rows to get F ρ F†
        for q in 0..n {
            let row: Vec<C64> = (0..n).map(|k| m[k][q].conj()).collect();
            let t = grid.to_spectral(&row);
            let w = t[q].re;
            moment += w * grid.p()[q] * grid.p()[q];
            weight += w;
        }
    }
    Populations {
        p_g0: t0 / total,
        p_e0: te / total,
        p_g1: t1 / total,
        kinetic: p.recoil_energy * moment / weight,
    }
}

/// Maximum absolute difference between two states of the same grid.
pub fn max_difference(a: &WaveState, b: &WaveState) -> f64 {
    Channel::ALL
        .iter()
        .flat_map(|&c| a.channel(c).iter().zip(b.channel(c)).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

/// L2 distance with the grid measure.
pub fn distance(a: &WaveState, b: &WaveState, grid: &Grid) -> f64 {
    let s: f64 = Channel::ALL
        .iter()
        .flat_map(|&c| a.channel(c).iter().zip(b.channel(c)).map(|(x, y)| (x - y).norm_sqr()))
        .sum();
    (s * grid.dx()).sqrt()
}

/// Evolves `state` for `steps` steps of length `dt`.
pub fn evolve(p: &PhysicalParams, grid: &Grid, state: &WaveState, dt: f64, steps: usize, mode: StepMode) -> WaveState {
    let prop = Propagator::new(p, grid, dt, mode).unwrap();
    let mut ws = Workspace::new(grid);
    let mut s = state.clone();
    for _ in 0..steps {
        prop.step(grid, &mut s, &mut ws);
    }
    s
}
