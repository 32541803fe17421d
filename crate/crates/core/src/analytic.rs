//! Closed-form physics of the vacuum-field trap.
//!
//! The internal dynamics at a fixed atomic position live in the single
//! excitation manifold spanned by `|g,0⟩, |e,0⟩, |g,1⟩`. In the frame rotating
//! with the laser the Hamiltonian there is
//!
//! ```text
//!          | Δ/2   Ω/2    0   |
//! H'(x) =  | Ω/2  -Δ/2   g(x) |      basis (|g,0⟩, |e,0⟩, |g,1⟩)
//!          |  0    g(x) -Δ/2  |
//! ```
//!
//! For a weak laser the ground level `|g,0⟩` picks up a position-dependent
//! AC-Stark shift through the two dressed states `(|g,1⟩ ± |e,0⟩)/√2`, which
//! is the trapping potential. The small admixture of the decaying states sets
//! the effective photon-emission rate.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// Denominators `|Δ ± g|` smaller than this fraction of `g0` are rejected.
pub const DEGENERACY_EPSILON: f64 = 1e-6;

fn check_denominator(p: &PhysicalParams, what: &'static str, value: f64) -> Result<()> {
    let epsilon = DEGENERACY_EPSILON * p.g0;
    if value.abs() < epsilon || !value.is_finite() {
        return Err(Error::DegenerateDenominator { what, value: value.abs(), epsilon });
    }
    Ok(())
}

/// Energies `(E+, E-) = (+g, -g)` of the Jaynes-Cummings dressed states
/// `(|g,1⟩ ± |e,0⟩)/√2` in the interaction picture.
pub fn dressed_energies(g: f64) -> (f64, f64) {
    (g, -g)
}

/// Lowest-order perturbative eigensystem of `H'(x)` in the laser coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbativeLevels {
    /// Shifted ground level `|g,0⟩`.
    pub lambda0: f64,
    /// Lower dressed level `(|g,1⟩ - |e,0⟩)/√2`.
    pub lambda1: f64,
    /// Upper dressed level, with the `Δ+g` denominator in its Stark shift as
    /// commonly printed.
    pub lambda2: f64,
    /// Upper dressed level with the `Δ-g` denominator that second-order
    /// perturbation theory actually gives for that state. Agrees with the
    /// exact spectrum to O(Ω⁴); `lambda2` does not.
    pub lambda2_corrected: f64,
    /// Coefficient of `|g,1⟩` in the dressed ground state (real).
    pub amp_g1_in_psi0: f64,
    /// Coefficient of `|e,0⟩` in the dressed ground state (real).
    pub amp_e0_in_psi0: f64,
}

pub fn perturbative_levels(p: &PhysicalParams, x: f64) -> Result<PerturbativeLevels> {
    levels_at_coupling(p, p.coupling_at(x))
}

/// Same as [`perturbative_levels`] with the coupling given directly.
pub fn levels_at_coupling(p: &PhysicalParams, g: f64) -> Result<PerturbativeLevels> {
    let d = p.delta;
    check_denominator(p, "delta + g", d + g)?;
    check_denominator(p, "delta - g", d - g)?;
    let w2 = p.omega * p.omega;
    let denom = d * d - g * g;
    Ok(PerturbativeLevels {
        lambda0: d / 2.0 + w2 / 8.0 * (1.0 / (d + g) + 1.0 / (d - g)),
        lambda1: -d / 2.0 - g - w2 / (8.0 * (d + g)),
        lambda2: -d / 2.0 + g - w2 / (8.0 * (d + g)),
        lambda2_corrected: -d / 2.0 + g - w2 / (8.0 * (d - g)),
        amp_g1_in_psi0: p.omega / 2.0 * g / denom,
        amp_e0_in_psi0: p.omega / 2.0 * d / denom,
    })
}

/// The Hermitian single-excitation Hamiltonian `H'` at coupling `g`, basis
/// `(|g,0⟩, |e,0⟩, |g,1⟩)`.
pub fn subspace_hamiltonian(p: &PhysicalParams, g: f64) -> Matrix3<f64> {
    let h = p.delta / 2.0;
    let w = p.omega / 2.0;
    Matrix3::new(
        h, w, 0.0, //
        w, -h, g, //
        0.0, g, -h,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenPair {
    pub energy: f64,
    /// Unit vector in the basis `(|g,0⟩, |e,0⟩, |g,1⟩)`.
    pub vector: Vector3<f64>,
}

/// Exact eigensystem of `H'(x)`.
///
/// The pairs are ordered like the perturbative labels: index 0 is the
/// dressed ground state, 1 the state adiabatically connected to
/// `(|g,1⟩ - |e,0⟩)/√2` and 2 the one connected to `(|g,1⟩ + |e,0⟩)/√2`.
/// Each vector is phased to have a non-negative overlap with its label.
pub fn exact_subspace_spectrum(p: &PhysicalParams, x: f64) -> [EigenPair; 3] {
    spectrum_at_coupling(p, p.coupling_at(x))
}

pub fn spectrum_at_coupling(p: &PhysicalParams, g: f64) -> [EigenPair; 3] {
    let eig = SymmetricEigen::new(subspace_hamiltonian(p, g));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let labels = [
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(0.0, -r, r),
        Vector3::new(0.0, r, r),
    ];
    let cols: Vec<Vector3<f64>> = (0..3).map(|i| eig.eigenvectors.column(i).into_owned()).collect();

    // best assignment of eigenvectors to labels over all six permutations
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let score = |perm: &[usize; 3]| -> f64 {
        (0..3).map(|l| labels[l].dot(&cols[perm[l]]).powi(2)).sum()
    };
    let best = PERMS
        .iter()
        .max_by(|a, b| score(a).total_cmp(&score(b)))
        .expect("non-empty");

    std::array::from_fn(|l| {
        let mut v = cols[best[l]];
        if labels[l].dot(&v) < 0.0 {
            v = -v;
        }
        EigenPair { energy: eig.eigenvalues[best[l]], vector: v.normalize() }
    })
}

/// Exact trap depth `V0 = -Ω²g0² / (4Δ(Δ²-g0²))`: the ground-level Stark shift
/// at the cavity centre minus the shift far from it. Positive for `Δ < -g0`.
pub fn potential_depth_exact(p: &PhysicalParams) -> Result<f64> {
    check_denominator(p, "delta", p.delta)?;
    check_denominator(p, "|delta| - g0", p.delta.abs() - p.g0)?;
    let d = p.delta;
    Ok(-p.omega * p.omega * p.g0 * p.g0 / (4.0 * d * (d * d - p.g0 * p.g0)))
}

/// Near-resonance trap depth `Ω² / (8|Δ+g0|)`, valid for Ω ≪ |Δ+g0| ≪ g0.
pub fn potential_depth_approx(p: &PhysicalParams) -> Result<f64> {
    let off = p.delta + p.g0;
    check_denominator(p, "delta + g0", off)?;
    Ok(p.omega * p.omega / (8.0 * off.abs()))
}

/// Order-of-magnitude lifetime `4|Δ+g0|²/Ω² · min(1/Γ, 1/κ)`, in seconds.
pub fn lifetime_estimate(p: &PhysicalParams) -> Result<f64> {
    if p.omega <= 0.0 {
        return Err(Error::DegenerateInput("lifetime estimate needs omega > 0".into()));
    }
    let fastest = p.kappa.max(p.gamma);
    if fastest <= 0.0 {
        return Err(Error::DegenerateInput("lifetime estimate needs kappa or gamma > 0".into()));
    }
    let off = p.delta + p.g0;
    Ok(4.0 * off * off / (p.omega * p.omega) / fastest)
}

/// Effective decay rate of the trapped state,
/// `Ω²(κg0² + ΓΔ²) / (4(Δ²-g0²)²)`, in rad/s.
pub fn gamma_eff(p: &PhysicalParams) -> Result<f64> {
    check_denominator(p, "|delta| - g0", p.delta.abs() - p.g0)?;
    let d2 = p.delta * p.delta;
    let g2 = p.g0 * p.g0;
    let den = d2 - g2;
    Ok(p.omega * p.omega * (p.kappa * g2 + p.gamma * d2) / (4.0 * den * den))
}

/// Effective lifetime `1/Γ_eff`, in seconds.
pub fn tau_eff(p: &PhysicalParams) -> Result<f64> {
    let rate = gamma_eff(p)?;
    if rate <= 0.0 || !rate.is_finite() {
        return Err(Error::DegenerateInput(format!(
            "effective decay rate is {rate:e}; lifetime undefined"
        )));
    }
    Ok(1.0 / rate)
}

/// Three-dimensional bound-state margin `V0 (L/λ)² / E_R` with `λ = 2π` in
/// units of 1/k. Values of one or more guarantee a bound state. In one
/// dimension any attractive well binds, so the margin only matters in 3D.
pub fn bound_state_margin(v0: f64, length: f64, recoil_energy: f64) -> f64 {
    let ratio = length / std::f64::consts::TAU;
    v0 * ratio * ratio / recoil_energy
}

/// Laser parameters for a given trap depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaserDesign {
    pub omega: f64,
    /// Always below `-g0`.
    pub delta: f64,
    pub v0: f64,
    pub tau_eff: f64,
    /// `false` when the Rabi frequency is not below `|Δ|`.
    pub feasible: bool,
}

impl LaserDesign {
    pub fn detuning_ratio(&self, g0: f64) -> f64 {
        self.delta.abs() / g0
    }
}

/// Rabi frequency that produces trap depth `v0` at detuning `delta`, from
/// the exact depth formula.
pub fn omega_for_depth(p: &PhysicalParams, v0: f64, delta: f64) -> f64 {
    let d = delta.abs();
    (4.0 * v0 * d * (d * d - p.g0 * p.g0) / (p.g0 * p.g0)).sqrt()
}

/// Finds the laser setting with the longest effective lifetime among all
/// settings that produce a trap of depth `v0_target`.
///
/// With the Rabi frequency eliminated through the depth constraint, the
/// decay rate is proportional to `d(c + d²)/(d² - 1)` where `d = |Δ|/g0` and
/// `c = κ/Γ`. Its only stationary point above the pole solves the
/// biquadratic `d⁴ - (c+3)d² - c = 0`.
pub fn optimize_laser(p: &PhysicalParams, v0_target: f64) -> Result<LaserDesign> {
    if !(v0_target > 0.0) || !v0_target.is_finite() {
        return Err(Error::DegenerateInput(format!("target depth must be > 0, got {v0_target}")));
    }
    if p.kappa + p.gamma <= 0.0 {
        return Err(Error::DegenerateInput("optimization needs kappa + gamma > 0".into()));
    }
    if p.gamma == 0.0 {
        return Err(Error::Unbounded(format!(
            "with gamma = 0 the lifetime grows without bound as |delta| increases, \
             tau_eff ~ |delta| / (v0 kappa) = {:.3e} s per unit of |delta|/g0",
            p.g0 / (v0_target * p.kappa)
        )));
    }
    let c = p.kappa / p.gamma;
    let b = c + 3.0;
    let d2 = 0.5 * (b + (b * b + 4.0 * c).sqrt());
    let d = d2.sqrt();

    // d⁴ - (c+3)d² - c changes sign from negative to positive at the root,
    // so the decay rate has a minimum there.
    let h = |x: f64| x * (c + x * x) / (x * x - 1.0);
    debug_assert!(h(d) <= h(d * (1.0 + 1e-4)) && h(d) <= h(d * (1.0 - 1e-4)));

    let delta = -d * p.g0;
    let omega = omega_for_depth(p, v0_target, delta);
    let design = p.with_laser(omega, delta);
    let v0 = potential_depth_exact(&design)?;
    let tau = tau_eff(&design)?;
    Ok(LaserDesign { omega, delta, v0, tau_eff: tau, feasible: omega < delta.abs() })
}
