//! Trapping a ground-state atom in the vacuum field of an optical or
//! microwave cavity.
//!
//! A weak laser couples `|g,0⟩` off-resonantly to the atom-cavity dressed
//! states. Where the cavity coupling `g(x)` is large the resulting Stark
//! shift of `|g,0⟩` is deepest, so the atom is pulled into the cavity while
//! the field stays close to the vacuum.
//!
//! Units: frequencies and rates are angular (rad/s, ħ = 1), positions are
//! in units of 1/k and momenta in units of ħk, so a plane wave `exp(ipx)`
//! has kinetic energy `E_R p²`.
//!
//! - [`params`]: physical parameters and presets
//! - [`analytic`]: closed-form levels, trap depth, effective decay, laser design
//! - [`grid`]: the periodic grid and three-channel wavefunction
//! - [`evolution`]: split-step propagation, ground state, no-jump decay
//! - [`montecarlo`]: quantum-jump trajectories and ensembles
//! - [`config`]: configuration files

pub mod analytic;
pub mod config;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod montecarlo;
pub mod params;
pub mod stats;

pub use error::{Error, Result};
