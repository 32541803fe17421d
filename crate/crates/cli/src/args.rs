use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cavitrap", version, about = "Trap a ground-state atom in a cavity vacuum field")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Start from a named preset instead of the one in the file.
    #[arg(long, global = true, value_parser = ["optical", "microwave"])]
    pub preset: Option<String>,

    /// Override one key, e.g. `--set laser.omega="0.7 2pi.MHz"`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Directory for CSV files and manifests.
    #[arg(long, global = true, default_value = "cavitrap-out")]
    pub out: PathBuf,

    /// Base random seed (overrides numerics.seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form trap depth, decay rate and lifetime.
    Analytic {
        /// Length used for the bound-state margin, in 1/k (default: 2σ).
        #[arg(long)]
        bound_length: Option<f64>,
    },
    /// Laser parameters that maximize the lifetime at a given trap depth.
    Optimize {
        /// Target depth, e.g. `1.02e4` or `"10 krad/s"` (default: current depth).
        #[arg(long)]
        v0: Option<String>,
    },
    /// Ground state by imaginary-time relaxation.
    Ground,
    /// Decay of the no-emission probability.
    Decay {
        #[arg(long, value_enum, default_value_t = DecayInit::Ground)]
        init: DecayInit,
    },
    /// Trapping-time ensemble of quantum-jump trajectories.
    Trap {
        /// Number of trajectories (overrides numerics.trajectories).
        #[arg(short = 'n', long)]
        trajectories: Option<usize>,
        /// Allow runs of more than two million steps per trajectory.
        #[arg(long)]
        long: bool,
    },
    /// Scan the detuning or the Rabi frequency.
    Sweep {
        #[arg(value_enum)]
        axis: Axis,
        /// First value: a frequency such as `"0.4 2pi.MHz"`, or a multiple of g0 such as `-3g0`.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// Last value, same syntax as `--from`.
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Number of evenly spaced values, endpoints included.
        #[arg(long, default_value_t = 25)]
        points: usize,
        /// Also run a trapping-time ensemble at every point.
        #[arg(long)]
        trap: bool,
        /// Trajectories per point (overrides numerics.trajectories).
        #[arg(short = 'n', long)]
        trajectories: Option<usize>,
        /// Allow runs of more than two million steps per trajectory.
        #[arg(long)]
        long: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecayInit {
    /// Relaxed ground state of the trap.
    Ground,
    /// Gaussian packet of width σ/4 in the one-photon channel.
    Photon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Delta,
    Omega,
}
