use std::path::PathBuf;

use anatomy_core::husimi::Route;
use anatomy_core::{ConfigOverrides, Outcome};
use clap::{Parser, Subcommand, ValueEnum};

/// Energetics of a waveguide-driven single-qubit gate: weak values,
/// conditional phase-space functions and a brute-force Fock oracle.
#[derive(Debug, Parser)]
#[command(name = "anatomy", version)]
pub struct Cli {
    /// `key = value` file with gamma_tau, theta_over_pi, n_bins, photon_cap, grid_half_width, grid_step.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Decay rate times gate duration, γτ.
    #[arg(long, global = true)]
    pub gamma_tau: Option<f64>,
    /// Gate angle in units of π.
    #[arg(long, global = true)]
    pub theta_over_pi: Option<f64>,
    /// Number of collision time bins N.
    #[arg(long, global = true)]
    pub n_bins: Option<usize>,
    /// Photon truncation for amplitude-based quantities (1 or 2).
    #[arg(long, global = true)]
    pub photon_cap: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, env = "ANATOMY_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutcomeArg {
    G,
    E,
    Both,
}

impl OutcomeArg {
    pub fn outcomes(self) -> Vec<Outcome> {
        match self {
            OutcomeArg::G => vec![Outcome::G],
            OutcomeArg::E => vec![Outcome::E],
            OutcomeArg::Both => Outcome::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Effect,
    Wavefunction,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Route {
        match r {
            RouteArg::Effect => Route::Effect,
            RouteArg::Wavefunction => Route::Wavefunction,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Qubit state, weak values and cumulative Δ𝒩 over the gate.
    Trajectory,
    /// Probabilities, Δ𝒩, Δ𝒩(ω₀) and Wigner negativity versus θ.
    Sweep {
        #[arg(long, default_value_t = anatomy_core::sweep::DEFAULT_POINTS)]
        points: usize,
        /// Add Δ𝒩 from one- and two-photon truncated amplitudes.
        #[arg(long)]
        compare_truncation: bool,
    },
    /// Conditional Wigner function of the ω₀ mode.
    Wigner {
        #[arg(long, value_enum, default_value = "both")]
        outcome: OutcomeArg,
    },
    /// Conditional Husimi-Q function of one time bin.
    HusimiSlice {
        /// Bin index; defaults to N/2.
        #[arg(long)]
        bin: Option<usize>,
        #[arg(long, value_enum, default_value = "g")]
        outcome: OutcomeArg,
        #[arg(long, value_enum, default_value = "effect")]
        route: RouteArg,
    },
    /// Run the invariant and brute-force oracle suite.
    Validate {
        /// Small oracle (200 bins).
        #[arg(long)]
        quick: bool,
        /// Oracle bin count; overrides --quick.
        #[arg(long)]
        oracle_bins: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trajectory => "trajectory",
            Command::Sweep { .. } => "sweep",
            Command::Wigner { .. } => "wigner",
            Command::HusimiSlice { .. } => "husimi-slice",
            Command::Validate { .. } => "validate",
        }
    }
}

impl Cli {
    pub fn flag_overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            gamma_tau: self.gamma_tau,
            theta_over_pi: self.theta_over_pi,
            n_bins: self.n_bins,
            photon_cap: self.photon_cap,
            ..ConfigOverrides::default()
        }
    }
}
