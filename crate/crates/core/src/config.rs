//! Gate parameters and unit conventions.
//!
//! Times are measured in units of the pulse duration, so `tau` defaults to 1
//! and `gamma` is numerically equal to the dimensionless product γτ. The
//! drive is resonant and every phase `e^{-iω₀t}` is absorbed by working in
//! the frame rotating at ω₀, which leaves all wavefunction amplitudes real.
//!
//! The ω₀ mode is quantized on a flat window of length τ (mode density
//! ϱ = τ). With that choice the coherent amplitude of the drive mode is
//! α = (θ/2)/√(γτ) and each time-bin mode carries α_n = α√(Δt/τ).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of the final projective qubit measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    G,
    E,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::G, Outcome::E];

    /// Basis index in {g, e}.
    pub fn index(self) -> usize {
        match self {
            Outcome::G => 0,
            Outcome::E => 1,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::G => "g",
            Outcome::E => "e",
        })
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "g" | "G" => Ok(Outcome::G),
            "e" | "E" => Ok(Outcome::E),
            other => Err(Error::InvalidConfig(format!("unknown outcome '{other}'"))),
        }
    }
}

/// Square phase-space grid: points `center + (i + i·j) * step` with
/// coordinates in `[-half_width, half_width]` along both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub step: f64,
}

impl GridSpec {
    pub const HUSIMI_DEFAULT: GridSpec = GridSpec { half_width: 5.0, step: 0.05 };
    pub const WIGNER_DEFAULT: GridSpec = GridSpec { half_width: 3.5, step: 0.02 };

    /// Number of samples along one axis.
    pub fn points_per_axis(&self) -> usize {
        2 * (self.half_width / self.step).round() as usize + 1
    }

    /// Axis coordinates, symmetric around zero.
    pub fn axis(&self) -> Vec<f64> {
        let k = (self.half_width / self.step).round() as i64;
        (-k..=k).map(|i| i as f64 * self.step).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.half_width > self.step) || !self.half_width.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid needs 0 < step < half_width, got step {} half_width {}",
                self.step, self.half_width
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Emitter decay rate γ (1/time).
    pub gamma: f64,
    /// Pulse duration τ.
    pub tau: f64,
    /// Gate angle θ = Ωτ.
    pub theta: f64,
    /// Number of collision bins N, Δt = τ/N.
    pub n_bins: usize,
    /// Maximum number of emitted photons kept in truncated expansions.
    pub photon_cap: usize,
    /// Optional override of the phase-space grid.
    pub grid: Option<GridSpec>,
}

impl GateConfig {
    pub const DEFAULT_GAMMA_TAU: f64 = 3.0 / 40.0;
    pub const DEFAULT_THETA_OVER_PI: f64 = 0.93;
    pub const DEFAULT_BINS: usize = 4000;

    /// Builds a config in units where τ = 1.
    pub fn new(gamma_tau: f64, theta: f64, n_bins: usize) -> Result<Self> {
        let cfg = GateConfig { gamma: gamma_tau, tau: 1.0, theta, n_bins, photon_cap: 2, grid: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_photon_cap(mut self, cap: usize) -> Result<Self> {
        self.photon_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.theta = theta;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_bins(&self, n_bins: usize) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.n_bins = n_bins;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return bad(format!("theta must be finite and >= 0, got {}", self.theta));
        }
        if self.n_bins == 0 {
            return bad(format!("n_bins must be >= 1, got {}", self.n_bins));
        }
        if !(1..=2).contains(&self.photon_cap) {
            return bad(format!("photon_cap must be 1 or 2, got {}", self.photon_cap));
        }
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        Ok(())
    }

    /// Rabi frequency Ω = θ/τ.
    pub fn omega(&self) -> f64 {
        self.theta / self.tau
    }

    pub fn dt(&self) -> f64 {
        self.tau / self.n_bins as f64
    }

    /// Collision grid t_n = nΔt, n = 0..=N.
    pub fn grid_time(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    /// Midpoint of bin n, (n + 1/2)Δt.
    pub fn bin_center(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.dt()
    }

    /// Coherent amplitude of the ω₀ mode, α = (θ/2)/√(γτ). Undefined at γ = 0.
    pub fn alpha(&self) -> Result<f64> {
        if self.gamma > 0.0 {
            Ok(0.5 * self.theta / (self.gamma * self.tau).sqrt())
        } else {
            Err(Error::AmplitudeUndefined)
        }
    }

    /// Per-bin coherent amplitude α_n = α√(Δt/τ).
    pub fn alpha_bin(&self) -> Result<f64> {
        Ok(self.alpha()? * (self.dt() / self.tau).sqrt())
    }

    /// Mean input field ⟨b_in⟩ = α/√τ = Ω/(2√γ), units time^{-1/2}.
    pub fn input_mean(&self) -> Result<f64> {
        Ok(self.alpha()? / self.tau.sqrt())
    }
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig::new(Self::DEFAULT_GAMMA_TAU, Self::DEFAULT_THETA_OVER_PI * std::f64::consts::PI, Self::DEFAULT_BINS)
            .expect("default config is valid")
    }
}

/// Partial settings read from a config file or command-line flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub gamma_tau: Option<f64>,
    pub theta_over_pi: Option<f64>,
    pub n_bins: Option<usize>,
    pub photon_cap: Option<usize>,
    pub grid_half_width: Option<f64>,
    pub grid_step: Option<f64>,
}

impl ConfigOverrides {
    /// Parses `key = value` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConfigOverrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let (key, value) =
                line.split_once('=').ok_or_else(|| parse_err(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let float = || value.parse::<f64>().map_err(|e| parse_err(format!("{key}: {e}")));
            let int = || value.parse::<usize>().map_err(|e| parse_err(format!("{key}: {e}")));
            match key {
                "gamma_tau" => out.gamma_tau = Some(float()?),
                "theta_over_pi" => out.theta_over_pi = Some(float()?),
                "n_bins" => out.n_bins = Some(int()?),
                "photon_cap" => out.photon_cap = Some(int()?),
                "grid_half_width" => out.grid_half_width = Some(float()?),
                "grid_step" => out.grid_step = Some(float()?),
                other => return Err(parse_err(format!("unknown key '{other}'"))),
            }
        }
        Ok(out)
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: &ConfigOverrides) -> Self {
        ConfigOverrides {
            gamma_tau: other.gamma_tau.or(self.gamma_tau),
            theta_over_pi: other.theta_over_pi.or(self.theta_over_pi),
            n_bins: other.n_bins.or(self.n_bins),
            photon_cap: other.photon_cap.or(self.photon_cap),
            grid_half_width: other.grid_half_width.or(self.grid_half_width),
            grid_step: other.grid_step.or(self.grid_step),
        }
    }

    /// Resolves against the figure defaults (γτ = 3/40, θ = 0.93π, N = 4000).
    pub fn resolve(&self) -> Result<GateConfig> {
        let gamma_tau = self.gamma_tau.unwrap_or(GateConfig::DEFAULT_GAMMA_TAU);
        let theta = self.theta_over_pi.unwrap_or(GateConfig::DEFAULT_THETA_OVER_PI) * std::f64::consts::PI;
        let mut cfg = GateConfig::new(gamma_tau, theta, self.n_bins.unwrap_or(GateConfig::DEFAULT_BINS))?;
        if let Some(cap) = self.photon_cap {
            cfg = cfg.with_photon_cap(cap)?;
        }
        if self.grid_half_width.is_some() || self.grid_step.is_some() {
            let grid = GridSpec {
                half_width: self.grid_half_width.unwrap_or(GridSpec::WIGNER_DEFAULT.half_width),
                step: self.grid_step.unwrap_or(GridSpec::WIGNER_DEFAULT.step),
            };
            grid.validate()?;
            cfg.grid = Some(grid);
        }
        Ok(cfg)
    }
}
