//! Gate-angle sweeps at fixed γτ.

use rayon::prelude::*;
use serde::Serialize;

use crate::amplitudes::emission_probabilities;
use crate::collision::WeakTrajectory;
use crate::config::{GateConfig, GridSpec, Outcome};
use crate::error::{Error, Result};
use crate::husimi::delta_n_truncated;
use crate::wigner::{build_zeta, delta_n_omega0, negativity, wigner_eval};

pub const DEFAULT_POINTS: usize = 64;

/// θ_k/π = (k + 1)/K, k = 0..K: evenly spaced on (0, π], skipping θ = 0
/// where the excited outcome never occurs.
pub fn theta_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| (k + 1) as f64 / points as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub theta_over_pi: f64,
    pub p_g: f64,
    pub p_e: f64,
    pub dn_g: f64,
    pub dn_e: f64,
    pub dn_g_omega0: f64,
    pub dn_e_omega0: f64,
    pub neg_g: f64,
    pub neg_e: f64,
    /// Δ𝒩 from amplitudes truncated at one and two photons, [g, e].
    pub dn_trunc1: Option<[f64; 2]>,
    pub dn_trunc2: Option<[f64; 2]>,
}

impl SweepPoint {
    pub fn prob(&self, o: Outcome) -> f64 {
        match o {
            Outcome::G => self.p_g,
            Outcome::E => self.p_e,
        }
    }

    pub fn dn(&self, o: Outcome) -> f64 {
        match o {
            Outcome::G => self.dn_g,
            Outcome::E => self.dn_e,
        }
    }

    /// P_g Δ𝒩_g + P_e Δ𝒩_e + P_e, zero by excitation conservation.
    pub fn conservation_residual(&self) -> f64 {
        self.p_g * self.dn_g + self.p_e * self.dn_e + self.p_e
    }
}

pub fn sweep_point(base: &GateConfig, theta_over_pi: f64, compare_truncation: bool) -> Result<SweepPoint> {
    let cfg = base.with_theta(theta_over_pi * std::f64::consts::PI)?.with_photon_cap(2)?;
    if cfg.gamma <= 0.0 {
        return Err(Error::AmplitudeUndefined);
    }
    let traj = WeakTrajectory::compute(&cfg);
    let amps = emission_probabilities(&cfg);
    let grid = cfg.grid.unwrap_or(GridSpec::WIGNER_DEFAULT);

    let mut dn = [0.0; 2];
    let mut dn0 = [0.0; 2];
    let mut neg = [0.0; 2];
    for o in Outcome::BOTH {
        let i = o.index();
        dn[i] = *traj.conditional(o)?.cum_dn.last().expect("non-empty trajectory");
        let state = build_zeta(&amps, &cfg, o)?;
        dn0[i] = delta_n_omega0(&state, &cfg)?;
        neg[i] = negativity(&wigner_eval(&state, grid)?);
    }
    let (dn_trunc1, dn_trunc2) = if compare_truncation {
        let cap1 = cfg.clone().with_photon_cap(1)?;
        let t = |c: &GateConfig| -> Result<[f64; 2]> {
            Ok([delta_n_truncated(&amps, c, Outcome::G)?.value, delta_n_truncated(&amps, c, Outcome::E)?.value])
        };
        (Some(t(&cap1)?), Some(t(&cfg)?))
    } else {
        (None, None)
    };
    Ok(SweepPoint {
        theta_over_pi,
        p_g: traj.prob(Outcome::G),
        p_e: traj.prob(Outcome::E),
        dn_g: dn[0],
        dn_e: dn[1],
        dn_g_omega0: dn0[0],
        dn_e_omega0: dn0[1],
        neg_g: neg[0],
        neg_e: neg[1],
        dn_trunc1,
        dn_trunc2,
    })
}

/// Evaluates every θ on the grid in parallel; the output keeps grid order.
pub fn run_sweep(base: &GateConfig, points: usize, compare_truncation: bool) -> Result<Vec<SweepPoint>> {
    if points < 2 {
        return Err(Error::InvalidConfig(format!("sweep needs at least 2 points, got {points}")));
    }
    theta_grid(points).par_iter().map(|&t| sweep_point(base, t, compare_truncation)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spans_to_pi() {
        let g = theta_grid(64);
        assert_eq!(g.len(), 64);
        assert_eq!(g[63], 1.0);
        assert!(g[0] > 0.0);
    }

    #[test]
    fn small_sweep_is_ordered_and_conserving() {
        let base = GateConfig::new(0.075, 1.0, 400).unwrap();
        let pts = run_sweep(&base, 4, true).unwrap();
        for (p, t) in pts.iter().zip(theta_grid(4)) {
            assert_eq!(p.theta_over_pi, t);
            assert!(p.conservation_residual().abs() <= 10.0 * base.dt());
            assert!(p.dn_trunc1.is_some() && p.dn_trunc2.is_some());
        }
        assert!(run_sweep(&base, 1, false).is_err());
    }
}
