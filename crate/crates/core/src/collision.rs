//! Collision-model propagation of the qubit and of the effect matrices,
//! and the conditional (weak) values built from them.
//!
//! Each collision couples the qubit to one vacuum time-bin mode of the
//! displaced-frame field for a time Δt. The step unitary is the exact
//! exponential of the bin generator on qubit ⊗ {|0⟩, |1⟩}; its two Kraus
//! blocks K₀ = ⟨0|U|0⟩ and K₁ = ⟨1|U|0⟩ give a trace-preserving map whose
//! generator is the Lindblad equation with drive (Ω/2)[σ† − σ, ·] and
//! dissipator γ(σρσ† − ½{σ†σ, ρ}). Effects are propagated with the exact
//! adjoint of that map, so completeness Σ_ε E_ε = 1 holds at every step.

use nalgebra::{Matrix2, Matrix4};
use serde::Serialize;

use crate::config::{GateConfig, Outcome};
use crate::error::{Error, Result};
use crate::qubit::{projector, sigma, sigma_dag, Mat2, QubitMatrix, Role, C64};

/// Post-selection probabilities below this are treated as impossible.
pub const MIN_POST_SELECTION: f64 = 1e-12;

/// Kraus pair (no emission, one emission) of a single collision.
#[derive(Debug, Clone, Copy)]
pub struct CollisionMap {
    pub k0: Mat2,
    pub k1: Mat2,
}

impl CollisionMap {
    pub fn new(cfg: &GateConfig) -> Self {
        let dt = cfg.dt();
        let drive = 0.5 * cfg.omega() * dt;
        let exch = (cfg.gamma * dt).sqrt();
        // index = 2·qubit + photons, qubit ∈ {g=0, e=1}, photons ∈ {0, 1}
        let mut gen = Matrix4::<f64>::zeros();
        for k in 0..2 {
            // drive (Ω/2)(σ† − σ)
            gen[(2 + k, k)] += drive;
            gen[(k, 2 + k)] -= drive;
        }
        // exchange √(γΔt)(σ†b − σb†)
        gen[(2, 1)] += exch;
        gen[(1, 2)] -= exch;
        let u = gen.exp();
        let block = |row_off: usize| {
            Matrix2::new(
                C64::new(u[(row_off, 0)], 0.0),
                C64::new(u[(row_off, 2)], 0.0),
                C64::new(u[(2 + row_off, 0)], 0.0),
                C64::new(u[(2 + row_off, 2)], 0.0),
            )
        };
        CollisionMap { k0: block(0), k1: block(1) }
    }

    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        self.k0 * rho * self.k0.adjoint() + self.k1 * rho * self.k1.adjoint()
    }

    pub fn apply_adjoint(&self, effect: &Mat2) -> Mat2 {
        self.k0.adjoint() * effect * self.k0 + self.k1.adjoint() * effect * self.k1
    }
}

/// ρ_q(t_n), n = 0..=N, starting from |g⟩⟨g|.
pub fn forward_propagate(cfg: &GateConfig) -> Vec<QubitMatrix> {
    forward_propagate_from(cfg, QubitMatrix::ground_state()).expect("ground state is normalized")
}

pub fn forward_propagate_from(cfg: &GateConfig, initial: QubitMatrix) -> Result<Vec<QubitMatrix>> {
    let tr = initial.trace().re;
    if (tr - 1.0).abs() > 1e-10 || initial.trace().im.abs() > 1e-10 {
        return Err(Error::NotNormalized(tr));
    }
    let map = CollisionMap::new(cfg);
    let mut out = Vec::with_capacity(cfg.n_bins + 1);
    let mut rho = initial.m;
    out.push(QubitMatrix { m: rho, role: Role::State });
    for _ in 0..cfg.n_bins {
        rho = map.apply(&rho);
        out.push(QubitMatrix { m: rho, role: Role::State });
    }
    Ok(out)
}

/// E_ε(τ, t_n), n = 0..=N, with E_ε(τ, τ) = Π_ε.
pub fn backward_propagate(cfg: &GateConfig, outcome: Outcome) -> Vec<QubitMatrix> {
    let map = CollisionMap::new(cfg);
    let mut out = vec![QubitMatrix { m: projector(outcome.index()), role: Role::Effect }; cfg.n_bins + 1];
    let mut effect = projector(outcome.index());
    for n in (0..cfg.n_bins).rev() {
        effect = map.apply_adjoint(&effect);
        out[n] = QubitMatrix { m: effect, role: Role::Effect };
    }
    out
}

/// Conditional time series for one post-selection outcome.
#[derive(Debug, Clone, Serialize)]
pub struct Conditional {
    /// ⟨σ(t_n)⟩_ε
    #[serde(skip)]
    pub sigma: Vec<C64>,
    /// 𝒥_ε(t_n); γ𝒥 is the conditional emission rate.
    pub jump: Vec<f64>,
    /// Δ𝒩_ε accumulated over [0, t_n].
    pub cum_dn: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WeakTrajectory {
    pub cfg: GateConfig,
    pub rho: Vec<QubitMatrix>,
    pub effects: [Vec<QubitMatrix>; 2],
    pub prob: [f64; 2],
    conditional: [Option<Conditional>; 2],
}

impl WeakTrajectory {
    /// Runs the forward and both backward propagations and derives the
    /// weak values on the collision grid.
    ///
    /// Weak values pair ρ_q(t_n) with E_ε(τ, t_n) at the same grid time and
    /// time integrals use the trapezoid rule over those grid values (the
    /// midpoint rule over bin averages).
    pub fn compute(cfg: &GateConfig) -> Self {
        let (rho, (eg, ee)) = rayon::join(
            || forward_propagate(cfg),
            || rayon::join(|| backward_propagate(cfg, Outcome::G), || backward_propagate(cfg, Outcome::E)),
        );
        let last = &rho[cfg.n_bins].m;
        let prob = [last[(0, 0)].re, last[(1, 1)].re];
        let effects = [eg, ee];
        let conditional = [0, 1]
            .map(|i| (prob[i] >= MIN_POST_SELECTION).then(|| conditional_series(cfg, &rho, &effects[i], prob[i])));
        WeakTrajectory { cfg: cfg.clone(), rho, effects, prob, conditional }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn prob(&self, outcome: Outcome) -> f64 {
        self.prob[outcome.index()]
    }

    pub fn effects(&self, outcome: Outcome) -> &[QubitMatrix] {
        &self.effects[outcome.index()]
    }

    pub fn conditional(&self, outcome: Outcome) -> Result<&Conditional> {
        self.conditional[outcome.index()]
            .as_ref()
            .ok_or(Error::UnlikelyPostSelection { outcome, probability: self.prob(outcome) })
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.len() {
            return Err(Error::BinOutOfRange { index: n, bins: self.cfg.n_bins });
        }
        Ok(())
    }

    /// Weak value of σ at bin n, averaged over the bin edges t_n and t_{n+1}.
    pub fn bin_sigma(&self, outcome: Outcome, n: usize) -> Result<C64> {
        if n >= self.cfg.n_bins {
            return Err(Error::BinOutOfRange { index: n, bins: self.cfg.n_bins });
        }
        let c = self.conditional(outcome)?;
        Ok(0.5 * (c.sigma[n] + c.sigma[n + 1]))
    }

    /// 𝒥_ε at bin n, averaged over the bin edges.
    pub fn bin_jump(&self, outcome: Outcome, n: usize) -> Result<f64> {
        if n >= self.cfg.n_bins {
            return Err(Error::BinOutOfRange { index: n, bins: self.cfg.n_bins });
        }
        let c = self.conditional(outcome)?;
        Ok(0.5 * (c.jump[n] + c.jump[n + 1]))
    }

    /// Unconditional change of the field excitation number up to t_n,
    /// Σ_ε P_ε Δ𝒩_ε(t_n).
    pub fn unconditional_cum_dn(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for o in Outcome::BOTH {
            if let Ok(c) = self.conditional(o) {
                let p = self.prob(o);
                for (acc, v) in out.iter_mut().zip(&c.cum_dn) {
                    *acc += p * v;
                }
            }
        }
        out
    }
}

fn conditional_series(cfg: &GateConfig, rho: &[QubitMatrix], effects: &[QubitMatrix], prob: f64) -> Conditional {
    let s = sigma();
    let sd = sigma_dag();
    let mut sigma_wv = Vec::with_capacity(rho.len());
    let mut jump = Vec::with_capacity(rho.len());
    for (r, e) in rho.iter().zip(effects) {
        let sr = s * r.m;
        sigma_wv.push((e.m * sr).trace() / prob);
        jump.push((e.m * sr * sd).trace().re / prob);
    }
    let dt = cfg.dt();
    let omega = cfg.omega();
    let rate = |n: usize| cfg.gamma * jump[n] - omega * sigma_wv[n].re;
    let mut cum_dn = Vec::with_capacity(rho.len());
    cum_dn.push(0.0);
    for n in 0..cfg.n_bins {
        let prev = cum_dn[n];
        cum_dn.push(prev + 0.5 * dt * (rate(n) + rate(n + 1)));
    }
    Conditional { sigma: sigma_wv, jump, cum_dn }
}

/// ⟨σ(t_n)⟩_ε = Tr{E_ε(τ,t_n) σ ρ_q(t_n)} / P_ε.
pub fn weak_sigma(traj: &WeakTrajectory, outcome: Outcome, n: usize) -> Result<C64> {
    traj.check_index(n)?;
    Ok(traj.conditional(outcome)?.sigma[n])
}

/// Post-selected mean output field split into the input drive and the
/// fluorescence −√γ⟨σ⟩_ε. Units time^{-1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputMean {
    /// α/√τ; `None` at γ = 0 where the coherent amplitude is not defined.
    pub input: Option<f64>,
    #[serde(skip)]
    pub fluorescence: C64,
}

impl OutputMean {
    pub fn total(&self) -> Option<C64> {
        self.input.map(|a| C64::new(a, 0.0) + self.fluorescence)
    }
}

/// ⟨b_out(t_n)⟩_ε = α/√τ − √γ⟨σ(t_n)⟩_ε. Real and imaginary parts are the
/// quadrature weak values.
pub fn weak_output_mean(traj: &WeakTrajectory, outcome: Outcome, n: usize) -> Result<OutputMean> {
    let s = weak_sigma(traj, outcome, n)?;
    Ok(OutputMean { input: traj.cfg.input_mean().ok(), fluorescence: -traj.cfg.gamma.sqrt() * s })
}

/// Δ𝒩_ε = ∫₀^τ dt (γ𝒥_ε − Ω Re⟨σ⟩_ε).
pub fn delta_n_exact(cfg: &GateConfig, outcome: Outcome) -> Result<f64> {
    let traj = WeakTrajectory::compute(cfg);
    Ok(*traj.conditional(outcome)?.cum_dn.last().expect("non-empty"))
}

pub fn cumulative_delta_n(cfg: &GateConfig, outcome: Outcome) -> Result<Vec<f64>> {
    let traj = WeakTrajectory::compute(cfg);
    Ok(traj.conditional(outcome)?.cum_dn.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(gamma_tau: f64, theta: f64, n: usize) -> GateConfig {
        GateConfig::new(gamma_tau, theta, n).unwrap()
    }

    #[test]
    fn kraus_pair_is_complete() {
        let m = CollisionMap::new(&cfg(0.3, 2.0, 17));
        let s = m.k0.adjoint() * m.k0 + m.k1.adjoint() * m.k1;
        assert!((s - Mat2::identity()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn pi_pulse_without_decay() {
        let rho = forward_propagate(&cfg(0.0, PI, 1000));
        assert!((rho[1000].m[(1, 1)].re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn undriven_qubit_stays_in_ground_state() {
        let rho = forward_propagate(&cfg(0.2, 0.0, 100));
        for r in &rho {
            assert!((r.m - projector(0)).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn rejects_unnormalized_initial_state() {
        let bad = QubitMatrix { m: projector(0) * C64::new(0.5, 0.0), role: Role::State };
        assert!(matches!(forward_propagate_from(&cfg(0.1, 1.0, 10), bad), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn effect_boundary_and_completeness() {
        let c = cfg(0.075, 0.93 * PI, 500);
        let eg = backward_propagate(&c, Outcome::G);
        let ee = backward_propagate(&c, Outcome::E);
        assert_eq!(eg[500].m, projector(0));
        assert_eq!(ee[500].m, projector(1));
        for (a, b) in eg.iter().zip(&ee) {
            let s = a.m + b.m - Mat2::identity();
            assert!(s.iter().all(|z| z.norm() <= 1e-10));
            assert!(a.is_valid(1e-10) && b.is_valid(1e-10));
        }
    }

    #[test]
    fn trace_preserved_and_states_valid() {
        let traj = WeakTrajectory::compute(&cfg(0.075, 0.93 * PI, 2000));
        for r in &traj.rho {
            assert!((r.trace().re - 1.0).abs() <= 1e-10);
            assert!(r.is_valid(1e-10));
        }
    }

    #[test]
    fn forward_backward_consistency() {
        let c = cfg(0.075, 0.93 * PI, 2000);
        let traj = WeakTrajectory::compute(&c);
        for o in Outcome::BOTH {
            let from_effect = traj.effects(o)[0].m[(0, 0)].re;
            assert!((from_effect - traj.prob(o)).abs() <= 10.0 * c.dt());
        }
    }

    #[test]
    fn sigma_weak_value_vanishes_at_final_time_for_excited() {
        let traj = WeakTrajectory::compute(&cfg(0.075, 0.93 * PI, 400));
        assert_eq!(weak_sigma(&traj, Outcome::E, 400).unwrap().norm(), 0.0);
    }

    #[test]
    fn rabi_limit_sigma_weak_value() {
        let theta = 0.7 * PI;
        let c = cfg(1e-6, theta, 4000);
        let traj = WeakTrajectory::compute(&c);
        let om = c.omega();
        for n in (0..=4000).step_by(250) {
            let t = c.grid_time(n);
            let expected = (0.5 * om * (1.0 - t)).sin() * (0.5 * om * t).sin() / (0.5 * theta).sin();
            let got = weak_sigma(&traj, Outcome::E, n).unwrap();
            assert!((got.re - expected).abs() <= 1e-3, "t={t}: {got} vs {expected}");
            assert!(got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_post_selection_is_an_error() {
        let traj = WeakTrajectory::compute(&cfg(0.075, 0.0, 100));
        assert!(matches!(
            weak_sigma(&traj, Outcome::E, 3),
            Err(Error::UnlikelyPostSelection { outcome: Outcome::E, .. })
        ));
        assert!(delta_n_exact(&cfg(0.075, 0.0, 100), Outcome::E).is_err());
        assert!(weak_sigma(&traj, Outcome::G, 3).is_ok());
        assert!(matches!(weak_sigma(&traj, Outcome::G, 101), Err(Error::BinOutOfRange { .. })));
    }

    #[test]
    fn output_mean_without_decay_is_input() {
        let traj = WeakTrajectory::compute(&cfg(0.0, 2.0, 100));
        for n in [0, 50, 100] {
            let m = weak_output_mean(&traj, Outcome::G, n).unwrap();
            assert_eq!(m.fluorescence, C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn output_mean_total_expectation() {
        let c = cfg(0.075, 0.93 * PI, 800);
        let traj = WeakTrajectory::compute(&c);
        let input = c.input_mean().unwrap();
        for n in [0, 200, 555, 800] {
            let mut weighted = C64::new(0.0, 0.0);
            for o in Outcome::BOTH {
                weighted += traj.prob(o) * weak_output_mean(&traj, o, n).unwrap().total().unwrap();
            }
            let rho = traj.rho[n].m;
            let uncond = input - c.gamma.sqrt() * (sigma() * rho).trace();
            assert!((weighted - uncond).norm() <= 1e-10);
        }
    }

    #[test]
    fn unconditional_energy_balance() {
        let c = cfg(0.075, 0.93 * PI, 2000);
        let traj = WeakTrajectory::compute(&c);
        let unc = traj.unconditional_cum_dn();
        for (n, u) in unc.iter().enumerate() {
            let ree = traj.rho[n].m[(1, 1)].re;
            assert!((u + ree).abs() <= 10.0 * c.dt(), "n={n}");
        }
    }

    #[test]
    fn emission_integral_bounded() {
        let c = cfg(0.075, 0.93 * PI, 1000);
        let traj = WeakTrajectory::compute(&c);
        for o in Outcome::BOTH {
            let j = &traj.conditional(o).unwrap().jump;
            let integral: f64 = (0..c.n_bins).map(|n| 0.5 * c.dt() * c.gamma * (j[n] + j[n + 1])).sum();
            assert!(integral >= 0.0 && integral <= c.photon_cap as f64 + 1e-6);
        }
    }

    #[test]
    fn step_size_convergence() {
        let base = cfg(0.075, 0.93 * PI, 1000);
        let values: Vec<f64> = [1000, 2000, 4000]
            .iter()
            .map(|&n| delta_n_exact(&base.with_bins(n).unwrap(), Outcome::G).unwrap())
            .collect();
        let d1 = (values[0] - values[1]).abs();
        let d2 = (values[1] - values[2]).abs();
        // first order in Δt: successive differences roughly halve
        assert!(d2 <= 0.55 * d1, "{values:?}");
    }
}
