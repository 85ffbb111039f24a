//! Closed-form wavefunction amplitudes of the qubit–field state.
//!
//! In the displaced frame the joint state at time τ is
//!
//! ```text
//! Σ_ε |ε⟩ ⊗ [ f⁽⁰⁾_ε − ∫dt f⁽¹⁾_ε(τ,t) b†(t) + ∫∫_{t<t'} f⁽²⁾_ε(τ,t,t') b†(t)b†(t') − … ] |0⟩
//! ```
//!
//! where f⁽⁰⁾ is the no-emission amplitude of the driven, decaying qubit and
//! the j-photon amplitudes are products of no-emission segments joined by
//! emission events at rate √γ.

use serde::Serialize;

use crate::config::{GateConfig, Outcome};
use crate::error::{Error, Result};

/// cos(√z), continued to cosh(√−z) for z < 0.
fn cos_sqrt(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0
    } else if z > 0.0 {
        z.sqrt().cos()
    } else {
        (-z).sqrt().cosh()
    }
}

/// sin(√z)/√z, continued to sinh(√−z)/√−z for z < 0.
fn sinc_sqrt(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0
    } else if z > 0.0 {
        let r = z.sqrt();
        r.sin() / r
    } else {
        let r = (-z).sqrt();
        r.sinh() / r
    }
}

/// No-emission amplitude f⁽⁰⁾_ε(t) starting from |g⟩.
///
/// Written through the entire functions cos√z and sin√z/√z of
/// z = (Ω't/2)², Ω'² = Ω² − γ²/4, so the overdamped branch Ω < γ/2 and the
/// critical point are handled without special cases.
pub fn eval_f0(outcome: Outcome, t: f64, cfg: &GateConfig) -> f64 {
    let omega = cfg.omega();
    let gamma = cfg.gamma;
    let z = (omega * omega - 0.25 * gamma * gamma) * t * t / 4.0;
    let envelope = (-0.25 * gamma * t).exp();
    match outcome {
        Outcome::G => envelope * (cos_sqrt(z) + 0.25 * gamma * t * sinc_sqrt(z)),
        Outcome::E => envelope * 0.5 * omega * t * sinc_sqrt(z),
    }
}

/// One-photon amplitude f⁽¹⁾_ε(T, t) = √γ f⁽⁰⁾_ε(T − t) f⁽⁰⁾_e(t), for 0 ≤ t ≤ T.
pub fn eval_f1(outcome: Outcome, final_time: f64, t: f64, cfg: &GateConfig) -> f64 {
    debug_assert!((0.0..=final_time).contains(&t));
    cfg.gamma.sqrt() * eval_f0(outcome, final_time - t, cfg) * eval_f0(Outcome::E, t, cfg)
}

/// Two-photon amplitude f⁽²⁾_ε(T, t1, t2) on the ordered wedge t1 < t2.
pub fn eval_f2(outcome: Outcome, final_time: f64, t1: f64, t2: f64, cfg: &GateConfig) -> Result<f64> {
    if t2 <= t1 {
        return Err(Error::TimeOrdering { t1, t2 });
    }
    Ok(cfg.gamma
        * eval_f0(outcome, final_time - t2, cfg)
        * eval_f0(Outcome::E, t2 - t1, cfg)
        * eval_f0(Outcome::E, t1, cfg))
}

/// Two-photon amplitudes sampled at bin centres, f⁽²⁾_ε(τ, t_n, t_m) for n < m.
///
/// Stored in factored form: because the middle factor depends only on the
/// lag t_m − t_n = (m − n)Δt, three length-N arrays describe the whole wedge.
#[derive(Debug, Clone, Serialize)]
pub struct PairAmplitudes {
    gamma: f64,
    /// f⁽⁰⁾_ε(τ − t_m)
    tail: Vec<f64>,
    /// f⁽⁰⁾_e(kΔt), k = 0..N
    lag: Vec<f64>,
    /// f⁽⁰⁾_e(t_n)
    head: Vec<f64>,
}

impl PairAmplitudes {
    /// Entry on the ordered wedge; zero off it (n ≥ m).
    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        if n >= m {
            return 0.0;
        }
        self.gamma * self.tail[m] * self.lag[m - n] * self.head[n]
    }

    /// Symmetrized amplitude f⁽²⁾(t_n, t_m) + f⁽²⁾(t_m, t_n); only one term is nonzero.
    #[inline]
    pub fn symmetric(&self, n: usize, m: usize) -> f64 {
        if n < m {
            self.get(n, m)
        } else {
            self.get(m, n)
        }
    }

    pub fn len(&self) -> usize {
        self.head.len()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_empty()
    }
}

/// Sampled amplitudes for one post-selection outcome.
#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub outcome: Outcome,
    /// f⁽⁰⁾_ε(τ)
    pub f0: f64,
    /// f⁽¹⁾_ε(τ, t_n) at bin centres.
    pub f1: Vec<f64>,
    pub f2: PairAmplitudes,
    /// Unnormalized emission probabilities p⁽⁰⁾, p⁽¹⁾, p⁽²⁾.
    pub p: [f64; 3],
    /// Post-selection probability Σ_j p⁽ʲ⁾ within the photon cap.
    pub prob: f64,
    pub photon_cap: usize,
    dt: f64,
}

impl Branch {
    /// ∫₀^τ f⁽¹⁾ dt by the midpoint rule.
    pub fn integral_f1(&self) -> f64 {
        self.dt * self.f1.iter().sum::<f64>()
    }

    /// ∫∫_{t<t'} f⁽²⁾ dt dt' by the midpoint rule.
    pub fn integral_f2(&self) -> f64 {
        if self.photon_cap < 2 {
            return 0.0;
        }
        let n = self.f1.len();
        let mut acc = 0.0;
        for m in 1..n {
            let mut row = 0.0;
            for k in 0..m {
                row += self.f2.lag[m - k] * self.f2.head[k];
            }
            acc += self.f2.tail[m] * row;
        }
        self.f2.gamma * acc * self.dt * self.dt
    }

    /// ∫dt ∫dt' f⁽²⁾_sym(t, t') f⁽¹⁾(t'), the one/two-photon overlap driven
    /// by a flat input field.
    pub fn pair_overlap(&self) -> f64 {
        if self.photon_cap < 2 {
            return 0.0;
        }
        let n = self.f1.len();
        let mut acc = 0.0;
        for m in 1..n {
            let mut row = 0.0;
            for k in 0..m {
                row += self.f2.lag[m - k] * self.f2.head[k] * (self.f1[m] + self.f1[k]);
            }
            acc += self.f2.tail[m] * row;
        }
        self.f2.gamma * acc * self.dt * self.dt
    }

    /// Mean photon number of bin n in the displaced frame (unnormalized).
    pub fn bin_occupation(&self, n: usize) -> f64 {
        let mut pair = 0.0;
        if self.photon_cap >= 2 {
            for m in 0..self.f1.len() {
                if m != n {
                    let a = self.f2.symmetric(n, m);
                    pair += a * a;
                }
            }
        }
        self.dt * (self.f1[n] * self.f1[n] + self.dt * pair)
    }

    /// ⟨φ_ε| b_n |φ_ε⟩ in the displaced frame (unnormalized).
    pub fn bin_coherence(&self, n: usize) -> f64 {
        let mut pair = 0.0;
        if self.photon_cap >= 2 {
            for m in 0..self.f1.len() {
                if m != n {
                    pair += self.f2.symmetric(n, m) * self.f1[m];
                }
            }
        }
        -self.dt.sqrt() * (self.f1[n] * self.f0 + self.dt * pair)
    }
}

/// Amplitudes and emission probabilities for both outcomes.
#[derive(Debug, Clone, Serialize)]
pub struct WaveAmplitudes {
    pub g: Branch,
    pub e: Branch,
}

impl WaveAmplitudes {
    pub fn branch(&self, outcome: Outcome) -> &Branch {
        match outcome {
            Outcome::G => &self.g,
            Outcome::E => &self.e,
        }
    }

    pub fn prob(&self, outcome: Outcome) -> f64 {
        self.branch(outcome).prob
    }
}

fn sample_branch(outcome: Outcome, cfg: &GateConfig) -> Branch {
    let n = cfg.n_bins;
    let dt = cfg.dt();
    let tau = cfg.tau;
    let centres: Vec<f64> = (0..n).map(|k| cfg.bin_center(k)).collect();
    let tail: Vec<f64> = centres.iter().map(|&t| eval_f0(outcome, tau - t, cfg)).collect();
    let head: Vec<f64> = centres.iter().map(|&t| eval_f0(Outcome::E, t, cfg)).collect();
    let lag: Vec<f64> = (0..n).map(|k| eval_f0(Outcome::E, k as f64 * dt, cfg)).collect();
    let sqrt_gamma = cfg.gamma.sqrt();
    let f1: Vec<f64> = tail.iter().zip(&head).map(|(a, b)| sqrt_gamma * a * b).collect();
    let f2 = PairAmplitudes { gamma: cfg.gamma, tail, lag, head };

    let f0 = eval_f0(outcome, tau, cfg);
    let p0 = f0 * f0;
    let p1 = dt * f1.iter().map(|x| x * x).sum::<f64>();
    let p2 = if cfg.photon_cap >= 2 {
        let mut acc = 0.0;
        for m in 1..n {
            let mut row = 0.0;
            for k in 0..m {
                let v = f2.lag[m - k] * f2.head[k];
                row += v * v;
            }
            acc += f2.tail[m] * f2.tail[m] * row;
        }
        cfg.gamma * cfg.gamma * acc * dt * dt
    } else {
        0.0
    };
    Branch { outcome, f0, f1, f2, p: [p0, p1, p2], prob: p0 + p1 + p2, photon_cap: cfg.photon_cap, dt }
}

/// Samples all amplitudes on the bin centres and integrates |f⁽ʲ⁾|² over
/// the ordered simplex with the midpoint rule.
pub fn emission_probabilities(cfg: &GateConfig) -> WaveAmplitudes {
    let (g, e) = rayon::join(|| sample_branch(Outcome::G, cfg), || sample_branch(Outcome::E, cfg));
    WaveAmplitudes { g, e }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(gamma_tau: f64, theta: f64, n: usize) -> GateConfig {
        GateConfig::new(gamma_tau, theta, n).unwrap()
    }

    #[test]
    fn initial_state_is_ground() {
        let c = cfg(0.075, 0.93 * PI, 100);
        assert_eq!(eval_f0(Outcome::G, 0.0, &c), 1.0);
        assert_eq!(eval_f0(Outcome::E, 0.0, &c), 0.0);
    }

    #[test]
    fn classical_map_without_decay() {
        for theta in [0.1, 1.0, PI / 2.0, 2.5, PI] {
            let c = cfg(0.0, theta, 10);
            let g = eval_f0(Outcome::G, 1.0, &c);
            let e = eval_f0(Outcome::E, 1.0, &c);
            assert!((g - (theta / 2.0).cos()).abs() < 1e-15, "theta {theta}");
            assert!((e - (theta / 2.0).sin()).abs() < 1e-15, "theta {theta}");
        }
        let c = cfg(0.0, PI, 10);
        assert!(eval_f0(Outcome::G, 1.0, &c).abs() < 1e-15);
    }

    #[test]
    fn no_emission_without_decay() {
        let c = cfg(0.0, 2.0, 50);
        assert_eq!(eval_f1(Outcome::G, 1.0, 0.3, &c), 0.0);
        assert_eq!(eval_f2(Outcome::E, 1.0, 0.2, 0.7, &c).unwrap(), 0.0);
        let amps = emission_probabilities(&c);
        assert_eq!(amps.e.p[1], 0.0);
        assert_eq!(amps.e.p[2], 0.0);
        assert!((amps.e.prob - 1.0f64.sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn one_photon_amplitude_vanishes_at_start() {
        let c = cfg(0.075, 0.93 * PI, 10);
        assert_eq!(eval_f1(Outcome::G, 1.0, 0.0, &c), 0.0);
        assert_eq!(eval_f1(Outcome::E, 1.0, 0.0, &c), 0.0);
    }

    #[test]
    fn f2_rejects_unordered_times() {
        let c = cfg(0.075, 1.0, 10);
        assert!(matches!(eval_f2(Outcome::G, 1.0, 0.5, 0.5, &c), Err(Error::TimeOrdering { .. })));
        assert!(eval_f2(Outcome::G, 1.0, 0.6, 0.5, &c).is_err());
    }

    #[test]
    fn undriven_qubit_stays_ground() {
        let c = cfg(0.075, 0.0, 200);
        let amps = emission_probabilities(&c);
        assert!((amps.g.prob - 1.0).abs() < 1e-15);
        assert_eq!(amps.g.p[1], 0.0);
        assert_eq!(amps.g.p[2], 0.0);
        assert_eq!(amps.e.prob, 0.0);
    }

    /// No-emission amplitudes obey the non-Hermitian Schrödinger equation
    /// ċ_g = −(Ω/2)c_e, ċ_e = (Ω/2)c_g − (γ/2)c_e. Checked by central differences.
    #[test]
    fn f0_solves_no_jump_equation() {
        for (gamma, theta) in [(0.075, 0.93 * PI), (3.0, 1.0), (2.0, 1.0)] {
            let c = cfg(gamma, theta, 10);
            let h = 1e-5;
            for &t in &[0.1, 0.4, 0.77] {
                let d = |o| (eval_f0(o, t + h, &c) - eval_f0(o, t - h, &c)) / (2.0 * h);
                let (g, e) = (eval_f0(Outcome::G, t, &c), eval_f0(Outcome::E, t, &c));
                let om = c.omega();
                assert!((d(Outcome::G) + 0.5 * om * e).abs() < 1e-8);
                assert!((d(Outcome::E) - 0.5 * om * g + 0.5 * gamma * e).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn continuous_across_critical_damping() {
        let gamma = 2.0;
        let omega = gamma / 2.0;
        {
            let lo = cfg(gamma, omega - 1e-10, 10);
            let hi = cfg(gamma, omega + 1e-10, 10);
            let at = cfg(gamma, omega, 10);
            for &t in &[0.2, 0.5, 1.0] {
                for o in Outcome::BOTH {
                    let (a, b, m) = (eval_f0(o, t, &lo), eval_f0(o, t, &hi), eval_f0(o, t, &at));
                    assert!((a - b).abs() <= 1e-8);
                    assert!((a - m).abs() <= 1e-8 && m.is_finite());
                }
            }
        }
    }

    #[test]
    fn probabilities_nearly_normalized() {
        let c = cfg(0.075, 0.93 * PI, 4000);
        let amps = emission_probabilities(&c);
        let total = amps.g.prob + amps.e.prob;
        assert!((total - 1.0).abs() <= 1e-3, "P_g + P_e = {total}");
    }

    #[test]
    fn quadrature_converged_at_default_bins() {
        let a = emission_probabilities(&cfg(0.075, 0.93 * PI, 4000));
        let b = emission_probabilities(&cfg(0.075, 0.93 * PI, 8000));
        for o in Outcome::BOTH {
            for j in 0..3 {
                let (x, y) = (a.branch(o).p[j], b.branch(o).p[j]);
                assert!((x - y).abs() <= 1e-6, "p{j}_{o}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn factored_pairs_match_direct_evaluation() {
        let c = cfg(0.075, 0.93 * PI, 40);
        let amps = emission_probabilities(&c);
        for o in Outcome::BOTH {
            let b = amps.branch(o);
            for (n, m) in [(0, 1), (3, 17), (20, 39)] {
                let direct = eval_f2(o, 1.0, c.bin_center(n), c.bin_center(m), &c).unwrap();
                assert!((b.f2.get(n, m) - direct).abs() < 1e-14);
                assert_eq!(b.f2.symmetric(m, n), b.f2.get(n, m));
            }
            assert_eq!(b.f2.get(5, 5), 0.0);
            let direct = eval_f1(o, 1.0, c.bin_center(7), &c);
            assert!((b.f1[7] - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn bin_occupations_sum_to_mean_photon_number() {
        let c = cfg(0.075, 0.93 * PI, 300);
        let amps = emission_probabilities(&c);
        for o in Outcome::BOTH {
            let b = amps.branch(o);
            let total: f64 = (0..c.n_bins).map(|n| b.bin_occupation(n)).sum();
            assert!((total - (b.p[1] + 2.0 * b.p[2])).abs() < 1e-12);
        }
    }
}
