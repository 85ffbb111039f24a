//! Reduced state of the resonant (ω₀) field mode and its Wigner function.
//!
//! The ω₀ mode is the flat temporal mode u(t) = 1/√τ on [0, τ]. Projecting
//! the emitted wavefunction onto it gives, in the frame displaced by α,
//! the amplitudes f⁽⁰⁾|0⟩ − f̃⁽¹⁾|1⟩ + √2 f̃⁽²⁾|2⟩. Photons emitted into
//! the other modes only add weight to the vacuum entry.

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitudes::WaveAmplitudes;
use crate::collision::MIN_POST_SELECTION;
use crate::config::{GateConfig, GridSpec, Outcome};
use crate::error::{Error, Result};
use crate::qubit::C64;

/// Negativity above this is reported as nonzero.
pub const NEGATIVITY_THRESHOLD: f64 = 1e-4;

/// Boundary mass above which a grid is rejected as too narrow.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-8;

/// Most negative eigenvalue of ζ tolerated before the state is rejected.
pub const EIGENVALUE_FLOOR: f64 = -1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct SingleModeState {
    pub outcome: Outcome,
    /// ζ in the Fock basis {0, 1, 2}; real under the rotating-frame conventions.
    #[serde(serialize_with = "serialize_matrix")]
    pub zeta: Matrix3<f64>,
    /// f̃⁽¹⁾ = (1/√τ)∫f⁽¹⁾dt
    pub f1_tilde: f64,
    /// f̃⁽²⁾ = (1/τ)∫∫_{t<t'} f⁽²⁾
    pub f2_tilde: f64,
    /// Coherent offset α; zero when γ = 0.
    pub alpha: f64,
    pub prob: f64,
}

fn serialize_matrix<S: serde::Serializer>(m: &Matrix3<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(3))?;
    for i in 0..3 {
        seq.serialize_element(&[m[(i, 0)], m[(i, 1)], m[(i, 2)]])?;
    }
    seq.end()
}

impl SingleModeState {
    /// Wraps an explicit ζ. Fails if it is not a density matrix.
    pub fn from_matrix(outcome: Outcome, zeta: Matrix3<f64>, alpha: f64) -> Result<Self> {
        let state = SingleModeState { outcome, zeta, f1_tilde: 0.0, f2_tilde: 0.0, alpha, prob: 1.0 };
        state.check()?;
        Ok(state)
    }

    pub fn vacuum(outcome: Outcome, alpha: f64) -> Self {
        let mut zeta = Matrix3::zeros();
        zeta[(0, 0)] = 1.0;
        SingleModeState { outcome, zeta, f1_tilde: 0.0, f2_tilde: 0.0, alpha, prob: 1.0 }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = 0.5 * (self.zeta + self.zeta.transpose());
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    fn check(&self) -> Result<()> {
        let lo = self.min_eigenvalue();
        if lo < EIGENVALUE_FLOOR {
            return Err(Error::TruncationInconsistent(lo));
        }
        Ok(())
    }

    /// ⟨a†a⟩ of the displaced-frame state.
    pub fn photon_number(&self) -> f64 {
        self.zeta[(1, 1)] + 2.0 * self.zeta[(2, 2)]
    }

    /// ⟨a⟩ of the displaced-frame state.
    pub fn mean_amplitude(&self) -> f64 {
        self.zeta[(0, 1)] + 2f64.sqrt() * self.zeta[(1, 2)]
    }
}

/// (f̃⁽¹⁾, f̃⁽²⁾), the overlaps of the one- and two-photon amplitudes with
/// the flat ω₀ mode.
pub fn mode_overlaps(amps: &WaveAmplitudes, cfg: &GateConfig, outcome: Outcome) -> (f64, f64) {
    let branch = amps.branch(outcome);
    (branch.integral_f1() / cfg.tau.sqrt(), branch.integral_f2() / cfg.tau)
}

/// ζ_ε with entries
///
/// ```text
/// ζ₀₀ = (P − f̃₁² − 2f̃₂²)/P   ζ₀₁ = −f̃₁f⁽⁰⁾/P      ζ₀₂ = √2 f̃₂f⁽⁰⁾/P
/// ζ₁₁ = f̃₁²/P                ζ₁₂ = −√2 f̃₂f̃₁/P    ζ₂₂ = 2f̃₂²/P
/// ```
pub fn build_zeta(amps: &WaveAmplitudes, cfg: &GateConfig, outcome: Outcome) -> Result<SingleModeState> {
    let branch = amps.branch(outcome);
    let prob = branch.prob;
    if prob < MIN_POST_SELECTION {
        return Err(Error::UnlikelyPostSelection { outcome, probability: prob });
    }
    let (f1t, f2t) = mode_overlaps(amps, cfg, outcome);
    let f0 = branch.f0;
    let s2 = 2f64.sqrt();
    let phi = [f0, -f1t, s2 * f2t];
    let mut zeta = Matrix3::from_fn(|i, j| phi[i] * phi[j] / prob);
    zeta[(0, 0)] = (prob - f1t * f1t - 2.0 * f2t * f2t) / prob;
    let state =
        SingleModeState { outcome, zeta, f1_tilde: f1t, f2_tilde: f2t, alpha: cfg.alpha().unwrap_or(0.0), prob };
    state.check()?;
    Ok(state)
}

/// Δ𝒩_ε(ω₀) = ⟨a†a⟩_ζ + 2α Re⟨a⟩_ζ.
pub fn delta_n_omega0(state: &SingleModeState, cfg: &GateConfig) -> Result<f64> {
    let alpha = cfg.alpha()?;
    Ok(state.photon_number() + 2.0 * alpha * state.mean_amplitude())
}

/// Laguerre polynomial L_n^{(k)}(x) by the three-term recurrence.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Closed-form W at displacement β = μ − α for a state truncated at two
/// photons:
///
/// ```text
/// (2/π)e^{−2|β|²}[ζ₀₀ − ζ₁₁L₁(4|β|²) + ζ₂₂L₂(4|β|²) + 4Re{ζ₁₀β*}
///                 + 4√2 Re{ζ₂₀β*²} + 4√2 Re{ζ₂₁β*}(2|β|² − 1)]
/// ```
pub fn wigner_at(zeta: &Matrix3<f64>, beta: C64) -> f64 {
    let r2 = beta.norm_sqr();
    let x = 4.0 * r2;
    let bc = beta.conj();
    let s2 = 2f64.sqrt();
    let poly = zeta[(0, 0)] - zeta[(1, 1)] * laguerre(1, 0, x)
        + zeta[(2, 2)] * laguerre(2, 0, x)
        + 4.0 * (zeta[(1, 0)] * bc).re
        + 4.0 * s2 * (zeta[(2, 0)] * bc * bc).re
        + 4.0 * s2 * (zeta[(2, 1)] * bc).re * (2.0 * r2 - 1.0);
    2.0 / std::f64::consts::PI * (-2.0 * r2).exp() * poly
}

/// Wigner function of |m⟩⟨n| at displacement β.
pub fn fock_kernel(m: usize, n: usize, beta: C64) -> C64 {
    if m < n {
        return fock_kernel(n, m, beta).conj();
    }
    let x = 4.0 * beta.norm_sqr();
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let pref = 2.0 / std::f64::consts::PI * sign * (fact(n) / fact(m)).sqrt() * (-x / 2.0).exp();
    (2.0 * beta.conj()).powu((m - n) as u32) * pref * laguerre(n, m - n, x)
}

/// Wigner function of an arbitrary ζ through the Fock-basis kernel.
pub fn wigner_from_kernel(zeta: &Matrix3<f64>, beta: C64) -> f64 {
    let mut w = C64::new(0.0, 0.0);
    for m in 0..3 {
        for n in 0..3 {
            w += zeta[(m, n)] * fock_kernel(m, n, beta);
        }
    }
    w.re
}

/// W sampled on a square grid centred at α. `values[j * m + i]` belongs to
/// μ = α + axis[i] + i·axis[j].
#[derive(Debug, Clone, Serialize)]
pub struct WignerGrid {
    pub outcome: Outcome,
    pub center: f64,
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn points(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        let axis = self.grid.axis();
        let m = axis.len();
        let c = self.center;
        self.values.iter().enumerate().map(move |(k, &w)| (C64::new(c + axis[k % m], axis[k / m]), w))
    }

    fn area(&self) -> f64 {
        self.grid.step * self.grid.step
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.area()
    }

    pub fn abs_integral(&self) -> f64 {
        self.values.iter().map(|w| w.abs()).sum::<f64>() * self.area()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn boundary_mass(&self) -> f64 {
        let m = self.grid.points_per_axis();
        let acc: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let (i, j) = (k % m, k / m);
                i == 0 || j == 0 || i == m - 1 || j == m - 1
            })
            .map(|(_, w)| w.abs())
            .sum();
        acc * self.area()
    }

    /// ∫(|μ|² − 1/2)W d²μ − α², the photon-number change read off the grid.
    pub fn delta_n_moment(&self) -> f64 {
        let acc: f64 = self.points().map(|(mu, w)| (mu.norm_sqr() - 0.5) * w).sum();
        acc * self.area() - self.center * self.center
    }
}

pub fn wigner_eval(state: &SingleModeState, grid: GridSpec) -> Result<WignerGrid> {
    grid.validate()?;
    let axis = grid.axis();
    let values: Vec<f64> =
        axis.par_iter().flat_map_iter(|&y| axis.iter().map(move |&x| wigner_at(&state.zeta, C64::new(x, y)))).collect();
    let out = WignerGrid { outcome: state.outcome, center: state.alpha, grid, values };
    let mass = out.boundary_mass();
    if mass > BOUNDARY_MASS_LIMIT {
        return Err(Error::GridTruncated { mass, limit: BOUNDARY_MASS_LIMIT });
    }
    Ok(out)
}

/// N(W) = ∫|W| d²μ − 1, evaluated as ∫|W| − ∫W = 2∫W₋ so that the grid's
/// normalization error cancels. Floored at zero.
pub fn negativity(grid: &WignerGrid) -> f64 {
    (grid.abs_integral() - grid.integral()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::emission_probabilities;
    use std::f64::consts::PI;

    fn cfg(gamma_tau: f64, theta: f64, n: usize) -> GateConfig {
        GateConfig::new(gamma_tau, theta, n).unwrap()
    }

    fn fock(k: usize) -> Matrix3<f64> {
        let mut z = Matrix3::zeros();
        z[(k, k)] = 1.0;
        z
    }

    #[test]
    fn laguerre_low_orders() {
        for &x in &[0.0, 0.3, 2.5] {
            assert!((laguerre(1, 0, x) - (1.0 - x)).abs() < 1e-14);
            assert!((laguerre(2, 0, x) - (x * x - 4.0 * x + 2.0) / 2.0).abs() < 1e-13);
            assert!((laguerre(1, 1, x) - (2.0 - x)).abs() < 1e-14);
            assert!((laguerre(0, 2, x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn vacuum_is_gaussian() {
        let g = wigner_eval(&SingleModeState::vacuum(Outcome::G, 1.3), GridSpec::WIGNER_DEFAULT).unwrap();
        for (mu, w) in g.points() {
            let expected = 2.0 / PI * (-2.0 * (mu - 1.3).norm_sqr()).exp();
            assert!((w - expected).abs() < 1e-14);
        }
        assert!((g.integral() - 1.0).abs() < 1e-4);
        assert!(negativity(&g) < 1e-6);
    }

    #[test]
    fn fock_one_minimum_and_negativity() {
        let s = SingleModeState::from_matrix(Outcome::G, fock(1), 0.0).unwrap();
        assert!((wigner_at(&s.zeta, C64::new(0.0, 0.0)) + 2.0 / PI).abs() < 1e-14);
        let g = wigner_eval(&s, GridSpec::WIGNER_DEFAULT).unwrap();
        let expected = 4.0 * (-0.5f64).exp() - 2.0;
        assert!((negativity(&g) - expected).abs() < 1e-4);
    }

    #[test]
    fn closed_form_matches_kernel() {
        let c = cfg(0.075, 0.93 * PI, 1000);
        let amps = emission_probabilities(&c);
        for o in Outcome::BOTH {
            let s = build_zeta(&amps, &c, o).unwrap();
            for &(x, y) in &[(0.0, 0.0), (0.3, -0.2), (-1.1, 0.7), (2.0, 1.5)] {
                let b = C64::new(x, y);
                assert!((wigner_at(&s.zeta, b) - wigner_from_kernel(&s.zeta, b)).abs() < 1e-12);
            }
        }
        let mut z = Matrix3::from_fn(|i, j| 0.05 * (i + 2 * j) as f64);
        z = z + z.transpose();
        z[(0, 0)] = 1.0;
        let b = C64::new(0.4, -0.9);
        assert!((wigner_at(&z, b) - wigner_from_kernel(&z, b)).abs() < 1e-12);
    }

    #[test]
    fn no_decay_leaves_vacuum() {
        let c = cfg(0.0, 2.0, 200);
        let amps = emission_probabilities(&c);
        let s = build_zeta(&amps, &c, Outcome::G).unwrap();
        assert_eq!(mode_overlaps(&amps, &c, Outcome::G), (0.0, 0.0));
        assert_eq!(s.zeta, fock(0));
        assert!(matches!(delta_n_omega0(&s, &c), Err(Error::AmplitudeUndefined)));
    }

    #[test]
    fn undriven_overlaps_vanish() {
        let c = cfg(0.075, 0.0, 200);
        let amps = emission_probabilities(&c);
        assert_eq!(mode_overlaps(&amps, &c, Outcome::G), (0.0, 0.0));
        let s = build_zeta(&amps, &c, Outcome::G).unwrap();
        assert_eq!(delta_n_omega0(&s, &c).unwrap(), 0.0);
    }

    #[test]
    fn zeta_is_a_density_matrix() {
        let base = cfg(0.075, 0.5, 1000);
        let amps_list: Vec<_> = [0.2, 0.5, 0.8, 0.93, 1.0]
            .iter()
            .map(|&t| {
                let c = base.with_theta(t * PI).unwrap();
                (emission_probabilities(&c), c)
            })
            .collect();
        for (amps, c) in &amps_list {
            for o in Outcome::BOTH {
                let s = build_zeta(amps, c, o).unwrap();
                assert!((s.zeta.trace() - 1.0).abs() < 1e-12);
                assert!((s.zeta - s.zeta.transpose()).norm() < 1e-15);
                assert!(s.min_eigenvalue() >= -1e-8);
            }
        }
    }

    #[test]
    fn rejects_non_positive_state() {
        let mut z = fock(0);
        z[(1, 1)] = -0.1;
        z[(0, 0)] = 1.1;
        assert!(matches!(SingleModeState::from_matrix(Outcome::G, z, 0.0), Err(Error::TruncationInconsistent(_))));
    }

    #[test]
    fn narrow_grid_is_flagged() {
        let s = SingleModeState::vacuum(Outcome::E, 0.0);
        assert!(matches!(wigner_eval(&s, GridSpec { half_width: 1.5, step: 0.02 }), Err(Error::GridTruncated { .. })));
    }

    #[test]
    fn moment_path_matches_zeta_path() {
        let c = cfg(0.075, 0.93 * PI, 1000);
        let amps = emission_probabilities(&c);
        for o in Outcome::BOTH {
            let s = build_zeta(&amps, &c, o).unwrap();
            let g = wigner_eval(&s, GridSpec::WIGNER_DEFAULT).unwrap();
            let direct = delta_n_omega0(&s, &c).unwrap();
            assert!((g.delta_n_moment() - direct).abs() < 1e-4, "{o}");
        }
    }

    #[test]
    fn excited_branch_is_non_negative_and_ground_is_not() {
        let c = cfg(0.075, 0.93 * PI, 1000);
        let amps = emission_probabilities(&c);
        let we = wigner_eval(&build_zeta(&amps, &c, Outcome::E).unwrap(), GridSpec::WIGNER_DEFAULT).unwrap();
        let wg = wigner_eval(&build_zeta(&amps, &c, Outcome::G).unwrap(), GridSpec::WIGNER_DEFAULT).unwrap();
        assert!(negativity(&we) <= 1e-3);
        assert!(wg.min_value() < 0.0);
    }

    #[test]
    fn refinement_changes_negativity_little() {
        let c = cfg(0.075, 0.93 * PI, 1000);
        let amps = emission_probabilities(&c);
        let s = build_zeta(&amps, &c, Outcome::G).unwrap();
        let coarse = negativity(&wigner_eval(&s, GridSpec::WIGNER_DEFAULT).unwrap());
        let fine = negativity(&wigner_eval(&s, GridSpec { half_width: 3.5, step: 0.01 }).unwrap());
        assert!((coarse - fine).abs() <= 1e-5);
    }
}
