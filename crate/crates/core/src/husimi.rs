//! Conditional Husimi-Q function of a single time-bin mode.
//!
//! To first order in Δt the post-selected state of bin n, seen in the frame
//! displaced by the coherent amplitude α_n, is fixed by its mean photon
//! number n̄ and its coherence b = ⟨b_n⟩. Its Q function is then
//!
//! ```text
//! Q(s) = e^{−|β|²}/π [1 + n̄(|β|² − 1) + 2 Re(b β*)],   β = s − α_n.
//! ```
//!
//! The two routes differ only in how n̄ and b are obtained: from the
//! weak values of the qubit trajectory (n̄ = γΔt𝒥_ε, b = −√(γΔt)⟨σ⟩_ε) or
//! from the one- and two-photon amplitudes of the wavefunction.

use serde::Serialize;

use crate::amplitudes::WaveAmplitudes;
use crate::collision::{WeakTrajectory, MIN_POST_SELECTION};
use crate::config::{GateConfig, GridSpec, Outcome};
use crate::error::{Error, Result};
use crate::qubit::C64;

/// Boundary mass above which Riemann-sum moments are rejected.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Effect,
    Wavefunction,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Effect => "effect",
            Route::Wavefunction => "wavefunction",
        })
    }
}

/// Parameters of the bin-n Q function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HusimiParams {
    pub n: usize,
    pub outcome: Outcome,
    pub route: Route,
    /// α_n; zero when γ = 0 and the coherent amplitude is undefined.
    pub center: f64,
    /// Displaced-frame mean photon number n̄.
    pub occupation: f64,
    /// Displaced-frame coherence ⟨b_n⟩.
    #[serde(skip)]
    pub coherence: C64,
    pub dt: f64,
}

impl HusimiParams {
    pub fn eval(&self, s: C64) -> f64 {
        let beta = s - self.center;
        let r2 = beta.norm_sqr();
        let poly = 1.0 + self.occupation * (r2 - 1.0) + 2.0 * (self.coherence * beta.conj()).re;
        (-r2).exp() / std::f64::consts::PI * poly
    }

    /// ∫ s^p s*^q Q d²s in closed form, from E[β^a β*^b] = δ_ab a! under
    /// the unit Gaussian.
    pub fn analytic_moment(&self, p: u32, q: u32) -> C64 {
        let c = C64::new(self.center, 0.0);
        let mut total = C64::new(0.0, 0.0);
        for i in 0..=p {
            for j in 0..=q {
                let m = self.centered_moment(i, j);
                if m == C64::new(0.0, 0.0) {
                    continue;
                }
                let w = binomial(p, i) * binomial(q, j);
                total += w * c.powu(p - i) * c.conj().powu(q - j) * m;
            }
        }
        total
    }

    fn centered_moment(&self, a: u32, b: u32) -> C64 {
        let mut m = C64::new(0.0, 0.0);
        if a == b {
            m += (1.0 - self.occupation) * factorial(a) + self.occupation * factorial(a + 1);
        }
        if a == b + 1 {
            m += self.coherence * factorial(a);
        }
        if a + 1 == b {
            m += self.coherence.conj() * factorial(b);
        }
        m
    }

    pub fn sample(&self, grid: GridSpec) -> Result<HusimiSlice> {
        grid.validate()?;
        let axis = grid.axis();
        let mut values = Vec::with_capacity(axis.len() * axis.len());
        for &y in &axis {
            for &x in &axis {
                values.push(self.eval(C64::new(self.center + x, y)));
            }
        }
        Ok(HusimiSlice { params: *self, grid, values })
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Q sampled on a square grid centred at α_n. `values[j * m + i]` belongs to
/// s = α_n + axis[i] + i·axis[j], with m points per axis.
#[derive(Debug, Clone, Serialize)]
pub struct HusimiSlice {
    pub params: HusimiParams,
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl HusimiSlice {
    pub fn points(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        let axis = self.grid.axis();
        let m = axis.len();
        let c = self.params.center;
        self.values.iter().enumerate().map(move |(k, &q)| (C64::new(c + axis[k % m], axis[k / m]), q))
    }

    /// Riemann sum of Q over the grid.
    pub fn integral(&self) -> f64 {
        let h = self.grid.step;
        self.values.iter().sum::<f64>() * h * h
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Σ|Q|h² over the outermost ring of grid points.
    pub fn boundary_mass(&self) -> f64 {
        let m = self.grid.points_per_axis();
        let h = self.grid.step;
        let mut acc = 0.0;
        for (k, q) in self.values.iter().enumerate() {
            let (i, j) = (k % m, k / m);
            if i == 0 || j == 0 || i == m - 1 || j == m - 1 {
                acc += q.abs();
            }
        }
        acc * h * h
    }

    pub fn max_abs_difference(&self, other: &HusimiSlice) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn alpha_bin_or_zero(cfg: &GateConfig) -> f64 {
    cfg.alpha_bin().unwrap_or(0.0)
}

/// Q parameters of bin n from the weak values 𝒥_ε and ⟨σ⟩_ε averaged over
/// the bin.
pub fn effect_params(traj: &WeakTrajectory, outcome: Outcome, n: usize) -> Result<HusimiParams> {
    let cfg = &traj.cfg;
    let dt = cfg.dt();
    let sigma = traj.bin_sigma(outcome, n)?;
    let jump = traj.bin_jump(outcome, n)?;
    Ok(HusimiParams {
        n,
        outcome,
        route: Route::Effect,
        center: alpha_bin_or_zero(cfg),
        occupation: cfg.gamma * dt * jump,
        coherence: -(cfg.gamma * dt).sqrt() * sigma,
        dt,
    })
}

/// Q parameters of bin n from the one- and two-photon amplitudes.
pub fn wavefunction_params(
    amps: &WaveAmplitudes,
    cfg: &GateConfig,
    outcome: Outcome,
    n: usize,
) -> Result<HusimiParams> {
    if n >= cfg.n_bins {
        return Err(Error::BinOutOfRange { index: n, bins: cfg.n_bins });
    }
    let branch = amps.branch(outcome);
    if branch.f1.len() != cfg.n_bins {
        return Err(Error::InvalidConfig(format!(
            "amplitudes sampled on {} bins, config has {}",
            branch.f1.len(),
            cfg.n_bins
        )));
    }
    if branch.prob < MIN_POST_SELECTION {
        return Err(Error::UnlikelyPostSelection { outcome, probability: branch.prob });
    }
    Ok(HusimiParams {
        n,
        outcome,
        route: Route::Wavefunction,
        center: alpha_bin_or_zero(cfg),
        occupation: branch.bin_occupation(n) / branch.prob,
        coherence: C64::new(branch.bin_coherence(n) / branch.prob, 0.0),
        dt: cfg.dt(),
    })
}

pub fn husimi_effect_route(traj: &WeakTrajectory, outcome: Outcome, n: usize, grid: GridSpec) -> Result<HusimiSlice> {
    effect_params(traj, outcome, n)?.sample(grid)
}

pub fn husimi_wavefunction_route(
    amps: &WaveAmplitudes,
    cfg: &GateConfig,
    outcome: Outcome,
    n: usize,
    grid: GridSpec,
) -> Result<HusimiSlice> {
    wavefunction_params(amps, cfg, outcome, n)?.sample(grid)
}

/// ∫ s^p s*^q Q d²s by Riemann sum over the slice grid.
pub fn moment(slice: &HusimiSlice, p: u32, q: u32) -> Result<C64> {
    let mass = slice.boundary_mass();
    if mass > BOUNDARY_MASS_LIMIT {
        return Err(Error::GridTruncated { mass, limit: BOUNDARY_MASS_LIMIT });
    }
    let h2 = slice.grid.step * slice.grid.step;
    let sum: C64 = slice.points().map(|(s, v)| s.powu(p) * s.conj().powu(q) * v).sum();
    Ok(sum * h2)
}

/// ⟨b†_out b_out⟩_ε for bin n, (1/Δt)∫(|s|² − 1)Q d²s, in units of 1/time.
pub fn intensity_weak_value(params: &HusimiParams) -> f64 {
    (params.analytic_moment(1, 1).re - 1.0) / params.dt
}

/// Δt Σ_n (⟨b†_out b_out⟩_ε − |α_n|²/Δt): the change of the field's
/// excitation number rebuilt from the Q-function moments of every bin.
pub fn reconstruct_delta_n(traj: &WeakTrajectory, outcome: Outcome) -> Result<f64> {
    let cfg = &traj.cfg;
    let dt = cfg.dt();
    let input = alpha_bin_or_zero(cfg).powi(2) / dt;
    let mut acc = 0.0;
    for n in 0..cfg.n_bins {
        let p = effect_params(traj, outcome, n)?;
        acc += dt * (intensity_weak_value(&p) - input);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedDeltaN {
    pub value: f64,
    /// Set when γ = 0: no photon is emitted and the value is 0 by definition.
    pub no_fluorescence: bool,
}

/// Δ𝒩_ε from the amplitudes truncated at `cfg.photon_cap` photons:
///
/// ```text
/// [p⁽¹⁾ + 2p⁽²⁾ − 2(α/√τ)(f⁽⁰⁾ ∫f⁽¹⁾ + ∫∫ f⁽²⁾_sym f⁽¹⁾)] / (p⁽⁰⁾ + p⁽¹⁾ + p⁽²⁾)
/// ```
///
/// With a cap of one photon every two-photon term is dropped.
pub fn delta_n_truncated(amps: &WaveAmplitudes, cfg: &GateConfig, outcome: Outcome) -> Result<TruncatedDeltaN> {
    let branch = amps.branch(outcome);
    if !(1..=2).contains(&cfg.photon_cap) {
        return Err(Error::InvalidConfig(format!("photon_cap must be 1 or 2, got {}", cfg.photon_cap)));
    }
    if cfg.photon_cap > branch.photon_cap {
        return Err(Error::InvalidConfig(format!(
            "amplitudes truncated at {} photons, requested {}",
            branch.photon_cap, cfg.photon_cap
        )));
    }
    let alpha_t = match cfg.input_mean() {
        Ok(a) => a,
        Err(_) => return Ok(TruncatedDeltaN { value: 0.0, no_fluorescence: true }),
    };
    let two = cfg.photon_cap >= 2;
    let [p0, p1, p2] = branch.p;
    let prob = p0 + p1 + if two { p2 } else { 0.0 };
    if prob < MIN_POST_SELECTION {
        return Err(Error::UnlikelyPostSelection { outcome, probability: prob });
    }
    let mut num = p1 - 2.0 * alpha_t * branch.f0 * branch.integral_f1();
    if two {
        num += 2.0 * p2 - 2.0 * alpha_t * branch.pair_overlap();
    }
    Ok(TruncatedDeltaN { value: num / prob, no_fluorescence: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::emission_probabilities;
    use std::f64::consts::PI;

    fn cfg(gamma_tau: f64, theta: f64, n: usize) -> GateConfig {
        GateConfig::new(gamma_tau, theta, n).unwrap()
    }

    fn gaussian(center: f64) -> HusimiParams {
        HusimiParams {
            n: 0,
            outcome: Outcome::G,
            route: Route::Effect,
            center,
            occupation: 0.0,
            coherence: C64::new(0.0, 0.0),
            dt: 0.01,
        }
    }

    #[test]
    fn no_decay_gives_unit_gaussian() {
        let c = cfg(0.0, 2.0, 200);
        let traj = WeakTrajectory::compute(&c);
        let amps = emission_probabilities(&c);
        for o in Outcome::BOTH {
            let a = husimi_effect_route(&traj, o, 17, GridSpec::HUSIMI_DEFAULT).unwrap();
            let b = husimi_wavefunction_route(&amps, &c, o, 17, GridSpec::HUSIMI_DEFAULT).unwrap();
            for (s, q) in a.points() {
                let g = (-s.norm_sqr()).exp() / PI;
                assert!((q - g).abs() < 1e-15);
            }
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn undriven_slice_is_centred_without_corrections() {
        let c = cfg(0.075, 0.0, 400);
        let amps = emission_probabilities(&c);
        let p = wavefunction_params(&amps, &c, Outcome::G, 100).unwrap();
        assert_eq!(p.occupation, 0.0);
        assert_eq!(p.coherence, C64::new(0.0, 0.0));
    }

    #[test]
    fn analytic_moments_match_riemann_sums() {
        let p = HusimiParams { occupation: 0.03, coherence: C64::new(-0.05, 0.02), ..gaussian(0.4) };
        let slice = p.sample(GridSpec::HUSIMI_DEFAULT).unwrap();
        for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (2, 2), (3, 1)] {
            let num = moment(&slice, a, b).unwrap();
            let ana = p.analytic_moment(a, b);
            assert!((num - ana).norm() < 1e-8, "({a},{b}): {num} vs {ana}");
        }
    }

    #[test]
    fn vacuum_has_no_photons() {
        let slice = gaussian(0.0).sample(GridSpec::HUSIMI_DEFAULT).unwrap();
        let m = moment(&slice, 1, 1).unwrap();
        assert!((m.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_intensity_is_squared_mean() {
        let c = cfg(0.075, 0.93 * PI, 4000);
        let an = c.alpha_bin().unwrap();
        let p = HusimiParams { dt: c.dt(), ..gaussian(an) };
        let expected = c.input_mean().unwrap().powi(2);
        assert!((intensity_weak_value(&p) - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn narrow_grid_is_flagged() {
        let slice = gaussian(0.0).sample(GridSpec { half_width: 2.0, step: 0.05 }).unwrap();
        assert!(matches!(moment(&slice, 1, 1), Err(Error::GridTruncated { .. })));
    }

    #[test]
    fn grid_halving_is_stable() {
        let c = cfg(0.075, 0.93 * PI, 1000);
        let traj = WeakTrajectory::compute(&c);
        let p = effect_params(&traj, Outcome::G, 500).unwrap();
        let coarse = p.sample(GridSpec::HUSIMI_DEFAULT).unwrap();
        let fine = p.sample(GridSpec { half_width: 5.0, step: 0.025 }).unwrap();
        for (a, b) in [(0, 0), (1, 0), (1, 1)] {
            assert!((moment(&coarse, a, b).unwrap() - moment(&fine, a, b).unwrap()).norm() <= 1e-6);
        }
    }

    #[test]
    fn moment_reconstruction_matches_trajectory() {
        let c = cfg(0.075, 0.93 * PI, 1000);
        let traj = WeakTrajectory::compute(&c);
        for o in Outcome::BOTH {
            let exact = *traj.conditional(o).unwrap().cum_dn.last().unwrap();
            let rebuilt = reconstruct_delta_n(&traj, o).unwrap();
            assert!((exact - rebuilt).abs() < 1e-10, "{o}: {exact} vs {rebuilt}");
        }
    }

    #[test]
    fn truncated_without_decay_is_flagged() {
        let c = cfg(0.0, 2.0, 100);
        let amps = emission_probabilities(&c);
        let r = delta_n_truncated(&amps, &c, Outcome::G).unwrap();
        assert!(r.no_fluorescence && r.value == 0.0);
    }

    #[test]
    fn truncated_cap_must_be_available() {
        let c1 = cfg(0.075, 2.0, 100).with_photon_cap(1).unwrap();
        let amps = emission_probabilities(&c1);
        let c2 = c1.clone().with_photon_cap(2).unwrap();
        assert!(delta_n_truncated(&amps, &c2, Outcome::G).is_err());
        assert!(delta_n_truncated(&amps, &c1, Outcome::G).is_ok());
    }
}
