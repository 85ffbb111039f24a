//! Invariant and brute-force oracle suite behind `anatomy validate`.

use anatomy_core::amplitudes::{emission_probabilities, eval_f0, eval_f1, eval_f2, WaveAmplitudes};
use anatomy_core::collision::{weak_output_mean, WeakTrajectory};
use anatomy_core::husimi::{effect_params, moment, wavefunction_params};
use anatomy_core::oracle::{oracle_extract, oracle_propagate, OracleResult, SectorState};
use anatomy_core::qubit::C64;
use anatomy_core::sweep::run_sweep;
use anatomy_core::wigner::{build_zeta, wigner_at, wigner_eval, wigner_from_kernel};
use anatomy_core::{GateConfig, GridSpec, Outcome};
use serde::Serialize;

use crate::commands::{sweep_csv, trajectory_csv};
use crate::output::sha256_hex;

pub const QUICK_ORACLE_BINS: usize = 200;
pub const DEFAULT_ORACLE_BINS: usize = 800;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    pub gamma_tau: f64,
    pub theta_over_pi: f64,
    pub n_bins: usize,
    pub oracle_bins: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub parameters: Parameters,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn bound(&mut self, name: impl Into<String>, err: f64, tol: f64) {
        self.0.push(Check { name: name.into(), max_error: err, tolerance: tol, passed: err <= tol, detail: None });
    }

    fn failed(&mut self, name: impl Into<String>, tol: f64, detail: String) {
        self.0.push(Check {
            name: name.into(),
            max_error: f64::INFINITY,
            tolerance: tol,
            passed: false,
            detail: Some(detail),
        });
    }
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |a, v| if v.is_nan() { f64::INFINITY } else { a.max(v.abs()) })
}

fn trajectory_checks(cfg: &GateConfig, traj: &WeakTrajectory, out: &mut Checks) {
    let dt = cfg.dt();
    out.bound("trace_preservation", max_abs(traj.rho.iter().map(|r| r.trace().re - 1.0)), 1e-10);
    out.bound("state_positivity", max_abs(traj.rho.iter().map(|r| r.eigenvalues()[0].min(0.0))), 1e-10);
    let eg = traj.effects(Outcome::G);
    let ee = traj.effects(Outcome::E);
    let completeness = max_abs(eg.iter().zip(ee).flat_map(|(a, b)| {
        let s = a.m + b.m;
        [s[(0, 0)].re - 1.0, s[(1, 1)].re - 1.0, s[(0, 1)].norm(), s[(1, 0)].norm()]
    }));
    out.bound("effect_completeness", completeness, 1e-10);
    let bounds = max_abs(eg.iter().chain(ee).map(|e| {
        let [lo, hi] = e.eigenvalues();
        lo.min(0.0).abs().max((hi - 1.0).max(0.0))
    }));
    out.bound("effect_bounds", bounds, 1e-10);
    for o in Outcome::BOTH {
        let from_effect = traj.effects(o)[0].m[(0, 0)].re;
        out.bound(format!("forward_backward_probability_{o}"), (from_effect - traj.prob(o)).abs(), 10.0 * dt);
    }
    match (traj.conditional(Outcome::G), traj.conditional(Outcome::E)) {
        (Ok(g), Ok(e)) => {
            let pg = traj.prob(Outcome::G);
            let pe = traj.prob(Outcome::E);
            let residual = pg * g.cum_dn[cfg.n_bins] + pe * e.cum_dn[cfg.n_bins] + pe;
            out.bound("excitation_conservation", residual.abs(), 10.0 * dt);
        }
        _ => out.failed("excitation_conservation", 10.0 * dt, "degenerate post-selection".into()),
    }
    let balance = max_abs(traj.unconditional_cum_dn().iter().zip(&traj.rho).map(|(u, r)| u + r.m[(1, 1)].re));
    out.bound("unconditional_energy_balance", balance, 10.0 * dt);
}

fn representative_bins(n: usize) -> [usize; 5] {
    [0, n / 4, n / 2, 3 * n / 4, n - 1]
}

fn husimi_checks(cfg: &GateConfig, traj: &WeakTrajectory, amps: &WaveAmplitudes, out: &mut Checks) {
    let dt = cfg.dt();
    let grid = GridSpec::HUSIMI_DEFAULT;
    let mut norm = 0.0f64;
    let mut route = 0.0f64;
    let mut positivity = 0.0f64;
    let mut first = 0.0f64;
    for o in Outcome::BOTH {
        for n in representative_bins(cfg.n_bins) {
            let pe = effect_params(traj, o, n);
            let pw = wavefunction_params(amps, cfg, o, n);
            let (Ok(pe), Ok(pw)) = (pe, pw) else {
                out.failed("husimi_route_equivalence", 0.0, format!("bin {n} outcome {o}: degenerate"));
                return;
            };
            let (Ok(se), Ok(sw)) = (pe.sample(grid), pw.sample(grid)) else {
                out.failed("husimi_normalization", 1e-4, "invalid grid".into());
                return;
            };
            norm = norm.max((se.integral() - 1.0).abs()).max((sw.integral() - 1.0).abs());
            route = route.max(se.max_abs_difference(&sw));
            positivity = positivity.max((-se.min_value()).max(-sw.min_value()).max(0.0));
            // first moment against the edge-averaged output-field weak value
            let mean = |k: usize| weak_output_mean(traj, o, k).ok().and_then(|m| m.total());
            if let (Ok(m1), Some(a), Some(b)) = (moment(&se, 1, 0), mean(n), mean(n + 1)) {
                first = first.max((m1 - dt.sqrt() * 0.5 * (a + b)).norm());
            }
        }
    }
    out.bound("husimi_normalization", norm, 1e-4);
    out.bound("husimi_route_equivalence", route, 10.0 * dt.powf(1.5));
    out.bound("husimi_positivity", positivity, 10.0 * dt);
    out.bound("husimi_first_moment", first, 10.0 * dt);
}

fn wigner_checks(cfg: &GateConfig, amps: &WaveAmplitudes, out: &mut Checks) {
    for o in Outcome::BOTH {
        match build_zeta(amps, cfg, o) {
            Ok(state) => {
                out.bound(format!("zeta_trace_{o}"), (state.zeta.trace() - 1.0).abs(), 1e-8);
                out.bound(format!("zeta_positivity_{o}"), (-state.min_eigenvalue()).max(0.0), 1e-8);
                match wigner_eval(&state, GridSpec::WIGNER_DEFAULT) {
                    Ok(g) => out.bound(format!("wigner_normalization_{o}"), (g.integral() - 1.0).abs(), 1e-4),
                    Err(e) => out.failed(format!("wigner_normalization_{o}"), 1e-4, e.to_string()),
                }
                let kernel = max_abs([(0.0, 0.0), (0.25, -0.4), (-0.9, 0.6), (1.3, 1.1)].iter().map(|&(x, y)| {
                    let b = C64::new(x, y);
                    wigner_at(&state.zeta, b) - wigner_from_kernel(&state.zeta, b)
                }));
                out.bound(format!("wigner_kernel_equality_{o}"), kernel, 1e-8);
            }
            Err(e) => out.failed(format!("zeta_trace_{o}"), 1e-8, e.to_string()),
        }
    }
}

fn oracle_checks(
    cfg: &GateConfig,
    traj: &WeakTrajectory,
    amps: &WaveAmplitudes,
    ocfg: &GateConfig,
    state: &SectorState,
    out: &mut Checks,
) {
    let dto = ocfg.dt();
    let tol = (10.0 * dto).max(2e-3);
    let mut results: Vec<OracleResult> = Vec::new();
    for o in Outcome::BOTH {
        match oracle_extract(state, ocfg, o) {
            Ok(r) => results.push(r),
            Err(e) => {
                out.failed(format!("oracle_extract_{o}"), tol, e.to_string());
                return;
            }
        }
    }
    out.bound("oracle_leak", state.leaked, anatomy_core::oracle::LEAK_LIMIT);
    let residual = results[1].prob + results.iter().map(|r| r.prob * r.delta_n).sum::<f64>();
    out.bound("oracle_excitation_conservation", residual.abs(), 10.0 * dto);
    for (o, r) in Outcome::BOTH.into_iter().zip(&results) {
        out.bound(format!("oracle_probability_{o}"), (r.prob - amps.prob(o)).abs(), tol);
        out.bound(format!("oracle_f0_{o}"), (r.f0 - eval_f0(o, ocfg.tau, ocfg)).abs(), tol);
        let f1 = max_abs((0..ocfg.n_bins).map(|n| r.f1[n] - eval_f1(o, ocfg.tau, ocfg.bin_center(n), ocfg)));
        out.bound(format!("oracle_f1_{o}"), f1, tol);
        let stride = (ocfg.n_bins / 50).max(1);
        let mut f2 = 0.0f64;
        for n in (0..ocfg.n_bins).step_by(stride) {
            for m in (n + 1..ocfg.n_bins).step_by(stride) {
                let exact = eval_f2(o, ocfg.tau, ocfg.bin_center(n), ocfg.bin_center(m), ocfg).unwrap_or(f64::NAN);
                f2 = f2.max((r.f2(n, m) - exact).abs());
            }
        }
        out.bound(format!("oracle_f2_{o}"), f2, tol);
        match traj.conditional(o) {
            Ok(c) => out.bound(format!("oracle_delta_n_{o}"), (r.delta_n - c.cum_dn[cfg.n_bins]).abs(), tol),
            Err(e) => out.failed(format!("oracle_delta_n_{o}"), tol, e.to_string()),
        }
        match build_zeta(amps, cfg, o) {
            Ok(s) => out.bound(format!("oracle_zeta_{o}"), (r.zeta - s.zeta).abs().max(), tol),
            Err(e) => out.failed(format!("oracle_zeta_{o}"), tol, e.to_string()),
        }
        // ⟨b_n⟩_ε = −√(γΔt)⟨σ⟩_ε at mid-gate
        let n = ocfg.n_bins / 2;
        let t = ocfg.bin_center(n);
        let k = ((t / cfg.dt()).round() as usize).min(cfg.n_bins);
        if let (Ok(c), true) = (traj.conditional(o), ocfg.gamma > 0.0) {
            let coherence = oracle_bin_coherence(state, o, n) / r.prob;
            let sigma_oracle = -coherence / (ocfg.gamma * dto).sqrt();
            out.bound(format!("oracle_sigma_weak_value_{o}"), (sigma_oracle - c.sigma[k].re).abs(), 10.0 * dto);
        }
    }
}

/// Unnormalized ⟨b_n⟩ in the ε block of the oracle state.
fn oracle_bin_coherence(state: &SectorState, o: Outcome, n: usize) -> f64 {
    let i = o.index();
    let mut acc = state.vacuum[i] * state.one[n][i];
    for j in 0..state.n_bins {
        let d = if j == n { std::f64::consts::SQRT_2 * state.pair(n, n, o) } else { state.pair(n, j, o) };
        acc += d * state.one[j][i];
    }
    acc
}

fn determinism_checks(cfg: &GateConfig, out: &mut Checks) {
    let small = cfg.with_bins(cfg.n_bins.min(400)).expect("valid bin count");
    let a = sha256_hex(trajectory_csv(&WeakTrajectory::compute(&small)).as_bytes());
    let b = sha256_hex(trajectory_csv(&WeakTrajectory::compute(&small)).as_bytes());
    out.bound("determinism_trajectory", if a == b { 0.0 } else { 1.0 }, 0.0);

    let render = |threads: usize| -> Option<String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()?;
        pool.install(|| run_sweep(&small, 4, true).ok().map(|p| sha256_hex(sweep_csv(&p, true).as_bytes())))
    };
    let same = matches!((render(1), render(3)), (Some(x), Some(y)) if x == y);
    out.bound("determinism_sweep_across_thread_counts", if same { 0.0 } else { 1.0 }, 0.0);
}

pub fn run_validation(cfg: &GateConfig, oracle_bins: usize) -> ValidationReport {
    let cfg = cfg.clone().with_photon_cap(2).expect("cap 2 is valid");
    let mut checks = Checks::default();
    let traj = WeakTrajectory::compute(&cfg);
    let amps = emission_probabilities(&cfg);
    trajectory_checks(&cfg, &traj, &mut checks);
    husimi_checks(&cfg, &traj, &amps, &mut checks);
    wigner_checks(&cfg, &amps, &mut checks);

    match cfg.with_bins(oracle_bins) {
        Ok(ocfg) => match oracle_propagate(&ocfg) {
            Ok(state) => oracle_checks(&cfg, &traj, &amps, &ocfg, &state, &mut checks),
            Err(e) => checks.failed("oracle_propagation", anatomy_core::oracle::LEAK_LIMIT, e.to_string()),
        },
        Err(e) => checks.failed("oracle_propagation", 0.0, e.to_string()),
    }
    determinism_checks(&cfg, &mut checks);

    let passed = checks.0.iter().all(|c| c.passed);
    ValidationReport {
        parameters: Parameters {
            gamma_tau: cfg.gamma * cfg.tau,
            theta_over_pi: cfg.theta / std::f64::consts::PI,
            n_bins: cfg.n_bins,
            oracle_bins,
        },
        checks: checks.0,
        passed,
    }
}
