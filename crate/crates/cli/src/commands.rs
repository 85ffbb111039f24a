//! Subcommand bodies. Rendering is split from writing so that the CSV
//! bytes can be compared across runs.

use anatomy_core::amplitudes::emission_probabilities;
use anatomy_core::collision::WeakTrajectory;
use anatomy_core::husimi::{husimi_effect_route, husimi_wavefunction_route, HusimiSlice, Route};
use anatomy_core::sweep::{run_sweep, SweepPoint};
use anatomy_core::wigner::{build_zeta, negativity, wigner_eval, WignerGrid};
use anatomy_core::{GateConfig, GridSpec, Outcome};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::{Csv, OutputSet};
use crate::svg::{heatmap, line_plot, Series};

pub const TRAJECTORY_HEADER: [&str; 11] = [
    "t",
    "rho_gg",
    "rho_ee",
    "re_rho_ge",
    "im_rho_ge",
    "sigma_wv_g",
    "sigma_wv_e",
    "J_g",
    "J_e",
    "cum_dN_g",
    "cum_dN_e",
];

pub const SWEEP_HEADER: [&str; 9] =
    ["theta_over_pi", "P_g", "P_e", "dN_g", "dN_e", "dN_g_omega0", "dN_e_omega0", "neg_g", "neg_e"];

pub const TRUNCATION_HEADER: [&str; 4] = ["dN_trunc1_g", "dN_trunc1_e", "dN_trunc2_g", "dN_trunc2_e"];

pub fn trajectory_csv(traj: &WeakTrajectory) -> String {
    let mut csv = Csv::new(&TRAJECTORY_HEADER);
    let nan = vec![f64::NAN; traj.len()];
    let series = |o: Outcome| match traj.conditional(o) {
        Ok(c) => (c.sigma.iter().map(|z| z.re).collect(), c.jump.clone(), c.cum_dn.clone()),
        Err(_) => (nan.clone(), nan.clone(), nan.clone()),
    };
    let (sg, jg, cg) = series(Outcome::G);
    let (se, je, ce) = series(Outcome::E);
    for (n, r) in traj.rho.iter().enumerate() {
        csv.row(&[
            traj.cfg.grid_time(n),
            r.m[(0, 0)].re,
            r.m[(1, 1)].re,
            r.m[(0, 1)].re,
            r.m[(0, 1)].im,
            sg[n],
            se[n],
            jg[n],
            je[n],
            cg[n],
            ce[n],
        ]);
    }
    csv.into_string()
}

pub fn trajectory(cfg: &GateConfig, out: &mut OutputSet) -> CliResult<()> {
    let traj = WeakTrajectory::compute(cfg);
    out.write("trajectory.csv", trajectory_csv(&traj).as_bytes())?;

    let t: Vec<f64> = (0..traj.len()).map(|n| cfg.grid_time(n)).collect();
    let mut series = Vec::new();
    for (o, color) in [(Outcome::G, "#1f4e9c"), (Outcome::E, "#c0392b")] {
        if let Ok(c) = traj.conditional(o) {
            series.push((o, color, t.iter().copied().zip(c.cum_dn.iter().copied()).collect::<Vec<_>>()));
        }
    }
    let unconditional: Vec<(f64, f64)> = t.iter().copied().zip(traj.unconditional_cum_dn()).collect();
    let labels = ["ΔN_g(t)", "ΔN_e(t)"];
    let mut plot: Vec<Series> = series
        .into_iter()
        .map(|(o, color, points)| Series { label: labels[o.index()], color, dashed: false, points })
        .collect();
    plot.push(Series { label: "Σ P_ε ΔN_ε(t)", color: "#777777", dashed: true, points: unconditional });
    let title = format!("cumulative ΔN, γτ = {}, θ/π = {:.4}", cfg.gamma * cfg.tau, cfg.theta / std::f64::consts::PI);
    out.write("trajectory.svg", line_plot(&title, "t/τ", "ΔN", &plot).as_bytes())?;
    Ok(())
}

pub fn sweep_csv(points: &[SweepPoint], compare_truncation: bool) -> String {
    let mut header: Vec<&str> = SWEEP_HEADER.to_vec();
    if compare_truncation {
        header.extend(TRUNCATION_HEADER);
    }
    let mut csv = Csv::new(&header);
    for p in points {
        let mut row =
            vec![p.theta_over_pi, p.p_g, p.p_e, p.dn_g, p.dn_e, p.dn_g_omega0, p.dn_e_omega0, p.neg_g, p.neg_e];
        if compare_truncation {
            let t1 = p.dn_trunc1.unwrap_or([f64::NAN; 2]);
            let t2 = p.dn_trunc2.unwrap_or([f64::NAN; 2]);
            row.extend([t1[0], t1[1], t2[0], t2[1]]);
        }
        csv.row(&row);
    }
    csv.into_string()
}

pub fn sweep(
    cfg: &GateConfig,
    points: usize,
    compare_truncation: bool,
    out: &mut OutputSet,
) -> CliResult<Vec<SweepPoint>> {
    let pts = run_sweep(cfg, points, compare_truncation)?;
    out.write("sweep.csv", sweep_csv(&pts, compare_truncation).as_bytes())?;

    let col = |f: &dyn Fn(&SweepPoint) -> f64| pts.iter().map(|p| (p.theta_over_pi, f(p))).collect::<Vec<_>>();
    let mut plot = vec![
        Series { label: "ΔN_g", color: "#1f4e9c", dashed: false, points: col(&|p| p.dn_g) },
        Series { label: "ΔN_e", color: "#c0392b", dashed: false, points: col(&|p| p.dn_e) },
        Series { label: "ΔN_g(ω₀)", color: "#1f4e9c", dashed: true, points: col(&|p| p.dn_g_omega0) },
        Series { label: "ΔN_e(ω₀)", color: "#c0392b", dashed: true, points: col(&|p| p.dn_e_omega0) },
    ];
    if compare_truncation {
        plot.push(Series {
            label: "ΔN_g, 1 photon",
            color: "#27ae60",
            dashed: true,
            points: col(&|p| p.dn_trunc1.map_or(f64::NAN, |v| v[0])),
        });
        plot.push(Series {
            label: "ΔN_g, 2 photons",
            color: "#8e44ad",
            dashed: true,
            points: col(&|p| p.dn_trunc2.map_or(f64::NAN, |v| v[0])),
        });
    }
    let title = format!("ΔN versus gate angle, γτ = {}", cfg.gamma * cfg.tau);
    out.write("sweep.svg", line_plot(&title, "θ/π", "ΔN", &plot).as_bytes())?;

    let neg = vec![
        Series { label: "N(W_g)", color: "#1f4e9c", dashed: false, points: col(&|p| p.neg_g) },
        Series { label: "N(W_e)", color: "#c0392b", dashed: false, points: col(&|p| p.neg_e) },
    ];
    out.write("sweep_negativity.svg", line_plot("Wigner negativity", "θ/π", "N(W)", &neg).as_bytes())?;
    Ok(pts)
}

pub fn wigner_csv(grid: &WignerGrid) -> String {
    let mut csv = Csv::new(&["re_mu", "im_mu", "W"]);
    for (mu, w) in grid.points() {
        csv.row(&[mu.re, mu.im, w]);
    }
    csv.into_string()
}

pub fn wigner(cfg: &GateConfig, outcomes: &[Outcome], out: &mut OutputSet) -> CliResult<Vec<WignerGrid>> {
    let cfg = cfg.clone().with_photon_cap(2)?;
    let amps = emission_probabilities(&cfg);
    let spec = cfg.grid.unwrap_or(GridSpec::WIGNER_DEFAULT);
    let mut grids = Vec::new();
    for &o in outcomes {
        let state = build_zeta(&amps, &cfg, o)?;
        let grid = wigner_eval(&state, spec)?;
        out.write(&format!("wigner_{o}.csv"), wigner_csv(&grid).as_bytes())?;
        let title = format!("W_{o}, θ/π = {:.4}, N(W) = {:.3e}", cfg.theta / std::f64::consts::PI, negativity(&grid));
        let svg = heatmap(&title, "Re μ", "Im μ", grid.center, &spec.axis(), &grid.values);
        out.write(&format!("wigner_{o}.svg"), svg.as_bytes())?;
        grids.push(grid);
    }
    Ok(grids)
}

pub fn husimi_csv(slice: &HusimiSlice) -> String {
    let mut csv = Csv::new(&["re_s", "im_s", "Q"]);
    for (s, q) in slice.points() {
        csv.row(&[s.re, s.im, q]);
    }
    csv.into_string()
}

pub fn husimi_slice(
    cfg: &GateConfig,
    outcome: Outcome,
    bin: Option<usize>,
    route: Route,
    out: &mut OutputSet,
) -> CliResult<HusimiSlice> {
    let n = bin.unwrap_or(cfg.n_bins / 2);
    if n >= cfg.n_bins {
        return Err(CliError::Usage(format!("--bin {n} out of range (n_bins = {})", cfg.n_bins)));
    }
    let spec = cfg.grid.unwrap_or(GridSpec::HUSIMI_DEFAULT);
    let slice = match route {
        Route::Effect => husimi_effect_route(&WeakTrajectory::compute(cfg), outcome, n, spec)?,
        Route::Wavefunction => {
            let cfg2 = cfg.clone().with_photon_cap(2)?;
            husimi_wavefunction_route(&emission_probabilities(&cfg2), &cfg2, outcome, n, spec)?
        }
    };
    let stem = format!("husimi_{outcome}_n{n}_{route}");
    out.write(&format!("{stem}.csv"), husimi_csv(&slice).as_bytes())?;
    let p = &slice.params;
    let sidecar = json!({
        "n": p.n,
        "outcome": outcome.to_string(),
        "route": route.to_string(),
        "alpha_n": p.center,
        "dt": p.dt,
        "occupation": p.occupation,
        "coherence": { "re": p.coherence.re, "im": p.coherence.im },
        "integration": {
            "half_width": spec.half_width,
            "step": spec.step,
            "points_per_axis": spec.points_per_axis(),
            "riemann_integral": slice.integral(),
            "boundary_mass": slice.boundary_mass(),
            "min_value": slice.min_value(),
        },
    });
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    out.write(&format!("{stem}.json"), text.as_bytes())?;
    Ok(slice)
}
