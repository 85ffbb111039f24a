//! Brute-force propagation of the displaced-frame collision model in the
//! sector with at most two photons in total.
//!
//! The state is stored densely by photon number: the vacuum block, one
//! amplitude per bin for a single photon, and the ordered pairs n ≤ m for
//! two photons, where the diagonal holds the normalized |2_n⟩ state. Each
//! collision exponentiates the exact bin generator on qubit ⊗ bin-n Fock
//! space, one level beyond the cap; whatever reaches that level is counted
//! as leaked and dropped. Higher sectors never feed back into lower ones,
//! so amplitudes inside the cap are not affected by the truncation.

use nalgebra::{DMatrix, Matrix3};
use serde::Serialize;

use crate::config::{GateConfig, Outcome};
use crate::error::{Error, Result};

pub const MAX_BINS: usize = 2000;

/// Leaked mass above which propagation fails.
pub const LEAK_LIMIT: f64 = 1e-3;

const NORM_TOL: f64 = 1e-10;

type Amp = [f64; 2];

#[derive(Debug, Clone)]
pub struct SectorState {
    pub n_bins: usize,
    pub photon_cap: usize,
    pub dt: f64,
    /// [g, e] amplitudes with the field in vacuum.
    pub vacuum: Amp,
    /// One photon in bin n.
    pub one: Vec<Amp>,
    /// Two photons in bins n ≤ m at `pair_index(n, m)`.
    pub two: Vec<Amp>,
    /// Mass pushed above the photon cap and discarded.
    pub leaked: f64,
}

#[inline]
pub fn pair_index(n: usize, m: usize) -> usize {
    debug_assert!(n <= m);
    m * (m + 1) / 2 + n
}

impl SectorState {
    pub fn norm_sqr(&self) -> f64 {
        let sq = |a: &Amp| a[0] * a[0] + a[1] * a[1];
        sq(&self.vacuum) + self.one.iter().map(sq).sum::<f64>() + self.two.iter().map(sq).sum::<f64>()
    }

    pub fn pair(&self, n: usize, m: usize, outcome: Outcome) -> f64 {
        let (a, b) = if n <= m { (n, m) } else { (m, n) };
        self.two.get(pair_index(a, b)).map_or(0.0, |v| v[outcome.index()])
    }
}

/// First column of exp(G) for the bin generator on qubit ⊗ {0..=levels},
/// as `out[l][q'][q]` = ⟨q', l|U|q, 0⟩.
fn local_step(cfg: &GateConfig, levels: usize) -> Vec<[[f64; 2]; 2]> {
    let dt = cfg.dt();
    let drive = 0.5 * cfg.omega() * dt;
    let exch = (cfg.gamma * dt).sqrt();
    let d = levels + 1;
    let idx = |q: usize, l: usize| q * d + l;
    let mut gen = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for l in 0..d {
        gen[(idx(1, l), idx(0, l))] += drive;
        gen[(idx(0, l), idx(1, l))] -= drive;
        if l + 1 < d {
            let s = exch * ((l + 1) as f64).sqrt();
            // σ†b: |g, l+1⟩ → |e, l⟩; −σb†: |e, l⟩ → |g, l+1⟩
            gen[(idx(1, l), idx(0, l + 1))] += s;
            gen[(idx(0, l + 1), idx(1, l))] -= s;
        }
    }
    let u = gen.exp();
    (0..d)
        .map(|l| {
            let mut t = [[0.0; 2]; 2];
            for (qp, row) in t.iter_mut().enumerate() {
                for (q, v) in row.iter_mut().enumerate() {
                    *v = u[(idx(qp, l), idx(q, 0))];
                }
            }
            t
        })
        .collect()
}

#[inline]
fn apply(t: &[[f64; 2]; 2], a: &Amp) -> Amp {
    [t[0][0] * a[0] + t[0][1] * a[1], t[1][0] * a[0] + t[1][1] * a[1]]
}

#[inline]
fn mass(a: &Amp) -> f64 {
    a[0] * a[0] + a[1] * a[1]
}

/// Runs all N_o collisions from |g⟩ ⊗ vacuum.
pub fn oracle_propagate(cfg: &GateConfig) -> Result<SectorState> {
    let n_bins = cfg.n_bins;
    let cap = cfg.photon_cap;
    if n_bins > MAX_BINS {
        return Err(Error::InvalidConfig(format!("oracle supports at most {MAX_BINS} bins, got {n_bins}")));
    }
    if !(1..=2).contains(&cap) {
        return Err(Error::InvalidConfig(format!("oracle photon cap must be 1 or 2, got {cap}")));
    }
    // steps[k] acts on configurations already holding k photons
    let steps: Vec<_> = (0..=cap).map(|k| local_step(cfg, cap - k + 1)).collect();
    let mut st = SectorState {
        n_bins,
        photon_cap: cap,
        dt: cfg.dt(),
        vacuum: [1.0, 0.0],
        one: vec![[0.0; 2]; n_bins],
        two: if cap >= 2 { vec![[0.0; 2]; n_bins * (n_bins + 1) / 2] } else { Vec::new() },
        leaked: 0.0,
    };
    for n in 0..n_bins {
        let mut leak = 0.0;
        if cap >= 2 {
            let s2 = &steps[2];
            for m in 0..n {
                for j in 0..=m {
                    let k = pair_index(j, m);
                    let a = st.two[k];
                    st.two[k] = apply(&s2[0], &a);
                    leak += mass(&apply(&s2[1], &a));
                }
            }
        }
        let s1 = &steps[1];
        for j in 0..n {
            let a = st.one[j];
            st.one[j] = apply(&s1[0], &a);
            let up = apply(&s1[1], &a);
            if cap >= 2 {
                st.two[pair_index(j, n)] = up;
                leak += mass(&apply(&s1[2], &a));
            } else {
                leak += mass(&up);
            }
        }
        let s0 = &steps[0];
        let a = st.vacuum;
        st.vacuum = apply(&s0[0], &a);
        st.one[n] = apply(&s0[1], &a);
        if cap >= 2 {
            st.two[pair_index(n, n)] = apply(&s0[2], &a);
        }
        leak += mass(&apply(&s0[cap + 1], &a));
        st.leaked += leak;

        let total = st.norm_sqr() + st.leaked;
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(total));
        }
    }
    if st.leaked > LEAK_LIMIT {
        return Err(Error::CapOverflow { leaked: st.leaked, limit: LEAK_LIMIT });
    }
    Ok(st)
}

/// Post-selected quantities read off the oracle state.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub outcome: Outcome,
    pub prob: f64,
    /// Sample of f⁽⁰⁾_ε(τ).
    pub f0: f64,
    /// Samples of f⁽¹⁾_ε(τ, t) at bin centres.
    pub f1: Vec<f64>,
    pub delta_n: f64,
    /// Reduced state of the flat ω₀ mode, displaced frame.
    #[serde(skip)]
    pub zeta: Matrix3<f64>,
    dt: f64,
    pairs: Vec<f64>,
}

impl OracleResult {
    /// Sample of f⁽²⁾_ε(τ, t_n, t_m) for n < m at bin centres; zero otherwise.
    pub fn f2(&self, n: usize, m: usize) -> f64 {
        if n >= m || self.pairs.is_empty() {
            return 0.0;
        }
        self.pairs[pair_index(n, m)] / self.dt
    }
}

pub fn oracle_extract(state: &SectorState, cfg: &GateConfig, outcome: Outcome) -> Result<OracleResult> {
    let i = outcome.index();
    let nb = state.n_bins;
    let dt = state.dt;
    let a0 = state.vacuum[i];
    let c: Vec<f64> = state.one.iter().map(|v| v[i]).collect();
    let pairs: Vec<f64> = state.two.iter().map(|v| v[i]).collect();
    let has_two = !pairs.is_empty();

    let prob = a0 * a0 + c.iter().map(|x| x * x).sum::<f64>() + pairs.iter().map(|x| x * x).sum::<f64>();
    if prob < crate::collision::MIN_POST_SELECTION {
        return Err(Error::UnlikelyPostSelection { outcome, probability: prob });
    }

    // Symmetric two-photon matrix D with ψ₂ = ½ Σ D_nm b†_n b†_m |0⟩.
    let d = |n: usize, m: usize| -> f64 {
        if !has_two {
            return 0.0;
        }
        if n == m {
            std::f64::consts::SQRT_2 * pairs[pair_index(n, n)]
        } else if n < m {
            pairs[pair_index(n, m)]
        } else {
            pairs[pair_index(m, n)]
        }
    };

    let mut dc = vec![0.0; nb];
    let mut du = vec![0.0; nb];
    let mut d_norm = 0.0;
    if has_two {
        for m in 0..nb {
            for n in 0..=m {
                let v = d(n, m);
                dc[n] += v * c[m];
                du[n] += v;
                if n != m {
                    dc[m] += v * c[n];
                    du[m] += v;
                    d_norm += 2.0 * v * v;
                } else {
                    d_norm += v * v;
                }
            }
        }
    }

    let photons = c.iter().map(|x| x * x).sum::<f64>() + d_norm;
    let alpha_n = cfg.alpha_bin().unwrap_or(0.0);
    let coherence: f64 = (0..nb).map(|n| a0 * c[n] + dc[n]).sum();
    let delta_n = (photons + 2.0 * alpha_n * coherence) / prob;

    // Flat mode u = 1/√N.
    let u = 1.0 / (nb as f64).sqrt();
    let c_u: f64 = c.iter().sum::<f64>() * u;
    let du: Vec<f64> = du.iter().map(|x| x * u).collect();
    let udu: f64 = du.iter().sum::<f64>() * u;
    let w: Vec<f64> = du.iter().map(|x| x - udu * u).collect();
    let c_perp: Vec<f64> = c.iter().map(|x| x - c_u * u).collect();
    let du_norm: f64 = du.iter().map(|x| x * x).sum();
    let d_perp = (d_norm - 2.0 * du_norm + udu * udu).max(0.0);
    let phi = [a0, c_u, udu / std::f64::consts::SQRT_2];
    let mut zeta = Matrix3::from_fn(|r, s| phi[r] * phi[s]);
    zeta[(0, 0)] += c_perp.iter().map(|x| x * x).sum::<f64>() + 0.5 * d_perp;
    zeta[(1, 1)] += w.iter().map(|x| x * x).sum::<f64>();
    let cross: f64 = w.iter().zip(&c_perp).map(|(a, b)| a * b).sum();
    zeta[(0, 1)] += cross;
    zeta[(1, 0)] += cross;
    zeta /= prob;

    let sdt = dt.sqrt();
    Ok(OracleResult { outcome, prob, f0: a0, f1: c.iter().map(|x| -x / sdt).collect(), delta_n, zeta, dt, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(gamma_tau: f64, theta: f64, n: usize) -> GateConfig {
        GateConfig::new(gamma_tau, theta, n).unwrap()
    }

    #[test]
    fn local_step_is_isometric() {
        let c = cfg(0.5, 2.0, 3);
        for levels in 1..=3 {
            let t = local_step(&c, levels);
            for q in 0..2 {
                let norm: f64 = t.iter().map(|b| b[0][q] * b[0][q] + b[1][q] * b[1][q]).sum();
                assert!((norm - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_collision_first_order() {
        let theta = 1e-3;
        let st = oracle_propagate(&cfg(1e-8, theta, 1)).unwrap();
        assert!((st.vacuum[1] - theta / 2.0).abs() < 1e-9);
    }

    #[test]
    fn classical_map_without_decay() {
        let theta = 2.1;
        let st = oracle_propagate(&cfg(0.0, theta, 50)).unwrap();
        assert!((st.vacuum[0] - (theta / 2.0).cos()).abs() < 1e-12);
        assert!((st.vacuum[1] - (theta / 2.0).sin()).abs() < 1e-12);
        assert!(st.one.iter().chain(&st.two).all(|a| a == &[0.0, 0.0]));
    }

    #[test]
    fn undriven_stays_in_vacuum() {
        let c = cfg(0.075, 0.0, 40);
        let st = oracle_propagate(&c).unwrap();
        let r = oracle_extract(&st, &c, Outcome::G).unwrap();
        assert_eq!(r.prob, 1.0);
        assert_eq!(r.delta_n, 0.0);
        assert_eq!(r.zeta[(0, 0)], 1.0);
        assert!(matches!(oracle_extract(&st, &c, Outcome::E), Err(Error::UnlikelyPostSelection { .. })));
    }

    #[test]
    fn conserves_excitations() {
        let c = cfg(0.075, 0.93 * PI, 300);
        let st = oracle_propagate(&c).unwrap();
        let rg = oracle_extract(&st, &c, Outcome::G).unwrap();
        let re = oracle_extract(&st, &c, Outcome::E).unwrap();
        let residual = re.prob + rg.prob * rg.delta_n + re.prob * re.delta_n;
        assert!(residual.abs() <= 10.0 * c.dt(), "{residual}");
        assert!((rg.prob + re.prob + st.leaked - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reduced_state_is_a_density_matrix() {
        let c = cfg(0.075, 0.93 * PI, 200);
        let st = oracle_propagate(&c).unwrap();
        for o in Outcome::BOTH {
            let r = oracle_extract(&st, &c, o).unwrap();
            assert!((r.zeta.trace() - 1.0).abs() < 1e-12);
            let ev = nalgebra::SymmetricEigen::new(r.zeta).eigenvalues;
            assert!(ev.min() > -1e-12);
        }
    }

    #[test]
    fn rejects_oversized_runs() {
        assert!(oracle_propagate(&cfg(0.075, 1.0, MAX_BINS + 1)).is_err());
    }

    #[test]
    fn heavy_leak_is_reported() {
        let c = cfg(20.0, PI, 50).with_photon_cap(1).unwrap();
        assert!(matches!(oracle_propagate(&c), Err(Error::CapOverflow { .. })));
    }
}
