//! Multi-seed damped Newton search for fixed points, with stability
//! classification by the Jacobian spectrum.
//!
//! All work happens in dimensionless units (`Nγ = 1`); eigenvalues are
//! scaled back before returning.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::integrate::{integrate, IntegrateOptions};
use crate::error::{Error, Result, RootReport};
use crate::model::{CorrelationState, ModelParams, ScenarioKind, SteadyStateResult, STABILITY_TOLERANCE};
use crate::scenario::{builtin, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    /// Residual threshold in units of `Nγ`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Halvings allowed in the backtracking line search.
    pub max_halvings: usize,
    /// Burn-in time for the integration seed, in units of `1/Nγ`.
    pub burn_in: f64,
    /// Integration time used to pick among several stable roots.
    pub tie_break_time: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            tolerance: 1e-10,
            max_iterations: 100,
            max_halvings: 20,
            burn_in: 50.0,
            tie_break_time: 5000.0,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fd_jacobian(scenario: &dyn Scenario, p: &ModelParams, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let h = 1e-7f64.max(1e-7 * norm(x));
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        let fp = scenario.rhs(p, &xp);
        xp[j] = x[j] - h;
        let fm = scenario.rhs(p, &xp);
        xp[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Central finite-difference Jacobian of the real-ified rhs at `s`, in the
/// frequency units of `p`.
pub fn jacobian(kind: ScenarioKind, p: &ModelParams, s: &CorrelationState) -> DMatrix<f64> {
    let sc = builtin(kind);
    fd_jacobian(sc, p, &sc.pack(s))
}

/// Damped Newton from `x0`; returns the final point and its residual norm.
fn newton(scenario: &dyn Scenario, p: &ModelParams, x0: Vec<f64>, opts: &SteadyOptions) -> (Vec<f64>, f64) {
    let mut x = x0;
    let mut f = scenario.rhs(p, &x);
    let mut r = norm(&f);
    for _ in 0..opts.max_iterations {
        if r <= opts.tolerance || !r.is_finite() {
            break;
        }
        let jac = fd_jacobian(scenario, p, &x);
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let Some(dx) = jac.lu().solve(&rhs) else {
            break;
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + alpha * d).collect();
            let ft = scenario.rhs(p, &trial);
            let rt = norm(&ft);
            if rt < r {
                x = trial;
                f = ft;
                r = rt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, r)
}

struct Root {
    state: CorrelationState,
    x: Vec<f64>,
    residual: f64,
    eigenvalues: Vec<Complex64>,
}

impl Root {
    fn stable(&self) -> bool {
        self.eigenvalues.iter().all(|e| e.re < -STABILITY_TOLERANCE)
    }
}

fn unpumped(scenario: &dyn Scenario, d: &ModelParams, opts: &SteadyOptions, scale: f64) -> Option<SteadyStateResult> {
    let dark = CorrelationState {
        z_a: -1.0,
        z_b: -1.0,
        ..Default::default()
    };
    let mut x = scenario.pack(&dark);
    let pinned = scenario.master_components();
    let free: Vec<usize> = (0..x.len()).filter(|i| !pinned.contains(i)).collect();
    if !pinned.is_empty() {
        // run to a vanishing step, not just a small residual: the slave
        // block can be stiff
        for _ in 0..opts.max_iterations {
            let f = scenario.rhs(d, &x);
            let jac = fd_jacobian(scenario, d, &x).select_rows(&free).select_columns(&free);
            let rhs = DVector::from_iterator(free.len(), free.iter().map(|&i| -f[i]));
            // minimum-norm step: for a single atom the pair correlations
            // drop out and the block is singular
            let dx = jac.svd(true, true).solve(&rhs, 1e-12).ok()?;
            for (k, &i) in free.iter().enumerate() {
                x[i] += dx[k];
            }
            if dx.norm() <= 1e-15 * (1.0 + norm(&x)) {
                break;
            }
        }
    }
    let r = norm(&scenario.rhs(d, &x));
    let state = scenario.unpack(&x);
    if r > opts.tolerance || !state.is_admissible(1e-6) {
        return None;
    }
    let eigenvalues: Vec<Complex64> = fd_jacobian(scenario, d, &x).complex_eigenvalues().iter().copied().collect();
    // the marginal direction is tolerated; anything growing is not
    if eigenvalues.iter().any(|e| e.re > STABILITY_TOLERANCE) {
        return None;
    }
    Some(SteadyStateResult {
        state,
        jacobian_eigenvalues: eigenvalues.iter().map(|e| e * scale).collect(),
        stable: true,
        residual_norm: r,
        seeds_tried: 1,
        roots_found: 1,
        multiple_stable_roots: false,
    })
}

pub fn steady_state(kind: ScenarioKind, p: &ModelParams) -> Result<SteadyStateResult> {
    steady_state_with(builtin(kind), p, &SteadyOptions::default())
}

pub fn steady_state_with(
    scenario: &dyn Scenario,
    p: &ModelParams,
    opts: &SteadyOptions,
) -> Result<SteadyStateResult> {
    let d = p.dimensionless();
    let scale = p.collective_rate();

    // Without pump the uncorrelated ground state of the driving ensemble is a
    // double root of the closed equations (one Jacobian eigenvalue vanishes,
    // and Newton only creeps towards it). It is attracting at nonlinear
    // order, so it is pinned and only the remaining components are solved.
    if d.pump() == 0.0 {
        if let Some(res) = unpumped(scenario, &d, opts, scale) {
            return Ok(res);
        }
    }

    let mut seeds = vec![scenario.leading_state(&d), CorrelationState::inverted()];
    let burn = integrate(scenario, &d, &CorrelationState::inverted(), opts.burn_in, &IntegrateOptions::default());
    if let Ok(tr) = &burn {
        seeds.push(*tr.last());
    }
    seeds.extend(scenario.lattice_seeds());

    let mut roots: Vec<Root> = Vec::new();
    let mut best_residual = f64::INFINITY;
    for seed in &seeds {
        let (x, r) = newton(scenario, &d, scenario.pack(seed), opts);
        if r.is_finite() {
            best_residual = best_residual.min(r);
        }
        if r > opts.tolerance {
            continue;
        }
        let state = scenario.unpack(&x);
        if !state.is_admissible(1e-6) {
            continue;
        }
        if roots.iter().any(|q| q.state.max_abs_diff(&state) < 1e-6) {
            continue;
        }
        let eigenvalues = fd_jacobian(scenario, &d, &x).complex_eigenvalues().iter().copied().collect();
        roots.push(Root {
            state,
            x,
            residual: r,
            eigenvalues,
        });
    }
    if roots.is_empty() {
        return Err(Error::NoConvergence {
            best_residual: best_residual * scale,
        });
    }

    let stable: Vec<&Root> = roots.iter().filter(|r| r.stable()).collect();
    let chosen: &Root = match stable.len() {
        0 => {
            return Err(Error::NoStableRoot {
                roots: roots
                    .iter()
                    .map(|r| RootReport {
                        state: r.x.clone(),
                        eigenvalues: r.eigenvalues.iter().map(|e| e * scale).collect(),
                    })
                    .collect(),
            })
        }
        1 => stable[0],
        _ => {
            let tr = integrate(
                scenario,
                &d,
                &CorrelationState::inverted(),
                opts.tie_break_time,
                &IntegrateOptions::default(),
            )?;
            let end = tr.last();
            stable
                .iter()
                .min_by(|a, b| a.state.max_abs_diff(end).total_cmp(&b.state.max_abs_diff(end)))
                .copied()
                .expect("nonempty")
        }
    };

    Ok(SteadyStateResult {
        state: chosen.state,
        jacobian_eigenvalues: chosen.eigenvalues.iter().map(|e| e * scale).collect(),
        stable: true,
        residual_norm: chosen.residual,
        seeds_tried: seeds.len(),
        roots_found: roots.len(),
        multiple_stable_roots: stable.len() > 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::sigma_z_leading;
    use crate::meanfield::noise_coefficients;
    use proptest::prelude::*;

    fn sp(kind: ScenarioKind, n: u64, w: f64, d: f64) -> ModelParams {
        ModelParams::scaled(kind, n, w, d).unwrap()
    }

    #[test]
    fn bi_quantum_matches_leading_order() {
        for (w, d, z) in [(0.5, 0.3, 0.34), (0.5, 0.5, 0.5), (0.5, 0.9, 0.5)] {
            let r = steady_state(ScenarioKind::BiQuantum, &sp(ScenarioKind::BiQuantum, 10_000, w, d)).unwrap();
            assert!(r.stable);
            assert!(r.residual_norm <= 1e-10);
            assert!((r.state.z_a - z).abs() < 1e-2, "w={w} δ={d}: {}", r.state.z_a);
        }
    }

    #[test]
    fn leading_order_residual_is_small() {
        let p = sp(ScenarioKind::BiQuantum, 10_000, 0.5, 0.0);
        let s = crate::closedform::leading_state(ScenarioKind::BiQuantum, &p);
        let sc = builtin(ScenarioKind::BiQuantum);
        let res = norm(&sc.rhs(&p, &sc.pack(&s)));
        assert!(res <= 1e-3, "{res}");
    }

    #[test]
    fn physical_units_give_same_state() {
        let a = steady_state(ScenarioKind::UniQuantum, &sp(ScenarioKind::UniQuantum, 1000, 0.4, 0.1)).unwrap();
        let p = ModelParams::new(ScenarioKind::UniQuantum, 1000, 1e6, 4e5, 1e5).unwrap();
        let b = steady_state(ScenarioKind::UniQuantum, &p).unwrap();
        assert!(a.state.max_abs_diff(&b.state) < 1e-10);
        for (x, y) in a.jacobian_eigenvalues.iter().zip(&b.jacobian_eigenvalues) {
            assert!((x * 1e6 - y).norm() < 1e-3);
        }
    }

    #[test]
    fn dark_state_without_pump() {
        for kind in ScenarioKind::ALL {
            let p = ModelParams::new(kind, 1000, 1.0, 0.0, 0.2).unwrap();
            let r = steady_state(kind, &p).unwrap();
            assert!(r.stable);
            // the re-created seed field drives each slave atom with σ⁻ at
            // rate 2γ and σ⁺ at rate γ, so z_B = (1 − 2)/(1 + 2)
            let z_b = if kind == ScenarioKind::UniClassical { -1.0 / 3.0 } else { -1.0 };
            assert!((r.state.z_a + 1.0).abs() < 1e-12 && (r.state.z_b - z_b).abs() < 1e-9, "{kind}");
            assert!(r.state.aa.norm() < 1e-12 && r.state.ab.norm() < 1e-12);
            // one marginal direction, the rest decay
            let marginal = r.jacobian_eigenvalues.iter().filter(|e| e.norm() < 1e-9).count();
            // a dark slave fed by a dark master is marginal as well
            let expected = if kind == ScenarioKind::UniQuantum { 2 } else { 1 };
            assert_eq!(marginal, expected, "{kind}");
            assert!(r
                .jacobian_eigenvalues
                .iter()
                .all(|e| e.norm() < 1e-9 || e.re <= -0.01 * p.gamma()));
        }
    }

    #[test]
    fn unpumped_subradiant_state_only_drifts_down() {
        // the marginal direction: relaxation is algebraic, never upwards
        let p = sp(ScenarioKind::BiQuantum, 1000, 0.0, 0.2);
        let s0 = CorrelationState::symmetric(-0.9, 1e-4, Complex64::default());
        let opts = IntegrateOptions {
            record_all: true,
            ..Default::default()
        };
        let tr = integrate(builtin(ScenarioKind::BiQuantum), &p, &s0, 1e4, &opts).unwrap();
        for pair in tr.states.windows(2).skip(1) {
            assert!(pair[1].z_a <= pair[0].z_a + 1e-12);
        }
        assert!(tr.last().z_a < -0.9);
    }

    #[test]
    fn stable_root_has_left_half_plane_spectrum() {
        let r = steady_state(ScenarioKind::BiQuantum, &sp(ScenarioKind::BiQuantum, 10_000, 0.5, 0.0)).unwrap();
        assert!(r.jacobian_eigenvalues.iter().all(|e| e.re < 0.0));
        assert_eq!(r.jacobian_eigenvalues.len(), 4);
    }

    #[test]
    fn master_block_is_independent_of_detuning() {
        let s = CorrelationState {
            z_a: 0.4,
            z_b: 0.1,
            aa: 0.12.into(),
            bb: 0.08.into(),
            ab: Complex64::new(-0.05, 0.01),
        };
        let j1 = jacobian(ScenarioKind::UniQuantum, &sp(ScenarioKind::UniQuantum, 1000, 0.5, 0.0), &s);
        let j2 = jacobian(ScenarioKind::UniQuantum, &sp(ScenarioKind::UniQuantum, 1000, 0.5, 1.0), &s);
        for i in 0..2 {
            for j in 0..2 {
                assert!((j1[(i, j)] - j2[(i, j)]).abs() < 1e-9);
            }
            for j in 2..6 {
                assert!(j1[(i, j)].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cascaded_slave_follows_leading_order() {
        let p = sp(ScenarioKind::UniQuantum, 100_000, 0.5, 0.0);
        let r = steady_state(ScenarioKind::UniQuantum, &p).unwrap();
        let lead = sigma_z_leading(ScenarioKind::UniQuantum, &p);
        assert!((r.state.z_a - lead.master()).abs() < 1e-3);
        assert!((r.state.z_b - lead.slave()).abs() < 1e-2, "{} vs {}", r.state.z_b, lead.slave());
    }

    /// Hand-differentiated Jacobian of the cascaded system.
    fn analytic_cascaded(s: &CorrelationState, p: &ModelParams, u: f64, v: f64) -> DMatrix<f64> {
        let n = p.n();
        let g = p.gamma();
        let w = p.pump();
        let dl = p.detuning();
        let (za, ca, zb, cb, ar, ai) = (s.z_a, s.aa.re, s.z_b, s.bb.re, s.ab.re, s.ab.im);
        let k = 0.5 * g * (n - 1.0);
        #[rustfmt::skip]
        let rows = [
            [-(g + w), -2.0 * g * (n - 1.0), 0.0, 0.0, 0.0, 0.0],
            [ca * g * (n - 2.0) + 0.5 * g * (2.0 * za + 1.0), -(g + w - g * za * (n - 2.0)), 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -(g * u + w), -2.0 * g * (n - 1.0), 4.0 * g * n, 0.0],
            [0.0, 0.0, cb * g * (n - 2.0) + 0.5 * g * (2.0 * u * zb + 1.0) - 2.0 * g * n * ar,
             -(u * g + w - g * zb * (n - 2.0)), -2.0 * g * n * zb, 0.0],
            [k * ar - 0.5 * g * zb, -g * zb * (n - 1.0),
             k * ar - 0.5 * g * za - 0.5 * g * (2.0 * ca * (n - 1.0) + 1.0), 0.0,
             k * (za + zb) - v * g - w, -dl],
            [k * ai, 0.0, k * ai, 0.0, dl, k * (za + zb) - v * g - w],
        ];
        DMatrix::from_fn(6, 6, |i, j| rows[i][j])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn fd_jacobian_matches_analytic(
            za in -1.0..1.0f64, zb in -1.0..1.0f64, ca in -0.3..0.3f64, cb in -0.3..0.3f64,
            ar in -0.3..0.3f64, ai in -0.3..0.3f64, w in 0.0..1.5f64, d in -1.0..1.0f64,
            classical in any::<bool>(),
        ) {
            let kind = if classical { ScenarioKind::UniClassical } else { ScenarioKind::UniQuantum };
            let p = sp(kind, 500, w, d);
            let nc = noise_coefficients(kind, 0.0).unwrap();
            let s = CorrelationState { z_a: za, z_b: zb, aa: ca.into(), bb: cb.into(), ab: Complex64::new(ar, ai) };
            let fd = jacobian(kind, &p, &s);
            let an = analytic_cascaded(&s, &p, nc.u, nc.v);
            let scale = an.abs().max().max(1.0);
            prop_assert!((fd - an).abs().max() <= 1e-5 * scale);
        }
    }
}
