//! Exact density-matrix oracle for a few atoms per ensemble.

mod density;
mod liouvillian;
mod space;

pub use density::{
    evolve, expectations, steady_state_exact, DensityMatrix, InvariantReport, HERMITICITY_TOL, POSITIVITY_TOL,
    TRACE_TOL,
};
pub use liouvillian::{assemble, sector_pairs, Collapse, LindbladSpec, Liouvillian, Sector, DENSE_LIMIT};
pub use space::{CavityMode, Ensemble, Layout, Op};

use crate::error::{Error, Result};
use crate::model::{CorrelationState, ModelParams, ScenarioKind};
use crate::scenario::builtin;

/// Largest ensemble size accepted in eliminated mode.
pub const MAX_N_SMALL: usize = 3;
/// Limits for the full-cavity mode.
pub const MAX_N_SMALL_FULL: usize = 2;
pub const MAX_PHOTONS: usize = 6;
/// Truncation is accepted when the top two Fock levels hold less than this.
pub const TRUNCATION_TOL: f64 = 1e-4;

/// Liouvillian of `kind` with `n_small` atoms per ensemble, keeping the
/// collective rate `Nγ` of `p` (so `γ = collective_rate / n_small`).
pub fn build_liouvillian(
    kind: ScenarioKind,
    p: &ModelParams,
    n_small: usize,
    mode: CavityMode,
) -> Result<Liouvillian> {
    if n_small == 0 {
        return Err(Error::InvalidParams("n_small must be at least 1".into()));
    }
    match mode {
        CavityMode::Eliminated if n_small > MAX_N_SMALL => {
            return Err(Error::InvalidParams(format!(
                "n_small = {n_small} exceeds {MAX_N_SMALL} in eliminated mode"
            )))
        }
        CavityMode::FullCavity { n_max } if n_small > MAX_N_SMALL_FULL || !(2..=MAX_PHOTONS).contains(&n_max) => {
            return Err(Error::InvalidParams(format!(
                "full-cavity mode needs n_small ≤ {MAX_N_SMALL_FULL} and 2 ≤ n_max ≤ {MAX_PHOTONS}"
            )))
        }
        _ => {}
    }
    let sc = builtin(kind);
    let p = p.set_n_atoms(n_small as u64)?;
    let layout = Layout::new(n_small, mode, sc.cavity_modes());
    let spec = sc.lindblad(&p, &layout)?;
    assemble(&spec, &layout, Sector::Balanced)
}

/// Exact steady state with its observables.
#[derive(Debug, Clone)]
pub struct ExactSteadyState {
    pub density: DensityMatrix,
    pub state: CorrelationState,
    pub invariants: InvariantReport,
    /// Top-Fock population (zero in eliminated mode).
    pub truncation_population: f64,
}

pub fn exact_steady_state(
    kind: ScenarioKind,
    p: &ModelParams,
    n_small: usize,
    mode: CavityMode,
) -> Result<ExactSteadyState> {
    let l = build_liouvillian(kind, p, n_small, mode)?;
    let density = steady_state_exact(&l)?;
    let truncation_population = density.top_fock_population(&l.layout);
    if truncation_population >= TRUNCATION_TOL {
        return Err(Error::TruncationTooSmall {
            population: truncation_population,
        });
    }
    Ok(ExactSteadyState {
        state: expectations(&density, &l.layout)?,
        invariants: density.report(),
        truncation_population,
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn sp(kind: ScenarioKind, w: f64, d: f64) -> ModelParams {
        ModelParams::scaled(kind, 1, w, d).unwrap()
    }

    #[test]
    fn unpumped_steady_state_is_ground() {
        // one atom per ensemble with detuning: the collective dark state
        // dephases, so the ground state is the unique attractor
        let r = exact_steady_state(ScenarioKind::BiQuantum, &sp(ScenarioKind::BiQuantum, 0.0, 0.3), 1, CavityMode::Eliminated)
            .unwrap();
        assert!((r.density.entries[(0, 0)] - Complex64::from(1.0)).norm() < 1e-10);
        assert!((r.state.z_a + 1.0).abs() < 1e-10);
    }

    #[test]
    fn dark_state_degeneracy_is_reported() {
        let l = build_liouvillian(ScenarioKind::BiQuantum, &sp(ScenarioKind::BiQuantum, 0.0, 0.0), 1, CavityMode::Eliminated)
            .unwrap();
        match steady_state_exact(&l) {
            Err(Error::DegenerateNullSpace(a, b)) => assert!(a.norm() < 1e-10 && b.norm() < 1e-10),
            other => panic!("expected degenerate null space, got {other:?}"),
        }
    }

    /// Two atoms, one per ensemble, resonant collective decay: closed
    /// population balance solved by hand in the 16-dimensional operator space.
    #[test]
    fn two_atom_balance_against_nullspace() {
        let (g, w) = (1.0, 0.7);
        let p = ModelParams::scaled(ScenarioKind::BiQuantum, 1, w, 0.0).unwrap();
        let l = assemble(
            &crate::scenario::builtin(ScenarioKind::BiQuantum)
                .lindblad(&p, &Layout::new(1, CavityMode::Eliminated, 1))
                .unwrap(),
            &Layout::new(1, CavityMode::Eliminated, 1),
            Sector::Full,
        )
        .unwrap();
        // null vector of the full 16×16 generator by SVD
        let svd = l.matrix.clone().svd(true, true);
        let v_t = svd.v_t.unwrap();
        let idx = (0..16)
            .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .unwrap();
        let null: Vec<Complex64> = v_t.row(idx).iter().map(|c| c.conj()).collect();
        let tr: Complex64 = (0..4).map(|k| null[l.position(k, k).unwrap()]).sum();
        let pop = |k: usize| (null[l.position(k, k).unwrap()] / tr).re;
        let z_null = pop(1) + pop(3) - pop(0) - pop(2);
        let exact = exact_steady_state(ScenarioKind::BiQuantum, &p, 1, CavityMode::Eliminated).unwrap();
        assert!((exact.state.z_a - z_null).abs() < 1e-10);
        assert!(g > 0.0 && exact.state.z_a > -1.0 && exact.state.z_a < 1.0);
    }

    #[test]
    fn invariants_hold_for_every_scenario() {
        for kind in ScenarioKind::ALL {
            let p = ModelParams::with_feedback(kind, 2, 1.0, 0.8, 0.2, 0.6).unwrap();
            let r = exact_steady_state(kind, &p, 2, CavityMode::Eliminated).unwrap();
            assert!(r.invariants.ok(), "{kind}: {:?}", r.invariants);
        }
    }

    #[test]
    fn expectations_of_simple_states() {
        let layout = Layout::new(2, CavityMode::Eliminated, 0);
        let mixed = expectations(&DensityMatrix::maximally_mixed(&layout), &layout).unwrap();
        assert_eq!(mixed, CorrelationState::default());
        let up = expectations(&DensityMatrix::all_excited(&layout), &layout).unwrap();
        assert_eq!(up, CorrelationState::inverted());
        // one excitation on a single atom breaks exchange symmetry
        let lopsided = DensityMatrix::basis(&layout, 0b0001);
        assert!(matches!(expectations(&lopsided, &layout), Err(Error::SymmetryViolation(_))));
    }

    #[test]
    fn evolution_conserves_trace_and_purity_bound() {
        let p = ModelParams::scaled(ScenarioKind::UniQuantum, 2, 0.6, 0.4).unwrap();
        let l = build_liouvillian(ScenarioKind::UniQuantum, &p, 2, CavityMode::Eliminated).unwrap();
        let rho0 = DensityMatrix::all_excited(&l.layout);
        assert_eq!(evolve(&rho0, &l, 0.0).unwrap(), rho0);
        let mut last = rho0.clone();
        for t in [0.5, 5.0, 50.0, 1000.0] {
            let r = evolve(&rho0, &l, t).unwrap();
            assert!((r.trace() - Complex64::from(1.0)).norm() < 1e-9);
            assert!(r.purity() <= 1.0 + 1e-9);
            last = r;
        }
        let ss = steady_state_exact(&l).unwrap();
        let a = expectations(&last, &l.layout).unwrap();
        let b = expectations(&ss, &l.layout).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-6);
    }

    #[test]
    fn size_limits() {
        let p = sp(ScenarioKind::BiQuantum, 0.5, 0.0);
        assert!(build_liouvillian(ScenarioKind::BiQuantum, &p, 4, CavityMode::Eliminated).is_err());
        assert!(build_liouvillian(ScenarioKind::BiQuantum, &p, 3, CavityMode::FullCavity { n_max: 4 }).is_err());
        assert!(build_liouvillian(ScenarioKind::BiQuantum, &p, 1, CavityMode::FullCavity { n_max: 7 }).is_err());
    }
}
