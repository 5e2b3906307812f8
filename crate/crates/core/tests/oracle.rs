use sync_core::exactsim::{build_liouvillian, evolve, exact_steady_state, CavityMode, DensityMatrix};
use sync_core::harness::validate;
use sync_core::{ModelParams, ScenarioKind};

fn small(kind: ScenarioKind, n: u64, w: f64, d: f64) -> ModelParams {
    let xi = if kind == ScenarioKind::BiClassical { 0.6 } else { 0.0 };
    ModelParams::with_feedback(kind, n, 1.0, w, d, xi).unwrap()
}

#[test]
fn two_atom_common_cavity_matches_cumulants() {
    let report = validate(2, &[ScenarioKind::BiQuantum]).unwrap();
    assert!(report.invariants_ok());
    assert!(report.passed(), "{:?}", report.worst(ScenarioKind::BiQuantum));
}

#[test]
fn every_validation_state_is_physical() {
    for n in [1, 2] {
        let report = validate(n, &ScenarioKind::ALL).unwrap();
        assert!(report.invariants_ok());
        assert_eq!(report.invariants.len(), 4 * if n == 1 { 1 } else { 4 });
    }
}

#[test]
fn time_evolution_relaxes_to_the_null_vector() {
    let p = small(ScenarioKind::BiQuantum, 2, 0.75, 0.3);
    let l = build_liouvillian(ScenarioKind::BiQuantum, &p, 2, CavityMode::Eliminated).unwrap();
    let ss = exact_steady_state(ScenarioKind::BiQuantum, &p, 2, CavityMode::Eliminated).unwrap();
    let rho = evolve(&DensityMatrix::all_excited(&l.layout), &l, 200.0).unwrap();
    let diff = (&rho.entries - &ss.density.entries).iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn explicit_cavity_reproduces_eliminated_dynamics() {
    // bad-cavity limit: κ is fifty times every other rate
    for kind in [ScenarioKind::BiQuantum, ScenarioKind::UniQuantum] {
        let p = small(kind, 1, 0.6, 0.3);
        let a = exact_steady_state(kind, &p, 1, CavityMode::Eliminated).unwrap().state;
        let b = exact_steady_state(kind, &p, 1, CavityMode::FullCavity { n_max: 4 }).unwrap().state;
        assert!((a.z_a - b.z_a).abs() < 0.05, "{kind}: {} vs {}", a.z_a, b.z_a);
        assert!((a.z_b - b.z_b).abs() < 0.05, "{kind}: {} vs {}", a.z_b, b.z_b);
        assert!((a.ab - b.ab).norm() < 0.05 * a.ab.norm().max(1e-2), "{kind}: {} vs {}", a.ab, b.ab);
    }
}

#[test]
fn master_ensemble_is_blind_to_the_slave() {
    for kind in [ScenarioKind::UniQuantum, ScenarioKind::UniClassical] {
        let z = |d| exact_steady_state(kind, &small(kind, 2, 0.75, d), 2, CavityMode::Eliminated).unwrap().state;
        let (s0, s1) = (z(0.0), z(1.0));
        assert!((s0.z_a - s1.z_a).abs() < 1e-10);
        assert!((s0.aa - s1.aa).norm() < 1e-10);
        assert!((s0.z_b - s1.z_b).abs() > 1e-4);
    }
}
