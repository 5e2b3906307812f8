use sync_core::closedform::{pole_distance_leading, sigma_z_leading, synchronized_leading};
use sync_core::meanfield::steady_state;
use sync_core::spectral::{components, peak_separation, regression_system};
use sync_core::{ModelParams, ScenarioKind};

const N: u64 = 100_000;

fn params(kind: ScenarioKind, w: f64, d: f64) -> ModelParams {
    let xi = if kind == ScenarioKind::BiClassical { 0.6 } else { 0.0 };
    ModelParams::with_feedback(kind, N, 1.0, w, d, xi).unwrap()
}

#[test]
fn polarizations_approach_leading_order() {
    for kind in ScenarioKind::ALL {
        for (w, d) in [(0.3, 0.1), (0.5, 0.2), (0.5, 0.9), (0.8, 1.5)] {
            let p = params(kind, w, d);
            let lead = sigma_z_leading(kind, &p);
            let s = steady_state(kind, &p).unwrap().state;
            assert!((s.z_a - lead.master()).abs() < 1e-2 * lead.master(), "{kind} {w} {d}: {} vs {lead:?}", s.z_a);
            assert!((s.z_b - lead.slave()).abs() < 1e-2 * lead.slave(), "{kind} {w} {d}: {} vs {lead:?}", s.z_b);
        }
    }
}

#[test]
fn pole_distance_approaches_leading_order() {
    for kind in [ScenarioKind::BiQuantum, ScenarioKind::BiClassical] {
        for (w, d) in [(0.5, 0.1), (0.5, 0.8), (0.8, 1.2)] {
            let p = params(kind, w, d);
            let ss = steady_state(kind, &p).unwrap();
            let rs = regression_system(kind, &ss, &p).unwrap();
            let numeric = peak_separation(&components(&rs, 1.0).unwrap());
            let lead = pole_distance_leading(&p, kind);
            assert!((numeric - lead).abs() < 1e-2 * lead.max(1e-3), "{kind} {w} {d}: {numeric} vs {lead}");
        }
    }
}

#[test]
fn synchronized_region_carries_inter_ensemble_correlation() {
    for kind in [ScenarioKind::BiQuantum, ScenarioKind::BiClassical] {
        for (w, d) in [(0.5, 0.1), (0.5, 1.0), (1.2, 0.1), (0.9, 0.6)] {
            let p = params(kind, w, d);
            let ab = steady_state(kind, &p).unwrap().state.ab.re;
            assert_eq!(synchronized_leading(kind, &p), ab > 1e-3, "{kind} {w} {d}: {ab}");
        }
    }
}

#[test]
fn physical_units_rescale_consistently() {
    let n_gamma = 1e6;
    for kind in ScenarioKind::ALL {
        let xi = if kind == ScenarioKind::BiClassical { 0.6 } else { 0.0 };
        let phys = ModelParams::with_feedback(kind, 10_000, n_gamma, 0.5 * n_gamma, 0.3 * n_gamma, xi).unwrap();
        let a = steady_state(kind, &phys).unwrap();
        let b = steady_state(kind, &phys.dimensionless()).unwrap();
        assert!(a.state.max_abs_diff(&b.state) < 1e-9);
        for (x, y) in a.jacobian_eigenvalues.iter().zip(&b.jacobian_eigenvalues) {
            assert!((x - y * n_gamma).norm() < 1e-6 * n_gamma);
        }
    }
}
