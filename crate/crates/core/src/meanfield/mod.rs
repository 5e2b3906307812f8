//! Second-order cumulant equations for the four coupling scenarios.
//!
//! Third-order cumulants are dropped and `⟨σᶻσᶻ⟩ ≈ ⟨σᶻ⟩²`. The symmetric
//! scenarios share one equation set parameterized by the feedback strength
//! ξ and the measurement noise ζ; the cascaded scenarios share another
//! parameterized by the classical-channel insertions `u` and `v`.

mod integrate;
mod steady;

pub use integrate::{integrate, IntegrateOptions, StepControl, Trajectory};
pub use steady::{jacobian, steady_state, steady_state_with, SteadyOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorrelationState, ModelParams, ScenarioKind, StateRate};

/// Noise insertions distinguishing classical from quantum channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCoefficients {
    pub u: f64,
    pub v: f64,
    pub zeta: f64,
}

/// Measurement-noise term of the symmetric feedback channel,
/// `ζ = (ξ⁴ − ξ² + 2) / (2(1 − ξ²))`.
pub fn zeta(xi: f64) -> f64 {
    let x2 = xi * xi;
    (x2 * x2 - x2 + 2.0) / (2.0 * (1.0 - x2))
}

pub fn noise_coefficients(scenario: ScenarioKind, xi: f64) -> Result<NoiseCoefficients> {
    Ok(match scenario {
        ScenarioKind::BiQuantum | ScenarioKind::UniQuantum => NoiseCoefficients {
            u: 1.0,
            v: 1.0,
            zeta: 1.0,
        },
        ScenarioKind::UniClassical => NoiseCoefficients {
            u: 3.0,
            v: 2.0,
            zeta: 1.0,
        },
        ScenarioKind::BiClassical => {
            if !(0.0..1.0).contains(&xi) {
                return Err(Error::InvalidParams(format!(
                    "feedback strength {xi} outside [0, 1)"
                )));
            }
            NoiseCoefficients {
                u: 1.0,
                v: 1.0,
                zeta: zeta(xi),
            }
        }
    })
}

/// Symmetric-coupling equations for `(⟨σᶻ⟩, ⟨σ⁺₁σ⁻₂⟩, ⟨σ⁺_Aσ⁻_B⟩)`.
///
/// Only `z_a`, `aa` and `ab` of `s` are read. With `ξ = ζ = 1` this is the
/// common-cavity system.
pub fn rhs_symmetric(s: &CorrelationState, p: &ModelParams, xi: f64, zeta: f64) -> StateRate {
    let n = p.n();
    let g = p.gamma();
    let w = p.pump();
    let delta = p.detuning();
    let z = s.z_a;
    let c = s.aa.re;
    let ab = s.ab;

    let dz = w * (1.0 - z) - g - z * g * zeta - 2.0 * g * (c * (n - 1.0) + xi * n * ab.re);
    let dc = c * (-w + g * (n - 2.0) * z - g * zeta)
        + 0.5 * g * z * (1.0 + zeta * z + 2.0 * n * xi * ab.re);
    let x4 = xi.powi(4);
    let dab = ab * Complex64::new(g * (n - 1.0) * z - g * zeta - w, delta)
        + 0.5 * g * xi * z * (2.0 * z * zeta / (x4 - xi * xi + 2.0) + 1.0)
        + g * xi * z * c * (n - 1.0);

    StateRate {
        z_a: dz,
        z_b: dz,
        aa: dc.into(),
        bb: dc.into(),
        ab: dab,
    }
}

/// Cascaded (master → slave) equations. Ensemble A never sees B.
pub fn rhs_cascaded(s: &CorrelationState, p: &ModelParams, nc: &NoiseCoefficients) -> StateRate {
    let n = p.n();
    let g = p.gamma();
    let w = p.pump();
    let delta = p.detuning();
    let (u, v) = (nc.u, nc.v);
    let (za, zb) = (s.z_a, s.z_b);
    let (ca, cb) = (s.aa.re, s.bb.re);
    let ab = s.ab;

    let dza = -za * (g + w) - 2.0 * g * (n - 1.0) * ca - g + w;
    let dca = -ca * (g + w - g * za * (n - 2.0)) + 0.5 * g * za * (za + 1.0);
    let dzb = -zb * (g * u + w) - 2.0 * g * (n - 1.0) * cb - g + w + 4.0 * g * n * ab.re;
    let dcb = -cb * (u * g + w - g * zb * (n - 2.0)) + 0.5 * g * zb * (u * zb + 1.0)
        - 2.0 * g * n * zb * ab.re;
    let dab = ab * (0.5 * g * (n - 1.0) * (za + zb))
        + ab * Complex64::new(-v * g - w, delta)
        - 0.5 * g * zb * za
        - 0.5 * g * zb * (2.0 * ca * (n - 1.0) + 1.0);

    StateRate {
        z_a: dza,
        z_b: dzb,
        aa: dca.into(),
        bb: dcb.into(),
        ab: dab,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(kind: ScenarioKind, n: u64, w: f64, d: f64) -> ModelParams {
        ModelParams::scaled(kind, n, w, d).unwrap()
    }

    #[test]
    fn noise_table() {
        let q = noise_coefficients(ScenarioKind::UniQuantum, 0.0).unwrap();
        assert_eq!((q.u, q.v, q.zeta), (1.0, 1.0, 1.0));
        let c = noise_coefficients(ScenarioKind::UniClassical, 0.0).unwrap();
        assert_eq!((c.u, c.v, c.zeta), (3.0, 2.0, 1.0));
        let b = noise_coefficients(ScenarioKind::BiClassical, 0.6).unwrap();
        assert!((b.zeta - 1.3825).abs() < 1e-12);
        assert!(noise_coefficients(ScenarioKind::BiClassical, 1.0).is_err());
        // ζ ≥ 1 and growing on [0, 1)
        let mut last = zeta(0.0);
        assert_eq!(last, 1.0);
        for i in 1..1000 {
            let z = zeta(i as f64 / 1000.0);
            assert!(z >= last);
            last = z;
        }
    }

    #[test]
    fn symmetric_decay_only_at_full_inversion() {
        let par = p(ScenarioKind::BiClassical, 100, 0.0, 0.2);
        let g = par.gamma();
        for (xi, zeta) in [(1.0, 1.0), (0.6, 1.3825)] {
            let r = rhs_symmetric(&CorrelationState::inverted(), &par, xi, zeta);
            assert!((r.z_a - (-g - g * zeta)).abs() < 1e-15);
        }
    }

    #[test]
    fn cascaded_population_balance_at_zero() {
        let mut par = p(ScenarioKind::UniQuantum, 50, 0.0, 0.3);
        par = par.set_pump(par.gamma()).unwrap();
        let s = CorrelationState::default();
        let nc = noise_coefficients(ScenarioKind::UniQuantum, 0.0).unwrap();
        let r = rhs_cascaded(&s, &par, &nc);
        assert!(r.z_a.abs() < 1e-15);
    }

    #[test]
    fn classical_insertions_are_not_collective() {
        // The u, v terms never multiply N, w or δ: the difference between the
        // two channels is unchanged when those are varied.
        let s = CorrelationState {
            z_a: 0.3,
            z_b: 0.2,
            aa: 0.1.into(),
            bb: 0.05.into(),
            ab: Complex64::new(-0.04, 0.02),
        };
        let q = noise_coefficients(ScenarioKind::UniQuantum, 0.0).unwrap();
        let c = noise_coefficients(ScenarioKind::UniClassical, 0.0).unwrap();
        let diff = |n: u64, w: f64, d: f64| {
            // keep γ fixed while N changes
            let par = ModelParams::new(ScenarioKind::UniQuantum, n, n as f64 * 1e-3, w, d).unwrap();
            let a = rhs_cascaded(&s, &par, &q);
            let b = rhs_cascaded(&s, &par, &c);
            [a.z_b - b.z_b, (a.bb - b.bb).re, (a.ab - b.ab).re, (a.ab - b.ab).im]
        };
        let base = diff(100, 0.1, 0.0);
        for (n, w, d) in [(1000, 0.1, 0.0), (100, 0.7, 0.0), (100, 0.1, 3.0)] {
            let other = diff(n, w, d);
            for k in 0..4 {
                assert!((base[k] - other[k]).abs() < 1e-15, "{k}: {base:?} vs {other:?}");
            }
        }
        assert!(base[0].abs() > 0.0);
    }

    fn arb_state() -> impl Strategy<Value = CorrelationState> {
        (-1.0..1.0f64, -1.0..1.0f64, -0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64)
            .prop_map(|(za, zb, ca, cb, ar, ai)| CorrelationState {
                z_a: za,
                z_b: zb,
                aa: ca.into(),
                bb: cb.into(),
                ab: Complex64::new(ar, ai),
            })
    }

    proptest! {
        #[test]
        fn symmetric_conjugation_symmetry(s in arb_state(), w in 0.0..2.0f64, d in -2.0..2.0f64,
                                          xi in 0.0..0.99f64) {
            let zt = zeta(xi);
            let s = CorrelationState::symmetric(s.z_a, s.aa.re, s.ab);
            let mut s_conj = s;
            s_conj.ab = s.ab.conj();
            let a = rhs_symmetric(&s, &p(ScenarioKind::BiClassical, 1000, w, d), xi, zt);
            let b = rhs_symmetric(&s_conj, &p(ScenarioKind::BiClassical, 1000, w, -d), xi, zt);
            prop_assert!((a.ab.conj() - b.ab).norm() < 1e-12);
            prop_assert!((a.z_a - b.z_a).abs() < 1e-12);
            prop_assert!((a.aa - b.aa).norm() < 1e-12);
        }

        #[test]
        fn cascaded_master_is_autonomous(s in arb_state(), t in arb_state(), w in 0.0..2.0f64,
                                         d1 in -2.0..2.0f64, d2 in -2.0..2.0f64) {
            let mut t = t;
            t.z_a = s.z_a;
            t.aa = s.aa;
            for kind in [ScenarioKind::UniQuantum, ScenarioKind::UniClassical] {
                let nc = noise_coefficients(kind, 0.0).unwrap();
                let a = rhs_cascaded(&s, &p(kind, 500, w, d1), &nc);
                let b = rhs_cascaded(&t, &p(kind, 500, w, d2), &nc);
                prop_assert_eq!(a.z_a, b.z_a);
                prop_assert_eq!(a.aa, b.aa);
            }
        }

        #[test]
        fn rhs_is_pure(s in arb_state(), w in 0.0..2.0f64, d in -2.0..2.0f64) {
            let par = p(ScenarioKind::UniClassical, 300, w, d);
            let nc = noise_coefficients(ScenarioKind::UniClassical, 0.0).unwrap();
            prop_assert_eq!(rhs_cascaded(&s, &par, &nc), rhs_cascaded(&s, &par, &nc));
            prop_assert_eq!(rhs_symmetric(&s, &par, 1.0, 1.0), rhs_symmetric(&s, &par, 1.0, 1.0));
        }
    }
}
