//! Leading-order (large N) analytic results.
//!
//! Every formula is evaluated in units of `Nγ`; inputs are rescaled on entry
//! and frequency-valued outputs are scaled back.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::zeta;
use crate::model::{CorrelationState, ModelParams, ScenarioKind};

/// Leading-order polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LeadingPolarization {
    Symmetric(f64),
    Cascaded { master: f64, slave: f64 },
}

impl LeadingPolarization {
    pub fn master(&self) -> f64 {
        match *self {
            LeadingPolarization::Symmetric(z) => z,
            LeadingPolarization::Cascaded { master, .. } => master,
        }
    }
    pub fn slave(&self) -> f64 {
        match *self {
            LeadingPolarization::Symmetric(z) => z,
            LeadingPolarization::Cascaded { slave, .. } => slave,
        }
    }
}

/// Full width of a spectral peak in units of the single-atom rate γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PeakWidth {
    Finite(f64),
    /// Width grows like `coefficient · N`; the peak vanishes at large N.
    Divergent { coefficient: f64 },
}

impl PeakWidth {
    /// Γ/γ for a concrete atom number.
    pub fn at(&self, n_atoms: f64) -> f64 {
        match *self {
            PeakWidth::Finite(v) => v,
            PeakWidth::Divergent { coefficient } => coefficient * n_atoms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingPeak {
    /// Peak position, offset from ν, in the frequency units of the parameters.
    pub center: f64,
    pub width: PeakWidth,
}

/// Boundary of the synchronized region in the (w, δ) plane, units of `Nγ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseBoundary {
    /// Synchronization requires `δ < slope · w`.
    SyncLine { slope: f64 },
    /// Above `w = 1` superradiance requires `(w − 1)² + δ² < radius²`; the
    /// arc only bounds the quadrant `w ≥ 1, δ ≥ 0`.
    QuarterCircle { radius: f64 },
}

impl PhaseBoundary {
    pub fn inside(&self, w: f64, delta: f64) -> bool {
        match *self {
            PhaseBoundary::SyncLine { slope } => delta.abs() < slope * w,
            PhaseBoundary::QuarterCircle { radius } => {
                w <= 1.0 || (w - 1.0).powi(2) + delta * delta < radius * radius
            }
        }
    }
}

pub fn phase_boundaries(kind: ScenarioKind, xi: f64) -> Vec<PhaseBoundary> {
    match kind {
        ScenarioKind::BiQuantum => vec![
            PhaseBoundary::SyncLine { slope: 1.0 },
            PhaseBoundary::QuarterCircle { radius: 1.0 },
        ],
        ScenarioKind::BiClassical => vec![
            PhaseBoundary::SyncLine { slope: xi },
            PhaseBoundary::QuarterCircle { radius: xi },
        ],
        ScenarioKind::UniQuantum | ScenarioKind::UniClassical => {
            vec![PhaseBoundary::SyncLine { slope: 1.0 }]
        }
    }
}

/// Whether (w, δ) lies in the leading-order synchronized region.
pub fn synchronized_leading(kind: ScenarioKind, p: &ModelParams) -> bool {
    let d = p.dimensionless();
    let (w, delta) = (d.pump(), d.detuning());
    let inside = phase_boundaries(kind, p.feedback_strength())
        .iter()
        .all(|b| b.inside(w, delta));
    inside && (kind.is_symmetric() || w < 1.0)
}

fn symmetric_z(w: f64, delta: f64, xi: f64) -> f64 {
    let delta = delta.abs();
    let z = if delta < w * xi {
        let x2 = xi * xi;
        if x2 == 1.0 {
            (w * w + delta * delta) / (2.0 * w)
        } else {
            (w - (w * w * x2 - delta * delta * (1.0 - x2)).sqrt()) / (1.0 - x2)
        }
    } else {
        w
    };
    z.min(1.0)
}

/// Slave polarization from the leading-order cascaded balance
/// `(1 − z)(D² + δ²) = 2 z c_A`, `D = (z_A + z)/2 − w`, root in `(0, w)`.
fn cascaded_slave_z(w: f64, delta: f64) -> f64 {
    let delta = delta.abs();
    if w >= 1.0 || delta >= w {
        return w.min(1.0);
    }
    let za = w;
    let ca = 0.5 * w * (1.0 - za);
    let f = |z: f64| {
        let d = 0.5 * (za + z) - w;
        (1.0 - z) * (d * d + delta * delta) - 2.0 * z * ca
    };
    let (mut lo, mut hi) = (0.0, w);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn sigma_z_leading(kind: ScenarioKind, p: &ModelParams) -> LeadingPolarization {
    let d = p.dimensionless();
    let (w, delta) = (d.pump(), d.detuning());
    match kind {
        ScenarioKind::BiQuantum => LeadingPolarization::Symmetric(symmetric_z(w, delta, 1.0)),
        ScenarioKind::BiClassical => {
            LeadingPolarization::Symmetric(symmetric_z(w, delta, p.feedback_strength()))
        }
        ScenarioKind::UniQuantum | ScenarioKind::UniClassical => LeadingPolarization::Cascaded {
            master: w.min(1.0),
            slave: cascaded_slave_z(w, delta),
        },
    }
}

/// Leading-order peak widths (Γ/γ) and positions.
pub fn linewidth_leading(kind: ScenarioKind, p: &ModelParams) -> Vec<LeadingPeak> {
    let d = p.dimensionless();
    let (w, delta) = (d.pump(), d.detuning().abs());
    let scale = p.collective_rate();
    match kind {
        ScenarioKind::BiQuantum | ScenarioKind::BiClassical => {
            let (xi, offset) = if kind == ScenarioKind::BiQuantum {
                (1.0, 1.0)
            } else {
                let xi = p.feedback_strength();
                (xi, zeta(xi))
            };
            // printed piecewise forms, without the min(·, 1) clip
            let sync_part = if delta < w * xi {
                if kind == ScenarioKind::BiQuantum {
                    (w * w + delta * delta) / (2.0 * w)
                } else {
                    let x2 = xi * xi;
                    (w - (w * w * x2 - delta * delta * (1.0 - x2)).sqrt()) / (1.0 - x2)
                }
            } else {
                w
            };
            let width = PeakWidth::Finite(offset + sync_part);
            let half = 0.5 * pole_distance_leading(p, kind);
            if half == 0.0 {
                vec![LeadingPeak { center: 0.0, width }]
            } else {
                vec![
                    LeadingPeak { center: -half, width },
                    LeadingPeak { center: half, width },
                ]
            }
        }
        ScenarioKind::UniQuantum | ScenarioKind::UniClassical => {
            let offset = if kind == ScenarioKind::UniQuantum { 1.0 } else { 3.0 };
            let slave = if delta <= w {
                PeakWidth::Divergent {
                    coefficient: w - cascaded_slave_z(w, delta),
                }
            } else {
                PeakWidth::Finite(w + offset)
            };
            vec![
                LeadingPeak {
                    center: 0.0,
                    width: PeakWidth::Finite(w + 1.0),
                },
                LeadingPeak {
                    center: -d.detuning() * scale,
                    width: slave,
                },
            ]
        }
    }
}

/// Separation of the two emission peaks. Cascaded peaks always sit at the
/// bare frequencies, so their distance is `|δ|`.
pub fn pole_distance_leading(p: &ModelParams, kind: ScenarioKind) -> f64 {
    let d = p.dimensionless();
    let delta = d.detuning().abs();
    let xi = match kind {
        ScenarioKind::BiQuantum => 1.0,
        ScenarioKind::BiClassical => p.feedback_strength(),
        _ => return delta * p.collective_rate(),
    };
    let z = sigma_z_leading(kind, p).master();
    let y = xi * z;
    if delta <= y {
        0.0
    } else {
        (delta * delta - y * y).sqrt() * p.collective_rate()
    }
}

/// Pump rate (units of `Nγ`) above which superradiance, and with it
/// synchronization, is lost, for detuning `delta` (units of `Nγ`).
pub fn critical_pumping(kind: ScenarioKind, delta: f64, xi: f64) -> f64 {
    let delta = delta.abs();
    let radius = match kind {
        ScenarioKind::BiQuantum => 1.0,
        ScenarioKind::BiClassical => xi,
        ScenarioKind::UniQuantum | ScenarioKind::UniClassical => return 1.0,
    };
    if delta <= radius {
        1.0 + (radius * radius - delta * delta).sqrt()
    } else {
        1.0
    }
}

/// Cavity-rate bookkeeping of the symmetric feedback channel, relative to κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCoefficients {
    pub kappa_tilde: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub nbar_plus: f64,
    pub nbar_minus: f64,
    pub zeta: f64,
}

pub fn coupling_coefficients(xi: f64) -> Result<CouplingCoefficients> {
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::InvalidParams(format!(
            "feedback strength {xi} violates the stability condition ξ < 1"
        )));
    }
    let kappa_tilde = 1.0 / ((1.0 - xi) * (1.0 + xi));
    Ok(CouplingCoefficients {
        kappa_tilde,
        kappa_plus: kappa_tilde * (1.0 + xi),
        kappa_minus: kappa_tilde * (1.0 - xi),
        nbar_plus: xi * xi / (4.0 * (1.0 + xi)),
        nbar_minus: xi * xi / (4.0 * (1.0 - xi)),
        zeta: zeta(xi),
    })
}

/// Eigenvalues `−κ̃(1 ± ξ)/2` of the mean-field dynamics of the two fields.
pub fn stability_eigenvalues(kappa_tilde: f64, xi: f64) -> (f64, f64) {
    (
        -0.5 * kappa_tilde * (1.0 + xi),
        -0.5 * kappa_tilde * (1.0 - xi),
    )
}

/// Leading-order cumulant state, used to seed the Newton solver.
pub fn leading_state(kind: ScenarioKind, p: &ModelParams) -> CorrelationState {
    let d = p.dimensionless();
    let (w, delta) = (d.pump(), d.detuning());
    match sigma_z_leading(kind, p) {
        LeadingPolarization::Symmetric(z) => {
            if z >= 1.0 {
                return CorrelationState::symmetric(1.0, 0.0, Complex64::default());
            }
            let xi = if kind == ScenarioKind::BiQuantum {
                1.0
            } else {
                p.feedback_strength()
            };
            let denom = Complex64::new(z - w, delta);
            let ratio = if denom.norm() < 1e-12 {
                Complex64::new(1.0, 0.0)
            } else {
                -xi * z / denom
            };
            let c = w * (1.0 - z) / (2.0 * (1.0 + xi * ratio.re));
            CorrelationState::symmetric(z, c, ratio * c)
        }
        LeadingPolarization::Cascaded { master, slave } => {
            let ca = 0.5 * w * (1.0 - master);
            let denom = Complex64::new(0.5 * (master + slave) - w, delta);
            let ab = if denom.norm() < 1e-12 {
                Complex64::default()
            } else {
                slave * ca / denom
            };
            let cb = (0.5 * (w * (1.0 - slave) + 4.0 * ab.re)).max(0.0);
            CorrelationState {
                z_a: master,
                z_b: slave,
                aa: ca.into(),
                bb: cb.into(),
                ab,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(kind: ScenarioKind, w: f64, d: f64) -> ModelParams {
        ModelParams::scaled(kind, 10_000, w, d).unwrap()
    }

    fn bc(w: f64, d: f64, xi: f64) -> ModelParams {
        ModelParams::with_feedback(ScenarioKind::BiClassical, 10_000, 1.0, w, d, xi).unwrap()
    }

    #[test]
    fn polarization_values() {
        let z = sigma_z_leading(ScenarioKind::BiQuantum, &sp(ScenarioKind::BiQuantum, 0.5, 0.3));
        assert!((z.master() - 0.34).abs() < 1e-12);
        let z = sigma_z_leading(ScenarioKind::BiClassical, &bc(0.5, 0.0, 0.6));
        assert!((z.master() - 0.3125).abs() < 1e-12);
        for kind in ScenarioKind::ALL {
            let p = ModelParams::with_feedback(kind, 100, 1.0, 1.3, 1.4, 0.5).unwrap();
            let z = sigma_z_leading(kind, &p);
            assert_eq!((z.master(), z.slave()), (1.0, 1.0));
        }
    }

    #[test]
    fn polarization_in_physical_units() {
        let p = ModelParams::new(ScenarioKind::BiQuantum, 10_000, 1e6, 5e5, 3e5).unwrap();
        assert!((sigma_z_leading(ScenarioKind::BiQuantum, &p).master() - 0.34).abs() < 1e-12);
    }

    #[test]
    fn widths() {
        let w = linewidth_leading(ScenarioKind::BiQuantum, &sp(ScenarioKind::BiQuantum, 0.5, 0.7));
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|pk| pk.width == PeakWidth::Finite(1.5)));

        let w = linewidth_leading(ScenarioKind::BiClassical, &bc(0.5, 0.4, 0.6));
        assert!(matches!(w[0].width, PeakWidth::Finite(v) if (v - 1.8825).abs() < 1e-12));

        let q = linewidth_leading(ScenarioKind::UniQuantum, &sp(ScenarioKind::UniQuantum, 0.5, 0.8));
        let c = linewidth_leading(ScenarioKind::UniClassical, &sp(ScenarioKind::UniClassical, 0.5, 0.8));
        assert_eq!(q[1].width, PeakWidth::Finite(1.5));
        assert_eq!(c[1].width, PeakWidth::Finite(3.5));
        assert_eq!(c[0].width, PeakWidth::Finite(1.5));
        assert!((q[1].center + 0.8).abs() < 1e-15);

        let s = linewidth_leading(ScenarioKind::UniQuantum, &sp(ScenarioKind::UniQuantum, 0.5, 0.25));
        match s[1].width {
            PeakWidth::Divergent { coefficient } => assert!(coefficient > 0.0),
            other => panic!("expected divergent slave width, got {other:?}"),
        }
    }

    #[test]
    fn pole_distance() {
        let d = pole_distance_leading(&sp(ScenarioKind::BiQuantum, 0.5, 1.0), ScenarioKind::BiQuantum);
        assert!((d - 0.75f64.sqrt()).abs() < 1e-12);
        assert_eq!(pole_distance_leading(&sp(ScenarioKind::BiQuantum, 0.5, 0.5), ScenarioKind::BiQuantum), 0.0);
        assert_eq!(pole_distance_leading(&bc(0.5, 0.45, 0.9), ScenarioKind::BiClassical), 0.0);
        for delta in [10.0, 100.0, 1000.0] {
            let d = pole_distance_leading(&sp(ScenarioKind::BiQuantum, 0.5, delta), ScenarioKind::BiQuantum);
            assert!((d / delta - 1.0).abs() < 0.2 / (delta * delta));
        }
    }

    #[test]
    fn critical_pumping_values() {
        assert_eq!(critical_pumping(ScenarioKind::BiQuantum, 0.0, 0.0), 2.0);
        assert!((critical_pumping(ScenarioKind::BiClassical, 0.0, 0.6) - 1.6).abs() < 1e-12);
        assert_eq!(critical_pumping(ScenarioKind::BiQuantum, 1.0, 0.0), 1.0);
        assert_eq!(critical_pumping(ScenarioKind::UniQuantum, 0.0, 0.0), 1.0);
        // the circle (w−1)² + δ² = 1 passes through the returned point
        for delta in [0.1, 0.5, 0.9] {
            let w = critical_pumping(ScenarioKind::BiQuantum, delta, 0.0);
            assert!(((w - 1.0).powi(2) + delta * delta - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_pump_classical_sync_is_bounded_by_the_line_only() {
        let sync = |w, d| {
            let p = ModelParams::with_feedback(ScenarioKind::BiClassical, 10_000, 1.0, w, d, 0.6).unwrap();
            synchronized_leading(ScenarioKind::BiClassical, &p)
        };
        // left of w = 1 the arc plays no role
        assert!(sync(0.2, 0.1));
        assert!(!sync(0.2, 0.15));
        assert!(sync(1.5, 0.2));
        assert!(!sync(1.5, 0.5));
    }

    #[test]
    fn coupling_table() {
        let c = coupling_coefficients(0.0).unwrap();
        assert_eq!((c.kappa_tilde, c.nbar_plus, c.nbar_minus, c.zeta), (1.0, 0.0, 0.0, 1.0));
        let c = coupling_coefficients(0.6).unwrap();
        assert!((c.kappa_tilde - 1.5625).abs() < 1e-12);
        assert!((c.nbar_plus - 0.05625).abs() < 1e-12);
        assert!((c.nbar_minus - 0.225).abs() < 1e-12);
        assert!((c.zeta - 1.3825).abs() < 1e-12);
        assert!(coupling_coefficients(1.0).is_err());
        let mut last = 0.0;
        for i in 0..=99 {
            let z = coupling_coefficients(0.9 + 0.00099 * i as f64).unwrap().zeta;
            assert!(z > last);
            last = z;
        }
    }

    #[test]
    fn stability_pairs() {
        assert_eq!(stability_eigenvalues(2.0, 0.5), (-1.5, -0.5));
        let (a, b) = stability_eigenvalues(3.0, 0.0);
        assert_eq!(a, b);
        assert_eq!(stability_eigenvalues(2.0, 1.0).1, 0.0);
    }

    #[test]
    fn branch_points_are_continuous() {
        for w in [0.2, 0.5, 0.8] {
            let eps = 1e-9;
            let below = sp(ScenarioKind::BiQuantum, w, w * (1.0 - eps));
            let above = sp(ScenarioKind::BiQuantum, w, w * (1.0 + eps));
            let zb = sigma_z_leading(ScenarioKind::BiQuantum, &below).master();
            let za = sigma_z_leading(ScenarioKind::BiQuantum, &above).master();
            assert!((zb - za).abs() < 1e-8);
            for xi in [0.3, 0.6, 0.9] {
                let below = bc(w, w * xi * (1.0 - eps), xi);
                let above = bc(w, w * xi * (1.0 + eps), xi);
                let zb = sigma_z_leading(ScenarioKind::BiClassical, &below).master();
                let za = sigma_z_leading(ScenarioKind::BiClassical, &above).master();
                assert!((zb - za).abs() < 1e-7, "ξ={xi}: {zb} vs {za}");
                let gb = linewidth_leading(ScenarioKind::BiClassical, &below)[0].width.at(1.0);
                let ga = linewidth_leading(ScenarioKind::BiClassical, &above)[0].width.at(1.0);
                assert!((gb - ga).abs() < 1e-7);
            }
            let below = sp(ScenarioKind::UniQuantum, w, w * (1.0 - eps));
            let above = sp(ScenarioKind::UniQuantum, w, w * (1.0 + eps));
            let zb = sigma_z_leading(ScenarioKind::UniQuantum, &below).slave();
            let za = sigma_z_leading(ScenarioKind::UniQuantum, &above).slave();
            assert!((zb - za).abs() < 1e-3, "{zb} vs {za}");
        }
    }

    #[test]
    fn classical_formulas_reduce_to_quantum_at_unit_coupling() {
        // ζ = ξ = 1 taken literally
        for (w, delta) in [(0.5, 0.2), (0.5, 0.8), (0.3, 0.0), (0.9, 0.6)] {
            let q = symmetric_z(w, delta, 1.0);
            let direct = if delta < w { (w * w + delta * delta) / (2.0 * w) } else { w };
            assert!((q - direct.min(1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn classical_linewidth_dominates_quantum() {
        for xi in [0.1, 0.3, 0.6, 0.9] {
            for w in [0.1, 0.4, 0.7, 0.95] {
                for delta in [0.0, 0.05, 0.2, 0.5, 1.0, 2.0] {
                    let q = linewidth_leading(ScenarioKind::BiQuantum, &sp(ScenarioKind::BiQuantum, w, delta));
                    let c = linewidth_leading(ScenarioKind::BiClassical, &bc(w, delta, xi));
                    assert!(c[0].width.at(1.0) > q[0].width.at(1.0));
                }
            }
        }
    }

    #[test]
    fn leading_state_satisfies_population_balance() {
        let p = sp(ScenarioKind::BiQuantum, 0.5, 0.3);
        let s = leading_state(ScenarioKind::BiQuantum, &p);
        assert!((s.aa.re + s.ab.re - 0.5 * 0.5 * (1.0 - s.z_a)).abs() < 1e-12);
        assert!((s.aa.re - 0.5 * s.z_a * (1.0 - s.z_a)).abs() < 1e-12);
        let s = leading_state(ScenarioKind::BiQuantum, &sp(ScenarioKind::BiQuantum, 0.5, 0.0));
        assert!((s.ab - s.aa).norm() < 1e-12);
    }
}
