use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use super::Scenario;
use crate::error::Result;
use crate::exactsim::{Ensemble, Layout, LindbladSpec};
use crate::meanfield::{rhs_symmetric, zeta, NoiseCoefficients};
use crate::model::{CorrelationState, ModelParams, ScenarioKind, StateRate};
use crate::spectral::RegressionSystem;

const NAMES: &[&str] = &["z", "aa", "re_ab", "im_ab"];

/// Both ensembles share one bad-cavity mode.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiQuantum;

/// Two cavities coupled both ways by heterodyne measurement and re-injection.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiClassical;

fn pack(s: &CorrelationState) -> Vec<f64> {
    vec![s.z_a, s.aa.re, s.ab.re, s.ab.im]
}

fn unpack(x: &[f64]) -> CorrelationState {
    CorrelationState::symmetric(x[0], x[1], Complex64::new(x[2], x[3]))
}

fn regression(s: &CorrelationState, p: &ModelParams, xi: f64, zeta: f64) -> RegressionSystem {
    let n = p.n();
    let g = p.gamma();
    let z = s.z_a;
    let c = s.aa.re;
    let x = Complex64::new(g * (n - 1.0) * z - g * zeta - p.pump(), p.detuning());
    let y = Complex64::from(xi * n * g * z);
    RegressionSystem {
        matrix: Matrix2::new(x, y, y, x.conj()) * Complex64::from(0.5),
        initial: Vector2::new(c + s.ab, c + s.ab.conj()),
        weights: Vector2::repeat(Complex64::from(g * n * n)),
    }
}

fn flux(s: &CorrelationState, p: &ModelParams) -> f64 {
    2.0 * p.gamma() * p.n() * p.n() * (s.aa.re + s.ab.re)
}

/// Detuning Hamiltonian, pump and (for the full model) atom-cavity coupling
/// with one cavity per ensemble listed in `cavities`.
fn common_terms(p: &ModelParams, layout: &Layout, cavities: &[(Ensemble, usize)]) -> LindbladSpec {
    let mut spec = LindbladSpec::new(layout.dim());
    spec.hamiltonian += (layout.j_z(Ensemble::A) - layout.j_z(Ensemble::B)) * Complex64::from(0.5 * p.detuning());
    spec.add_pump(layout, p.pump());
    if layout.is_full() {
        let omega = (p.gamma() * full_kappa(p)).sqrt();
        for &(ens, mode) in cavities {
            let coupling = layout.create(mode) * layout.j_minus(ens);
            spec.hamiltonian += (&coupling + coupling.adjoint()) * Complex64::from(0.5 * omega);
        }
    }
    spec
}

/// Cavity decay rate used when the field is kept explicitly.
pub(crate) fn full_kappa(p: &ModelParams) -> f64 {
    50.0 * p.pump().max(p.collective_rate())
}

impl Scenario for BiQuantum {
    fn kind(&self) -> ScenarioKind {
        ScenarioKind::BiQuantum
    }
    fn component_names(&self) -> &'static [&'static str] {
        NAMES
    }
    fn pack(&self, s: &CorrelationState) -> Vec<f64> {
        pack(s)
    }
    fn unpack(&self, x: &[f64]) -> CorrelationState {
        unpack(x)
    }
    fn noise(&self, _p: &ModelParams) -> NoiseCoefficients {
        NoiseCoefficients {
            u: 1.0,
            v: 1.0,
            zeta: 1.0,
        }
    }
    fn rate(&self, s: &CorrelationState, p: &ModelParams) -> StateRate {
        rhs_symmetric(s, p, 1.0, 1.0)
    }
    fn regression_system(&self, s: &CorrelationState, p: &ModelParams) -> RegressionSystem {
        regression(s, p, 1.0, 1.0)
    }
    fn photon_flux(&self, s: &CorrelationState, p: &ModelParams) -> f64 {
        flux(s, p)
    }
    fn cavity_modes(&self) -> usize {
        1
    }
    fn lindblad(&self, p: &ModelParams, layout: &Layout) -> Result<LindbladSpec> {
        let mut spec = common_terms(p, layout, &[(Ensemble::A, 0), (Ensemble::B, 0)]);
        if layout.is_full() {
            spec.add_collapse(full_kappa(p), layout.annihilate(0));
        } else {
            spec.add_collapse(
                p.gamma(),
                layout.j_minus(Ensemble::A) + layout.j_minus(Ensemble::B),
            );
        }
        Ok(spec)
    }
}

impl Scenario for BiClassical {
    fn kind(&self) -> ScenarioKind {
        ScenarioKind::BiClassical
    }
    fn component_names(&self) -> &'static [&'static str] {
        NAMES
    }
    fn pack(&self, s: &CorrelationState) -> Vec<f64> {
        pack(s)
    }
    fn unpack(&self, x: &[f64]) -> CorrelationState {
        unpack(x)
    }
    fn noise(&self, p: &ModelParams) -> NoiseCoefficients {
        NoiseCoefficients {
            u: 1.0,
            v: 1.0,
            zeta: zeta(p.feedback_strength()),
        }
    }
    fn rate(&self, s: &CorrelationState, p: &ModelParams) -> StateRate {
        let xi = p.feedback_strength();
        rhs_symmetric(s, p, xi, zeta(xi))
    }
    fn regression_system(&self, s: &CorrelationState, p: &ModelParams) -> RegressionSystem {
        let xi = p.feedback_strength();
        regression(s, p, xi, zeta(xi))
    }
    fn photon_flux(&self, s: &CorrelationState, p: &ModelParams) -> f64 {
        flux(s, p)
    }
    fn cavity_modes(&self) -> usize {
        2
    }
    fn lindblad(&self, p: &ModelParams, layout: &Layout) -> Result<LindbladSpec> {
        let xi = p.feedback_strength();
        let mut spec = common_terms(p, layout, &[(Ensemble::A, 0), (Ensemble::B, 1)]);
        if layout.is_full() {
            let kt = full_kappa(p) / (1.0 - xi * xi);
            let (a, b) = (layout.annihilate(0), layout.annihilate(1));
            let xi_c = Complex64::from(xi);
            spec.add_collapse(kt, &a + &b * xi_c);
            spec.add_collapse(kt, &b + &a * xi_c);
            spec.add_collapse(xi * xi * kt, layout.create(1));
            spec.add_collapse(xi * xi * kt, layout.create(0));
        } else {
            let g = p.gamma();
            let (ja, jb) = (layout.j_minus(Ensemble::A), layout.j_minus(Ensemble::B));
            let nbar_plus = xi * xi / (4.0 * (1.0 + xi));
            let nbar_minus = xi * xi / (4.0 * (1.0 - xi));
            spec.add_thermal(0.5 * g * (1.0 - xi), &ja - &jb, nbar_plus);
            spec.add_thermal(0.5 * g * (1.0 + xi), ja + jb, nbar_minus);
        }
        Ok(spec)
    }
}
