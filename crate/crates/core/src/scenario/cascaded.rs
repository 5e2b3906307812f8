use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use super::symmetric::full_kappa;
use super::Scenario;
use crate::error::Result;
use crate::exactsim::{Ensemble, Layout, LindbladSpec};
use crate::meanfield::{rhs_cascaded, NoiseCoefficients};
use crate::model::{CorrelationState, ModelParams, ScenarioKind, StateRate};
use crate::spectral::RegressionSystem;

const NAMES: &[&str] = &["z_a", "aa", "z_b", "bb", "re_ab", "im_ab"];

/// Master cavity output injected directly into the slave cavity.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniQuantum;

/// Master output measured and re-created as a coherent seed for the slave.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniClassical;

fn pack(s: &CorrelationState) -> Vec<f64> {
    vec![s.z_a, s.aa.re, s.z_b, s.bb.re, s.ab.re, s.ab.im]
}

fn unpack(x: &[f64]) -> CorrelationState {
    CorrelationState {
        z_a: x[0],
        z_b: x[2],
        aa: x[1].into(),
        bb: x[3].into(),
        ab: Complex64::new(x[4], x[5]),
    }
}

fn regression(s: &CorrelationState, p: &ModelParams, nc: &NoiseCoefficients) -> RegressionSystem {
    let n = p.n();
    let g = p.gamma();
    let w = p.pump();
    let x = Complex64::from(g * (n - 1.0) * s.z_a - g - w);
    let xp = Complex64::new(g * (n - 1.0) * s.z_b - nc.u * g - w, -2.0 * p.detuning());
    let y = Complex64::from(-2.0 * n * g * s.z_b);
    let zero = Complex64::default();
    RegressionSystem {
        matrix: Matrix2::new(x, zero, y, xp) * Complex64::from(0.5),
        // columns ⟨σ⁺_T(τ) (J⁻_B − J⁻_A)(0)⟩ / N for T = A, B
        initial: Vector2::new(s.ab - s.aa.re, s.bb.re - s.ab.conj()),
        weights: Vector2::new(Complex64::from(-g * n * n), Complex64::from(g * n * n)),
    }
}

fn flux(s: &CorrelationState, p: &ModelParams) -> f64 {
    p.gamma() * p.n() * p.n() * (s.aa.re + s.bb.re - 2.0 * s.ab.re)
}

fn lindblad(p: &ModelParams, layout: &Layout, classical: bool) -> LindbladSpec {
    let mut spec = LindbladSpec::new(layout.dim());
    spec.hamiltonian -= layout.j_z(Ensemble::B) * Complex64::from(p.detuning());
    spec.add_pump(layout, p.pump());
    let half_i = |rate: f64| Complex64::new(0.0, 0.5 * rate);
    if layout.is_full() {
        let kappa = full_kappa(p);
        let omega = (p.gamma() * kappa).sqrt();
        let (a, b) = (layout.annihilate(0), layout.annihilate(1));
        for (ens, mode) in [(Ensemble::A, 0), (Ensemble::B, 1)] {
            let coupling = layout.create(mode) * layout.j_minus(ens);
            spec.hamiltonian += (&coupling + coupling.adjoint()) * Complex64::from(0.5 * omega);
        }
        let hop = a.adjoint() * &b;
        spec.hamiltonian += (&hop - hop.adjoint()) * half_i(kappa);
        spec.add_collapse(kappa, &a + &b);
        if classical {
            spec.add_collapse(kappa, b.clone());
            spec.add_collapse(kappa, b.adjoint());
        }
    } else {
        let g = p.gamma();
        let (ja, jb) = (layout.j_minus(Ensemble::A), layout.j_minus(Ensemble::B));
        let hop = ja.adjoint() * &jb;
        spec.hamiltonian -= (&hop - hop.adjoint()) * half_i(g);
        spec.add_collapse(g, &ja - &jb);
        if classical {
            spec.add_collapse(g, jb.clone());
            spec.add_collapse(g, jb.adjoint());
        }
    }
    spec
}

impl Scenario for UniQuantum {
    fn kind(&self) -> ScenarioKind {
        ScenarioKind::UniQuantum
    }
    fn component_names(&self) -> &'static [&'static str] {
        NAMES
    }
    fn pack(&self, s: &CorrelationState) -> Vec<f64> {
        pack(s)
    }
    fn master_components(&self) -> &'static [usize] {
        &[0, 1]
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
        rhs_cascaded(s, p, &self.noise(p))
    }
    fn regression_system(&self, s: &CorrelationState, p: &ModelParams) -> RegressionSystem {
        regression(s, p, &self.noise(p))
    }
    fn photon_flux(&self, s: &CorrelationState, p: &ModelParams) -> f64 {
        flux(s, p)
    }
    fn cavity_modes(&self) -> usize {
        2
    }
    fn lindblad(&self, p: &ModelParams, layout: &Layout) -> Result<LindbladSpec> {
        Ok(lindblad(p, layout, false))
    }
}

impl Scenario for UniClassical {
    fn kind(&self) -> ScenarioKind {
        ScenarioKind::UniClassical
    }
    fn component_names(&self) -> &'static [&'static str] {
        NAMES
    }
    fn pack(&self, s: &CorrelationState) -> Vec<f64> {
        pack(s)
    }
    fn master_components(&self) -> &'static [usize] {
        &[0, 1]
    }
    fn unpack(&self, x: &[f64]) -> CorrelationState {
        unpack(x)
    }
    fn noise(&self, _p: &ModelParams) -> NoiseCoefficients {
        NoiseCoefficients {
            u: 3.0,
            v: 2.0,
            zeta: 1.0,
        }
    }
    fn rate(&self, s: &CorrelationState, p: &ModelParams) -> StateRate {
        rhs_cascaded(s, p, &self.noise(p))
    }
    fn regression_system(&self, s: &CorrelationState, p: &ModelParams) -> RegressionSystem {
        regression(s, p, &self.noise(p))
    }
    fn photon_flux(&self, s: &CorrelationState, p: &ModelParams) -> f64 {
        flux(s, p)
    }
    fn cavity_modes(&self) -> usize {
        2
    }
    fn lindblad(&self, p: &ModelParams, layout: &Layout) -> Result<LindbladSpec> {
        Ok(lindblad(p, layout, true))
    }
}
