//! Runtime-selectable coupling scenarios.
//!
//! Each of the four coupling variants implements [`Scenario`]; solvers and
//! the harness look them up by tag through a [`Registry`].

mod cascaded;
mod symmetric;

use std::collections::BTreeMap;

pub use cascaded::{UniClassical, UniQuantum};
pub use symmetric::{BiClassical, BiQuantum};

use crate::closedform;
use crate::error::{Error, Result};
use crate::exactsim::{Layout, LindbladSpec};
use crate::meanfield::NoiseCoefficients;
use crate::model::{CorrelationState, ModelParams, ScenarioKind, StateRate};
use crate::spectral::RegressionSystem;

/// One coupling geometry with its equations of motion and observables.
pub trait Scenario: Send + Sync {
    fn kind(&self) -> ScenarioKind;

    fn name(&self) -> &'static str {
        self.kind().tag()
    }

    /// Names of the real unknowns, in packed order.
    fn component_names(&self) -> &'static [&'static str];

    fn dim(&self) -> usize {
        self.component_names().len()
    }

    /// Indices of the components whose dynamics does not depend on the rest
    /// (the driving ensemble of a cascade). Empty when fully coupled.
    fn master_components(&self) -> &'static [usize] {
        &[]
    }

    fn pack(&self, s: &CorrelationState) -> Vec<f64>;

    fn unpack(&self, x: &[f64]) -> CorrelationState;

    fn noise(&self, p: &ModelParams) -> NoiseCoefficients;

    fn rate(&self, s: &CorrelationState, p: &ModelParams) -> StateRate;

    /// Real-ified right-hand side.
    fn rhs(&self, p: &ModelParams, x: &[f64]) -> Vec<f64> {
        let r = self.rate(&self.unpack(x), p);
        self.pack(&r.into())
    }

    fn leading_state(&self, p: &ModelParams) -> CorrelationState {
        closedform::leading_state(self.kind(), p)
    }

    /// Interior starting points for the multi-seed Newton search.
    fn lattice_seeds(&self) -> Vec<CorrelationState> {
        let mut out = Vec::with_capacity(8);
        for z in [-0.5, 0.4] {
            for c in [0.02, 0.15] {
                for sign in [1.0, -1.0] {
                    let ab = num_complex::Complex64::new(sign * 0.8 * c, 0.1 * c);
                    out.push(CorrelationState {
                        z_a: z,
                        z_b: z,
                        aa: c.into(),
                        bb: c.into(),
                        ab,
                    });
                }
            }
        }
        out
    }

    /// Linear two-time dynamics of the dipoles around steady state `s`.
    fn regression_system(&self, s: &CorrelationState, p: &ModelParams) -> RegressionSystem;

    /// Leading-order total output photon flux.
    fn photon_flux(&self, s: &CorrelationState, p: &ModelParams) -> f64;

    /// Number of cavity modes in the full (non-eliminated) model.
    fn cavity_modes(&self) -> usize;

    /// Master equation for `layout`; `p.n_atoms()` must equal the layout's
    /// ensemble size.
    fn lindblad(&self, p: &ModelParams, layout: &Layout) -> Result<LindbladSpec>;
}

/// Name-keyed collection of scenarios.
pub struct Registry {
    entries: BTreeMap<String, Box<dyn Scenario>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, scenario: Box<dyn Scenario>) {
        self.entries.insert(scenario.name().to_string(), scenario);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Scenario> {
        let key = match name.parse::<ScenarioKind>() {
            Ok(k) => k.tag().to_string(),
            Err(_) => name.to_string(),
        };
        self.entries
            .get(&key)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown {
                what: "scenario",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(BiQuantum));
        r.register(Box::new(UniQuantum));
        r.register(Box::new(UniClassical));
        r.register(Box::new(BiClassical));
        r
    }
}

/// Built-in implementation for `kind`.
pub fn builtin(kind: ScenarioKind) -> &'static dyn Scenario {
    match kind {
        ScenarioKind::BiQuantum => &BiQuantum,
        ScenarioKind::UniQuantum => &UniQuantum,
        ScenarioKind::UniClassical => &UniClassical,
        ScenarioKind::BiClassical => &BiClassical,
    }
}
