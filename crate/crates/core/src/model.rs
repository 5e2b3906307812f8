//! Parameter and state records shared by every solver.
//!
//! All frequencies are offsets from the common carrier ν and all rates share
//! one unit system. The natural scale is the collective rate `Nγ`; the
//! single-atom rate γ is `collective_rate / n_atoms` and is never stored.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coupling geometry × channel type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Both ensembles in one cavity mode.
    BiQuantum,
    /// Master cavity output injected into the slave cavity.
    UniQuantum,
    /// Master output measured (heterodyne) and re-created as a seed for the slave.
    UniClassical,
    /// Symmetric measure-and-feedback between two cavities with strength ξ.
    BiClassical,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::BiQuantum,
        ScenarioKind::UniQuantum,
        ScenarioKind::UniClassical,
        ScenarioKind::BiClassical,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ScenarioKind::BiQuantum => "bi-quantum",
            ScenarioKind::UniQuantum => "uni-quantum",
            ScenarioKind::UniClassical => "uni-classical",
            ScenarioKind::BiClassical => "bi-classical",
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, ScenarioKind::BiQuantum | ScenarioKind::BiClassical)
    }

    pub fn carrier_convention(self) -> CarrierConvention {
        if self.is_symmetric() {
            CarrierConvention::SymmetricHalfDetuning
        } else {
            CarrierConvention::MasterAtCarrier
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.tag() == norm || k.tag().replace('-', "") == norm)
            .ok_or_else(|| Error::Unknown {
                what: "scenario",
                name: s.to_string(),
            })
    }
}

/// Where the two ensemble transition frequencies sit relative to ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CarrierConvention {
    /// Ensembles at ν ± δ/2.
    SymmetricHalfDetuning,
    /// Master at ν, slave at ν − δ.
    MasterAtCarrier,
}

/// Physical parameters of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n_atoms: u64,
    collective_rate: f64,
    pump: f64,
    detuning: f64,
    feedback_strength: f64,
    carrier_convention: CarrierConvention,
}

impl ModelParams {
    /// Parameters for `kind` with no feedback (ξ = 0).
    pub fn new(
        kind: ScenarioKind,
        n_atoms: u64,
        collective_rate: f64,
        pump: f64,
        detuning: f64,
    ) -> Result<Self> {
        Self::with_feedback(kind, n_atoms, collective_rate, pump, detuning, 0.0)
    }

    pub fn with_feedback(
        kind: ScenarioKind,
        n_atoms: u64,
        collective_rate: f64,
        pump: f64,
        detuning: f64,
        feedback_strength: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            n_atoms,
            collective_rate,
            pump,
            detuning,
            feedback_strength,
            carrier_convention: kind.carrier_convention(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Dimensionless parameters (`Nγ = 1`), the common case in tests.
    pub fn scaled(kind: ScenarioKind, n_atoms: u64, pump: f64, detuning: f64) -> Result<Self> {
        Self::new(kind, n_atoms, 1.0, pump, detuning)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.n_atoms == 0 {
            return bad("n_atoms must be at least 1");
        }
        if !(self.collective_rate.is_finite() && self.collective_rate > 0.0) {
            return bad("collective_rate must be positive");
        }
        if !(self.pump.is_finite() && self.pump >= 0.0) {
            return bad("pump must be nonnegative");
        }
        if !self.detuning.is_finite() {
            return bad("detuning must be finite");
        }
        if !(0.0..1.0).contains(&self.feedback_strength) {
            return bad("feedback_strength must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn n_atoms(&self) -> u64 {
        self.n_atoms
    }
    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }
    pub fn collective_rate(&self) -> f64 {
        self.collective_rate
    }
    /// Single-atom collective-decay rate γ = Ω²/κ.
    pub fn gamma(&self) -> f64 {
        self.collective_rate / self.n()
    }
    pub fn pump(&self) -> f64 {
        self.pump
    }
    pub fn detuning(&self) -> f64 {
        self.detuning
    }
    pub fn feedback_strength(&self) -> f64 {
        self.feedback_strength
    }
    pub fn carrier_convention(&self) -> CarrierConvention {
        self.carrier_convention
    }

    pub fn set_pump(mut self, pump: f64) -> Result<Self> {
        self.pump = pump;
        self.validate().map(|_| self)
    }
    pub fn set_detuning(mut self, detuning: f64) -> Result<Self> {
        self.detuning = detuning;
        self.validate().map(|_| self)
    }
    pub fn set_n_atoms(mut self, n_atoms: u64) -> Result<Self> {
        self.n_atoms = n_atoms;
        self.validate().map(|_| self)
    }
    pub fn set_feedback_strength(mut self, xi: f64) -> Result<Self> {
        self.feedback_strength = xi;
        self.validate().map(|_| self)
    }

    /// Same physics, rescaled so that `Nγ = 1`.
    pub fn dimensionless(&self) -> ModelParams {
        let s = self.collective_rate;
        ModelParams {
            collective_rate: 1.0,
            pump: self.pump / s,
            detuning: self.detuning / s,
            ..*self
        }
    }
}

/// Free-function form of [`ModelParams::dimensionless`].
pub fn dimensionless(params: &ModelParams) -> ModelParams {
    params.dimensionless()
}

/// Cumulant state: populations and second-order dipole correlations.
///
/// `aa`/`bb` are correlations between two distinct atoms of the same
/// ensemble, `ab` between one atom of A and one of B. For symmetric
/// scenarios `z_a == z_b` and `aa == bb`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationState {
    pub z_a: f64,
    pub z_b: f64,
    pub aa: Complex64,
    pub bb: Complex64,
    pub ab: Complex64,
}

impl CorrelationState {
    /// Fully inverted ensembles, no correlations.
    pub fn inverted() -> Self {
        CorrelationState {
            z_a: 1.0,
            z_b: 1.0,
            ..Default::default()
        }
    }

    pub fn symmetric(z: f64, aa: f64, ab: Complex64) -> Self {
        CorrelationState {
            z_a: z,
            z_b: z,
            aa: aa.into(),
            bb: aa.into(),
            ab,
        }
    }

    /// True if every field lies within the single-atom bounds, up to `eps`.
    pub fn is_admissible(&self, eps: f64) -> bool {
        let b = 1.0 + eps;
        self.z_a.abs() <= b
            && self.z_b.abs() <= b
            && self.aa.norm() <= b
            && self.bb.norm() <= b
            && self.ab.norm() <= b
    }

    pub fn max_abs_diff(&self, other: &CorrelationState) -> f64 {
        [
            (self.z_a - other.z_a).abs(),
            (self.z_b - other.z_b).abs(),
            (self.aa - other.aa).norm(),
            (self.bb - other.bb).norm(),
            (self.ab - other.ab).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Time derivative of a [`CorrelationState`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateRate {
    pub z_a: f64,
    pub z_b: f64,
    pub aa: Complex64,
    pub bb: Complex64,
    pub ab: Complex64,
}

impl From<StateRate> for CorrelationState {
    fn from(r: StateRate) -> Self {
        CorrelationState {
            z_a: r.z_a,
            z_b: r.z_b,
            aa: r.aa,
            bb: r.bb,
            ab: r.ab,
        }
    }
}

/// A stable fixed point of the cumulant equations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateResult {
    pub state: CorrelationState,
    /// Eigenvalues of the real-ified Jacobian, in the frequency units of the
    /// parameters the solver was called with.
    pub jacobian_eigenvalues: Vec<Complex64>,
    pub stable: bool,
    /// Residual norm of the right-hand side in units of `Nγ`.
    pub residual_norm: f64,
    pub seeds_tried: usize,
    /// Number of distinct physical roots found across all seeds.
    pub roots_found: usize,
    /// Set when more than one stable root exists; the returned root is the
    /// one reached dynamically from the inverted state.
    pub multiple_stable_roots: bool,
}

/// Stability threshold as a fraction of `Nγ`.
pub const STABILITY_TOLERANCE: f64 = 1e-9;
