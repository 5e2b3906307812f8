//! Synchronization of two superradiant lasers: cumulant mean-field solvers,
//! regression spectra, leading-order formulas and an exact small-system
//! oracle.

pub mod closedform;
pub mod error;
pub mod exactsim;
pub mod harness;
pub mod meanfield;
pub mod model;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{CorrelationState, ModelParams, ScenarioKind, SteadyStateResult};
pub use scenario::{builtin, Registry, Scenario};
