//! Batch layer: sweep configs, parallel sweeps, figure data and validation.

pub mod config;
pub mod figure;
pub mod sweep;
pub mod table;
pub mod validate;

pub use config::{linspace, parse_frequency, parse_grid, parse_sweep_config};
pub use figure::{run_figure, FigureId, FigureJob, FigureParams};
pub use sweep::{evaluate_point, observables, run_sweep, run_sweep_from, run_sweep_to_file, Output, SweepOutcome, SweepSpec};
pub use table::{fmt_num, parse_num, Table};
pub use validate::{validate, Deviation, ValidationReport, VALIDATION_FLOOR, VALIDATION_TOL};
