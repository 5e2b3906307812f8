//! Parallel (w, δ) sweeps with deterministic row order.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::table::{fmt_num, Table};
use crate::error::{Error, Result};
use crate::meanfield::steady_state;
use crate::model::{ModelParams, ScenarioKind, SteadyStateResult};
use crate::spectral::{eigen_decomposition, photon_flux, regression_system};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    Z,
    Aa,
    Bb,
    ReAb,
    Flux,
    Linewidths,
    PoleDistance,
}

impl Output {
    pub const ALL: [Output; 7] = [
        Output::Z,
        Output::Aa,
        Output::Bb,
        Output::ReAb,
        Output::Flux,
        Output::Linewidths,
        Output::PoleDistance,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Output::Z => "z",
            Output::Aa => "aa",
            Output::Bb => "bb",
            Output::ReAb => "re_ab",
            Output::Flux => "flux",
            Output::Linewidths => "linewidths",
            Output::PoleDistance => "pole_distance",
        }
    }

    /// CSV columns produced for `kind`.
    pub fn columns(self, kind: ScenarioKind) -> Vec<&'static str> {
        match self {
            Output::Z if !kind.is_symmetric() => vec!["z_a", "z_b"],
            Output::Linewidths => vec!["linewidth_1", "linewidth_2"],
            o => vec![o.tag()],
        }
    }

    pub fn valid_for(self, kind: ScenarioKind) -> bool {
        // the symmetric closure has a single inner-ensemble correlation
        !(self == Output::Bb && kind.is_symmetric())
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Output {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Output::ALL.into_iter().find(|o| o.tag() == s).ok_or_else(|| Error::Unknown {
            what: "output",
            name: s.to_string(),
        })
    }
}

/// A rectangular sweep over pump and detuning, both in units of `Nγ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: ScenarioKind,
    pub n_atoms: u64,
    /// Physical value of `Nγ` in Hz; recorded, results stay in units of `Nγ`.
    pub n_gamma: f64,
    pub xi: Option<f64>,
    pub w_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub outputs: Vec<Output>,
    pub parallelism: usize,
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::InvalidParams(format!("{name} grid is empty")));
    }
    if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidParams(format!("{name} grid must be finite and strictly increasing")));
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_grid("w", &self.w_grid)?;
        check_grid("delta", &self.delta_grid)?;
        if self.w_grid[0] < 0.0 {
            return Err(Error::InvalidParams("pump grid must be nonnegative".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::InvalidParams("parallelism must be positive".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidParams("no outputs requested".into()));
        }
        if let Some(o) = self.outputs.iter().find(|o| !o.valid_for(self.scenario)) {
            return Err(Error::InvalidParams(format!("output `{o}` is not defined for {}", self.scenario)));
        }
        match (self.scenario, self.xi) {
            (ScenarioKind::BiClassical, None) => {
                return Err(Error::InvalidParams("bi-classical needs a feedback strength xi".into()))
            }
            (ScenarioKind::BiClassical, Some(_)) | (_, None) => {}
            (k, Some(_)) => return Err(Error::InvalidParams(format!("xi has no meaning for {k}"))),
        }
        // constructs once to surface parameter errors before any work
        self.params(self.w_grid[0], self.delta_grid[0])?;
        Ok(())
    }

    pub fn params(&self, w: f64, delta: f64) -> Result<ModelParams> {
        ModelParams::with_feedback(self.scenario, self.n_atoms, 1.0, w, delta, self.xi.unwrap_or(0.0))
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["w".to_string(), "delta".to_string(), "status".to_string()];
        for o in &self.outputs {
            cols.extend(o.columns(self.scenario).into_iter().map(str::to_string));
        }
        cols.push("message".to_string());
        cols
    }

    /// Metadata identifying the sweep. Parallelism is deliberately absent so
    /// that the file does not depend on it.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let list = |g: &[f64]| g.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(" ");
        let mut m = vec![
            ("scenario".to_string(), self.scenario.to_string()),
            ("n_atoms".to_string(), self.n_atoms.to_string()),
            ("n_gamma_hz".to_string(), fmt_num(self.n_gamma)),
        ];
        if let Some(xi) = self.xi {
            m.push(("xi".to_string(), fmt_num(xi)));
        }
        m.extend([
            ("w_grid".to_string(), list(&self.w_grid)),
            ("delta_grid".to_string(), list(&self.delta_grid)),
            (
                "outputs".to_string(),
                self.outputs.iter().map(|o| o.tag()).collect::<Vec<_>>().join(" "),
            ),
            (
                "units".to_string(),
                "w, delta, pole_distance in Nγ; linewidths as full width over γ; flux over N·Nγ".to_string(),
            ),
            ("toolkit".to_string(), format!("sync-core {}", env!("CARGO_PKG_VERSION"))),
            ("seed_policy".to_string(), "deterministic, no random numbers".to_string()),
        ]);
        m
    }

    /// Points in output order: δ varies fastest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.w_grid
            .iter()
            .flat_map(|&w| self.delta_grid.iter().map(move |&d| (w, d)))
            .collect()
    }
}

/// Observables at one stable steady state, in the units of [`SweepSpec`].
pub fn observables(kind: ScenarioKind, p: &ModelParams, ss: &SteadyStateResult, outputs: &[Output]) -> Result<Vec<f64>> {
    let mut v = Vec::new();
    let mut eig = None;
    for o in outputs {
        match o {
            Output::Z if kind.is_symmetric() => v.push(ss.state.z_a),
            Output::Z => v.extend([ss.state.z_a, ss.state.z_b]),
            Output::Aa => v.push(ss.state.aa.re),
            Output::Bb => v.push(ss.state.bb.re),
            Output::ReAb => v.push(ss.state.ab.re),
            Output::Flux => v.push(photon_flux(kind, ss, p)? / (p.n() * p.collective_rate())),
            Output::Linewidths | Output::PoleDistance => {
                if eig.is_none() {
                    let rs = regression_system(kind, ss, p)?;
                    let (mut l, _) = eigen_decomposition(&rs.matrix);
                    l.sort_by(|a, b| a.im.total_cmp(&b.im));
                    eig = Some(l);
                }
                let l = eig.expect("filled above");
                if *o == Output::Linewidths {
                    v.extend(l.iter().map(|e| -2.0 * e.re / p.gamma()));
                } else {
                    v.push((l[1].im - l[0].im).abs() / p.collective_rate());
                }
            }
        }
    }
    Ok(v)
}

/// One sweep point.
pub fn evaluate_point(spec: &SweepSpec, w: f64, delta: f64) -> Result<Vec<f64>> {
    let p = spec.params(w, delta)?;
    let ss = steady_state(spec.scenario, &p)?;
    observables(spec.scenario, &p, &ss, &spec.outputs)
}

fn row(spec: &SweepSpec, w: f64, delta: f64) -> Vec<String> {
    let width: usize = spec.outputs.iter().map(|o| o.columns(spec.scenario).len()).sum();
    let mut r = vec![fmt_num(w), fmt_num(delta)];
    match evaluate_point(spec, w, delta) {
        Ok(vals) => {
            r.push("ok".into());
            r.extend(vals.iter().map(|&x| fmt_num(x)));
            r.push(String::new());
        }
        Err(e) => {
            r.push("failed".into());
            r.extend(std::iter::repeat_n(String::new(), width));
            r.push(e.to_string());
        }
    }
    r
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub table: Table,
    /// Points evaluated in this call (zero for a completed resume).
    pub computed: usize,
    pub failed: usize,
}

impl SweepOutcome {
    pub fn all_failed(&self) -> bool {
        !self.table.rows.is_empty() && self.failed == self.table.rows.len()
    }
}

fn status_col(t: &Table) -> usize {
    t.column("status").expect("sweep tables carry a status column")
}

fn run_points(spec: &SweepSpec, todo: &[(f64, f64)]) -> Result<Vec<Vec<String>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| todo.par_iter().map(|&(w, d)| row(spec, w, d)).collect()))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    run_sweep_from(spec, None)
}

/// Runs the points missing from `previous` (a table written by an earlier
/// run of the same spec) and merges everything in grid order.
pub fn run_sweep_from(spec: &SweepSpec, previous: Option<&Table>) -> Result<SweepOutcome> {
    spec.validate()?;
    let columns = spec.columns();
    let mut done: HashMap<(String, String), Vec<String>> = HashMap::new();
    if let Some(prev) = previous {
        if prev.metadata != spec.metadata() {
            return Err(Error::ResumeMismatch("metadata of the existing file differs from the sweep".into()));
        }
        if prev.columns != columns {
            return Err(Error::ResumeMismatch("column layout of the existing file differs".into()));
        }
        for r in &prev.rows {
            done.insert((r[0].clone(), r[1].clone()), r.clone());
        }
    }
    let points = spec.points();
    let todo: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(w, d)| !done.contains_key(&(fmt_num(w), fmt_num(d))))
        .collect();
    let fresh = run_points(spec, &todo)?;
    for r in fresh {
        done.insert((r[0].clone(), r[1].clone()), r);
    }

    let mut table = Table::new(columns);
    table.metadata = spec.metadata();
    for (w, d) in points {
        let r = done.remove(&(fmt_num(w), fmt_num(d))).expect("every point computed");
        table.push(r);
    }
    let sc = status_col(&table);
    let failed = table.rows.iter().filter(|r| r[sc] != "ok").count();
    Ok(SweepOutcome {
        table,
        computed: todo.len(),
        failed,
    })
}

/// Runs a sweep into `path`. With `resume`, an existing file is reused and
/// left untouched when it is already complete.
pub fn run_sweep_to_file(spec: &SweepSpec, path: &Path, resume: bool) -> Result<SweepOutcome> {
    let previous = if resume && path.exists() { Some(Table::read(path)?) } else { None };
    let outcome = run_sweep_from(spec, previous.as_ref())?;
    if outcome.computed > 0 || previous.is_none() {
        outcome.table.write(path)?;
    }
    Ok(outcome)
}
