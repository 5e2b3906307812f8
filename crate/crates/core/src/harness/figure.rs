//! Data behind the published figures, with their default parameters.

use std::fmt;
use std::str::FromStr;

use super::config::linspace;
use super::sweep::{observables, run_sweep, Output, SweepSpec};
use super::table::{fmt_num, Table};
use crate::closedform::{linewidth_leading, pole_distance_leading};
use crate::error::{Error, Result};
use crate::meanfield::steady_state;
use crate::model::{ModelParams, ScenarioKind};
use crate::spectral::{regression_system, resolvent_spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    /// Peak separation against detuning, common cavity.
    PullingCurve,
    /// Correlation maps over the (w, δ) plane.
    SyncContours,
    /// Cascaded spectra for a few detunings.
    SpectrumInset,
    /// Cascaded spectral density at the master frequency against detuning.
    PlateauCurve,
    /// Leading-order linewidths, quantum against classical symmetric coupling.
    LinewidthComparison,
    /// Peak separation against detuning, classical symmetric coupling.
    ClassicalPoleDistance,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [
        FigureId::PullingCurve,
        FigureId::SyncContours,
        FigureId::SpectrumInset,
        FigureId::PlateauCurve,
        FigureId::LinewidthComparison,
        FigureId::ClassicalPoleDistance,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            FigureId::PullingCurve => "pulling-curve",
            FigureId::SyncContours => "sync-contours",
            FigureId::SpectrumInset => "spectrum-inset",
            FigureId::PlateauCurve => "plateau-curve",
            FigureId::LinewidthComparison => "linewidth-comparison",
            FigureId::ClassicalPoleDistance => "classical-pole-distance",
        }
    }

    /// Scenarios the figure may be drawn for; the first is the default.
    pub fn scenarios(self) -> &'static [ScenarioKind] {
        use ScenarioKind::*;
        match self {
            FigureId::PullingCurve => &[BiQuantum],
            FigureId::SyncContours => &[BiQuantum, UniQuantum, UniClassical, BiClassical],
            FigureId::SpectrumInset | FigureId::PlateauCurve => &[UniQuantum, UniClassical],
            FigureId::LinewidthComparison => &[BiQuantum, BiClassical],
            FigureId::ClassicalPoleDistance => &[BiClassical],
        }
    }

    /// Physical `Nγ` of the figure, Hz.
    pub fn n_gamma(self) -> f64 {
        match self {
            FigureId::SpectrumInset | FigureId::PlateauCurve => 1e4,
            _ => 1e6,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        FigureId::ALL
            .into_iter()
            .find(|f| f.tag() == norm || f.tag().replace('-', "") == norm)
            .ok_or_else(|| Error::Unknown {
                what: "figure",
                name: s.to_string(),
            })
    }
}

/// Overrides of the baked-in figure parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FigureParams {
    pub scenario: Option<ScenarioKind>,
    pub n_atoms: Option<u64>,
    /// Units of `Nγ`.
    pub pump: Option<f64>,
    pub xi: Option<f64>,
    /// Points per grid axis.
    pub points: Option<usize>,
    pub parallelism: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureJob {
    pub id: FigureId,
    pub params: FigureParams,
}

impl FigureJob {
    pub fn new(id: FigureId) -> Self {
        FigureJob {
            id,
            params: FigureParams::default(),
        }
    }

    pub fn scenario(&self) -> Result<ScenarioKind> {
        let allowed = self.id.scenarios();
        match self.params.scenario {
            None => Ok(allowed[0]),
            Some(k) if allowed.contains(&k) => Ok(k),
            Some(k) => Err(Error::InvalidParams(format!("figure {} cannot be drawn for {k}", self.id))),
        }
    }

    fn n_atoms(&self) -> u64 {
        self.params.n_atoms.unwrap_or(10_000)
    }

    fn pump(&self) -> f64 {
        self.params.pump.unwrap_or(0.5)
    }

    fn xi(&self, kind: ScenarioKind) -> f64 {
        match (self.id, kind) {
            (FigureId::ClassicalPoleDistance, _) => self.params.xi.unwrap_or(0.9),
            (_, ScenarioKind::BiClassical) => self.params.xi.unwrap_or(0.6),
            _ => 0.0,
        }
    }

    fn points(&self, default: usize) -> usize {
        self.params.points.unwrap_or(default)
    }

    fn params(&self, kind: ScenarioKind, w: f64, delta: f64) -> Result<ModelParams> {
        ModelParams::with_feedback(kind, self.n_atoms(), 1.0, w, delta, self.xi(kind))
    }

    fn header(&self, kind: ScenarioKind, columns: Vec<String>) -> Table {
        let mut t = Table::new(columns);
        t.meta("figure", self.id)
            .meta("scenario", kind)
            .meta("n_atoms", self.n_atoms())
            .meta("n_gamma_hz", fmt_num(self.id.n_gamma()));
        if kind == ScenarioKind::BiClassical || self.id == FigureId::LinewidthComparison {
            t.meta("xi", fmt_num(self.xi(ScenarioKind::BiClassical)));
        }
        t.meta("toolkit", format!("sync-core {}", env!("CARGO_PKG_VERSION")))
            .meta("seed_policy", "deterministic, no random numbers");
        t
    }
}

fn at_point<T>(w: f64, delta: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::PointFailed {
        w,
        delta,
        source: Box::new(e),
    })
}

/// Numeric and leading-order peak separation over a detuning grid.
fn pole_curve(job: &FigureJob) -> Result<Table> {
    let kind = job.scenario()?;
    let w = job.pump();
    let mut t = job.header(
        kind,
        vec!["delta".into(), "pole_distance".into(), "pole_distance_leading".into()],
    );
    t.meta("w", fmt_num(w)).meta("units", "Nγ");
    for d in linspace(0.0, 2.5, job.points(101)) {
        let p = job.params(kind, w, d)?;
        let ss = at_point(w, d, steady_state(kind, &p))?;
        let v = at_point(w, d, observables(kind, &p, &ss, &[Output::PoleDistance]))?;
        t.push_numbers(&[d, v[0], pole_distance_leading(&p, kind)]);
    }
    Ok(t)
}

fn normalized_spectrum(job: &FigureJob, kind: ScenarioKind, w: f64, d: f64, omega: &[f64]) -> Result<Vec<f64>> {
    let p = job.params(kind, w, d)?;
    let ss = at_point(w, d, steady_state(kind, &p))?;
    let rs = at_point(w, d, regression_system(kind, &ss, &p))?;
    Ok(resolvent_spectrum(&rs, omega))
}

pub fn run_figure(job: &FigureJob) -> Result<Table> {
    let kind = job.scenario()?;
    match job.id {
        FigureId::PullingCurve | FigureId::ClassicalPoleDistance => pole_curve(job),
        FigureId::SyncContours => {
            let n = job.points(100);
            let grid = linspace(2.5 / n as f64, 2.5, n);
            let mut outputs = vec![Output::ReAb, Output::Aa, Output::Z];
            if !kind.is_symmetric() {
                outputs.insert(2, Output::Bb);
            }
            let spec = SweepSpec {
                scenario: kind,
                n_atoms: job.n_atoms(),
                n_gamma: job.id.n_gamma(),
                xi: (kind == ScenarioKind::BiClassical).then(|| job.xi(kind)),
                w_grid: grid.clone(),
                delta_grid: grid,
                outputs,
                parallelism: job.params.parallelism.unwrap_or_else(rayon::current_num_threads),
            };
            let mut t = run_sweep(&spec)?.table;
            t.metadata.insert(0, ("figure".into(), job.id.to_string()));
            Ok(t)
        }
        FigureId::SpectrumInset => {
            let w = job.pump();
            let deltas = [1.5, 1.0, 0.5, 0.0];
            let omega = linspace(-2.0, 0.5, job.points(501));
            let mut cols = vec!["omega".to_string()];
            cols.extend(deltas.iter().map(|d| format!("s_norm_delta_{d}")));
            let mut t = job.header(kind, cols);
            t.meta("w", fmt_num(w)).meta("units", "omega in Nγ from the master frequency; s_norm in 1/Nγ");
            let curves: Vec<Vec<f64>> = deltas
                .iter()
                .map(|&d| normalized_spectrum(job, kind, w, d, &omega))
                .collect::<Result<_>>()?;
            for (i, &om) in omega.iter().enumerate() {
                let mut r = vec![om];
                r.extend(curves.iter().map(|c| c[i]));
                t.push_numbers(&r);
            }
            Ok(t)
        }
        FigureId::PlateauCurve => {
            let w = job.pump();
            let mut t = job.header(kind, vec!["delta".into(), "s_norm_at_master".into()]);
            t.meta("w", fmt_num(w)).meta("units", "delta in Nγ; s_norm in 1/Nγ");
            for d in linspace(0.0, 1.5, job.points(61)) {
                let s = normalized_spectrum(job, kind, w, d, &[0.0])?;
                t.push_numbers(&[d, s[0]]);
            }
            Ok(t)
        }
        FigureId::LinewidthComparison => {
            // superradiant for both couplings throughout w < Nγ
            let n = job.points(49);
            let ws = linspace(0.02, 0.98, n);
            let ds = linspace(0.0, 1.0, n);
            let mut t = job.header(
                kind,
                vec!["w".into(), "delta".into(), "linewidth_quantum".into(), "linewidth_classical".into()],
            );
            t.meta("units", "w, delta in Nγ; linewidths as full width over γ, leading order");
            for &w in &ws {
                for &d in &ds {
                    let q = job.params(ScenarioKind::BiQuantum, w, d)?;
                    let c = job.params(ScenarioKind::BiClassical, w, d)?;
                    let gq = linewidth_leading(ScenarioKind::BiQuantum, &q)[0].width.at(q.n());
                    let gc = linewidth_leading(ScenarioKind::BiClassical, &c)[0].width.at(c.n());
                    t.push_numbers(&[w, d, gq, gc]);
                }
            }
            Ok(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse() {
        for f in FigureId::ALL {
            assert_eq!(f.tag().parse::<FigureId>().unwrap(), f);
        }
        assert_eq!("PullingCurve".parse::<FigureId>().unwrap(), FigureId::PullingCurve);
        assert!("fig99".parse::<FigureId>().is_err());
    }

    #[test]
    fn scenario_must_suit_the_figure() {
        let mut job = FigureJob::new(FigureId::PlateauCurve);
        assert_eq!(job.scenario().unwrap(), ScenarioKind::UniQuantum);
        job.params.scenario = Some(ScenarioKind::BiQuantum);
        assert!(job.scenario().is_err());
    }

    #[test]
    fn linewidth_comparison_classical_is_wider() {
        let mut job = FigureJob::new(FigureId::LinewidthComparison);
        job.params.points = Some(15);
        let t = run_figure(&job).unwrap();
        let q = t.numbers("linewidth_quantum").unwrap();
        let c = t.numbers("linewidth_classical").unwrap();
        assert_eq!(q.len(), 225);
        assert!(q.iter().zip(&c).all(|(q, c)| c >= q));
    }

    #[test]
    fn classical_pole_distance_is_critical_at_w_xi() {
        let mut job = FigureJob::new(FigureId::ClassicalPoleDistance);
        job.params.points = Some(51);
        let t = run_figure(&job).unwrap();
        let d = t.numbers("delta").unwrap();
        let lead = t.numbers("pole_distance_leading").unwrap();
        // last grid point with zero separation sits just below 0.45
        let last_zero = d.iter().zip(&lead).filter(|(_, l)| **l == 0.0).map(|(d, _)| *d).fold(0.0, f64::max);
        assert!(last_zero <= 0.45 && last_zero > 0.45 - 0.05 - 1e-12);
    }
}
