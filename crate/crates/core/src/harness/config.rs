//! `key = value` sweep configuration files.
//!
//! ```text
//! # synchronized region of the common-cavity setup
//! scenario = bi-quantum
//! n_atoms  = 10000
//! n_gamma  = 1 MHz
//! w        = linspace(0.025, 2.5, 100)
//! delta    = 0, 0.5, 1.0
//! outputs  = re_ab, aa, z
//! jobs     = 8
//! ```
//!
//! Grids are in units of `Nγ`.

use std::str::FromStr;

use super::sweep::{Output, SweepSpec};
use crate::error::{Error, Result};
use crate::model::ScenarioKind;

/// Frequency with an optional `Hz`, `kHz`, `MHz` or `GHz` suffix; bare
/// numbers are taken as Hz.
pub fn parse_frequency(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let split = t
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let value: f64 = num.trim().parse().map_err(|_| format!("bad frequency `{t}`"))?;
    let factor = match unit.trim() {
        "" | "Hz" | "hz" => 1.0,
        "kHz" | "khz" => 1e3,
        "MHz" | "mhz" => 1e6,
        "GHz" | "ghz" => 1e9,
        other => return Err(format!("unknown frequency unit `{other}`")),
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("frequency must be positive, got `{t}`"));
    }
    Ok(value * factor)
}

/// `linspace(a, b, n)` or a comma separated list.
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err("linspace takes (start, stop, count)".into());
        }
        let a: f64 = parts[0].parse().map_err(|_| format!("bad number `{}`", parts[0]))?;
        let b: f64 = parts[1].parse().map_err(|_| format!("bad number `{}`", parts[1]))?;
        let n: usize = parts[2].parse().map_err(|_| format!("bad count `{}`", parts[2]))?;
        return Ok(linspace(a, b, n));
    }
    t.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", v.trim())))
        .collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn parse_sweep_config(text: &str) -> Result<SweepSpec> {
    let mut scenario = None;
    let mut n_atoms = 10_000u64;
    let mut n_gamma = 1e6;
    let mut xi = None;
    let mut w_grid = None;
    let mut delta_grid = None;
    let mut outputs = None;
    let mut parallelism = 1usize;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| Error::Config { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let value = value.trim();
        match key.trim() {
            "scenario" => scenario = Some(ScenarioKind::from_str(value).map_err(|e| err(e.to_string()))?),
            "n_atoms" | "n" => {
                n_atoms = value
                    .replace('_', "")
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0 && *v >= 1.0)
                    .map(|v| v as u64)
                    .ok_or_else(|| err(format!("bad atom number `{value}`")))?
            }
            "n_gamma" => n_gamma = parse_frequency(value).map_err(err)?,
            "xi" => xi = Some(value.parse().map_err(|_| err(format!("bad ξ `{value}`")))?),
            "w" => w_grid = Some(parse_grid(value).map_err(err)?),
            "delta" => delta_grid = Some(parse_grid(value).map_err(err)?),
            "outputs" => {
                outputs = Some(
                    value
                        .split(',')
                        .map(|o| Output::from_str(o.trim()))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| err(e.to_string()))?,
                )
            }
            "jobs" | "parallelism" => {
                parallelism = value.parse().map_err(|_| err(format!("bad job count `{value}`")))?
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    let missing = |what: &str| Error::Config {
        line: 0,
        message: format!("missing `{what}`"),
    };
    let spec = SweepSpec {
        scenario: scenario.ok_or_else(|| missing("scenario"))?,
        n_atoms,
        n_gamma,
        xi,
        w_grid: w_grid.ok_or_else(|| missing("w"))?,
        delta_grid: delta_grid.ok_or_else(|| missing("delta"))?,
        outputs: outputs.unwrap_or_else(|| vec![Output::Z, Output::Aa, Output::ReAb]),
        parallelism,
    };
    spec.validate()?;
    Ok(spec)
}
