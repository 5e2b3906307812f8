//! Dormand–Prince 5(4) time marching of the real-ified cumulant equations.

use crate::error::{Error, Result};
use crate::model::{CorrelationState, ModelParams};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Constant step (the last step is shortened to land on `t_final`).
    Fixed(f64),
    Adaptive { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub control: StepControl,
    /// Keep every accepted step rather than only the endpoints.
    pub record_all: bool,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            control: StepControl::Adaptive {
                rtol: 1e-8,
                atol: 1e-10,
            },
            record_all: false,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CorrelationState>,
    /// Euclidean norm of the real-ified rhs at the final state.
    pub final_rhs_norm: f64,
}

impl Trajectory {
    pub fn last(&self) -> &CorrelationState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// error weights b − b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &[f64], terms: &[(f64, &[f64])], h: f64) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += h * c * v;
        }
    }
    out
}

/// One DP step: returns (y_new, k7 = f(y_new), error estimate).
fn dp_step(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    y: &[f64],
    k1: &[f64],
    h: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let k2 = f(&axpy(y, &[(A21, k1)], h));
    let k3 = f(&axpy(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = f(&axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
    let k5 = f(&axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = f(&axpy(
        y,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        h,
    ));
    let y_new = axpy(y, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = f(&y_new);
    let err = (0..y.len())
        .map(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
        .collect();
    (y_new, k7, err)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integrates from `s0` at `t = 0` to `t_final` (time in inverse units of
/// the parameter rates).
pub fn integrate(
    scenario: &dyn Scenario,
    p: &ModelParams,
    s0: &CorrelationState,
    t_final: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidParams(format!("t_final = {t_final}")));
    }
    let f = |x: &[f64]| scenario.rhs(p, x);
    let rate_scale = p.collective_rate() + p.pump() + p.detuning().abs();
    let mut y = scenario.pack(s0);
    let mut k1 = f(&y);
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![*s0];

    let mut h = match opts.control {
        StepControl::Fixed(dt) => {
            if !(dt > 0.0) {
                return Err(Error::InvalidParams(format!("fixed step {dt}")));
            }
            dt
        }
        StepControl::Adaptive { .. } => (1e-3 / rate_scale).min(t_final.max(f64::MIN_POSITIVE)),
    };
    let h_min = 1e-14 * t_final.max(1.0 / rate_scale);

    let mut steps = 0usize;
    while t < t_final {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepUnderflow {
                t,
                component: worst_component(scenario, &k1),
            });
        }
        let last = t + h >= t_final;
        let step = if last { t_final - t } else { h };
        let (y_new, k7, err) = dp_step(&f, &y, &k1, step);
        match opts.control {
            StepControl::Fixed(_) => {
                t = if last { t_final } else { t + step };
                y = y_new;
                k1 = k7;
            }
            StepControl::Adaptive { rtol, atol } => {
                let mut worst = 0.0f64;
                let mut worst_idx = 0;
                for i in 0..y.len() {
                    let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
                    let e = (err[i] / sc).abs();
                    if !(e <= worst) {
                        worst = e;
                        worst_idx = i;
                    }
                }
                if worst.is_nan() || !y_new.iter().all(|v| v.is_finite()) {
                    worst = f64::INFINITY;
                }
                if worst <= 1.0 {
                    t = if last { t_final } else { t + step };
                    y = y_new;
                    k1 = k7;
                    let factor = if worst == 0.0 { 5.0 } else { (0.9 * worst.powf(-0.2)).clamp(0.2, 5.0) };
                    h = step * factor;
                } else {
                    let factor = if worst.is_finite() { (0.9 * worst.powf(-0.2)).max(0.1) } else { 0.1 };
                    h = step * factor;
                    if h < h_min {
                        return Err(Error::StepUnderflow {
                            t,
                            component: scenario.component_names()[worst_idx],
                        });
                    }
                    continue;
                }
            }
        }
        if opts.record_all || t >= t_final {
            times.push(t);
            states.push(scenario.unpack(&y));
        }
    }
    Ok(Trajectory {
        final_rhs_norm: norm(&k1),
        times,
        states,
    })
}

fn worst_component(scenario: &dyn Scenario, k: &[f64]) -> &'static str {
    let idx = k
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    scenario.component_names()[idx]
}
