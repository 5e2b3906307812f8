//! Two-time dipole correlations, Lorentzian spectra and photon flux.
//!
//! The cavity-field correlation `g(τ) = ⟨a†(τ) a(0)⟩` obeys the linear
//! regression dynamics `ẋ = M x`, so `g(τ) = weightsᵀ exp(Mτ) initial`. Each
//! eigenvalue `λ = −h + i c` contributes a Lorentzian centred at `c` with
//! half width `h`; `S(ω) = Re ∫₀^∞ e^{−iωτ} g(τ) dτ`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, ScenarioKind, SteadyStateResult};
use crate::scenario::builtin;

/// Relative eigenvalue gap below which the regression matrix is treated as
/// defective.
pub const DEFECT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionSystem {
    pub matrix: Matrix2<Complex64>,
    pub initial: Vector2<Complex64>,
    pub weights: Vector2<Complex64>,
}

impl RegressionSystem {
    /// `g(0)`, which equals the leading-order photon flux.
    pub fn zero_delay(&self) -> Complex64 {
        self.weights.dot(&self.initial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralComponent {
    pub center: f64,
    pub half_width: f64,
    pub weight: Complex64,
}

impl SpectralComponent {
    /// Unnormalized Lorentzian value at `omega`.
    pub fn value(&self, omega: f64) -> f64 {
        (self.weight / Complex64::new(self.half_width, omega - self.center)).re
    }
}

pub fn regression_system(
    kind: ScenarioKind,
    steady: &SteadyStateResult,
    p: &ModelParams,
) -> Result<RegressionSystem> {
    if !steady.stable {
        return Err(Error::UnstableSteadyState);
    }
    Ok(builtin(kind).regression_system(&steady.state, p))
}

/// Eigenvalues and unit eigenvectors (columns) of a 2×2 complex matrix.
pub fn eigen_decomposition(m: &Matrix2<Complex64>) -> ([Complex64; 2], Matrix2<Complex64>) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half_tr = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
    let lambda = [half_tr + disc, half_tr - disc];
    let vec_for = |l: Complex64| {
        // two candidate null vectors of (m − l); keep the larger one
        let v1 = Vector2::new(b, l - a);
        let v2 = Vector2::new(l - d, c);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        if v.norm() == 0.0 {
            // m = l·I on this eigenspace
            if lambda[0] == l {
                Vector2::new(1.0.into(), 0.0.into())
            } else {
                Vector2::new(0.0.into(), 1.0.into())
            }
        } else {
            v / Complex64::from(v.norm())
        }
    };
    let v0 = vec_for(lambda[0]);
    let v1 = vec_for(lambda[1]);
    (lambda, Matrix2::from_columns(&[v0, v1]))
}

/// Lorentzian decomposition of the field spectrum.
///
/// `scale` is the collective rate `Nγ`; it sets the defect threshold.
pub fn components(rs: &RegressionSystem, scale: f64) -> Result<Vec<SpectralComponent>> {
    let (lambda, v) = eigen_decomposition(&rs.matrix);
    let gap = (lambda[0] - lambda[1]).norm();
    if gap < DEFECT_TOLERANCE * scale {
        return Err(Error::NearDefective { gap });
    }
    let vinv = v
        .try_inverse()
        .ok_or(Error::NearDefective { gap })?;
    let a = vinv * rs.initial;
    Ok((0..2)
        .map(|k| {
            let weight = rs.weights.dot(&v.column(k)) * a[k];
            SpectralComponent {
                center: lambda[k].im,
                half_width: -lambda[k].re,
                weight,
            }
        })
        .collect())
}

/// Sampled spectrum with its normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub raw: Vec<f64>,
    /// `raw / (π I)`, integrating to one over the real line.
    pub normalized: Vec<f64>,
    /// Total intensity `I = Σ Re weight = g(0)`.
    pub intensity: f64,
}

pub fn intensity(comps: &[SpectralComponent]) -> f64 {
    comps.iter().map(|c| c.weight.re).sum()
}

/// Normalized spectral density at one frequency.
pub fn spectrum_at(comps: &[SpectralComponent], omega: f64) -> f64 {
    let raw: f64 = comps.iter().map(|c| c.value(omega)).sum();
    raw / (PI * intensity(comps))
}

pub fn spectrum(comps: &[SpectralComponent], omega_grid: &[f64]) -> Spectrum {
    let i = intensity(comps);
    let raw: Vec<f64> = omega_grid
        .iter()
        .map(|&w| comps.iter().map(|c| c.value(w)).sum())
        .collect();
    let normalized = raw.iter().map(|r| r / (PI * i)).collect();
    Spectrum {
        omega: omega_grid.to_vec(),
        raw,
        normalized,
        intensity: i,
    }
}

/// Normalized spectrum straight from the resolvent, `wᵀ (iω − M)⁻¹ x₀`.
/// Needs no eigenvectors, so it stays exact at the exceptional point where
/// the Lorentzian decomposition breaks down.
pub fn resolvent_spectrum(rs: &RegressionSystem, omega_grid: &[f64]) -> Vec<f64> {
    let i = rs.zero_delay().re;
    omega_grid
        .iter()
        .map(|&w| {
            let shifted = Matrix2::from_diagonal_element(Complex64::new(0.0, w)) - rs.matrix;
            let x = shifted.lu().solve(&rs.initial).unwrap_or_else(|| Vector2::repeat(Complex64::from(f64::NAN)));
            rs.weights.dot(&x).re / (PI * i)
        })
        .collect()
}

/// `g(τ)` on a uniform grid starting at `tau_grid[0]`, by repeated
/// application of the one-step propagator.
pub fn correlation_function(rs: &RegressionSystem, tau_grid: &[f64]) -> Vec<Complex64> {
    if tau_grid.is_empty() {
        return Vec::new();
    }
    let mut x = (rs.matrix * Complex64::from(tau_grid[0])).exp() * rs.initial;
    let step = if tau_grid.len() > 1 {
        (rs.matrix * Complex64::from(tau_grid[1] - tau_grid[0])).exp()
    } else {
        Matrix2::identity()
    };
    let mut out = Vec::with_capacity(tau_grid.len());
    for _ in tau_grid {
        out.push(rs.weights.dot(&x));
        x = step * x;
    }
    out
}

/// Normalized spectrum from an FFT of `g(τ)` sampled at `n` points spaced
/// `dtau`. Returns frequencies in ascending order; the bin width is
/// `2π / (n · dtau)`.
pub fn fft_spectrum(rs: &RegressionSystem, n: usize, dtau: f64) -> (Vec<f64>, Vec<f64>) {
    let tau: Vec<f64> = (0..n).map(|k| k as f64 * dtau).collect();
    let g = correlation_function(rs, &tau);
    let mut buf = g.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let i = g[0].re;
    let dw = 2.0 * PI / (n as f64 * dtau);
    let mut pairs: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(m, f)| {
            let idx = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            // trapezoid end correction at τ = 0
            let integral = (*f - 0.5 * g[0]) * dtau;
            (idx * dw, integral.re / (PI * i))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Leading-order photon flux at a stable steady state.
pub fn photon_flux(kind: ScenarioKind, steady: &SteadyStateResult, p: &ModelParams) -> Result<f64> {
    if !steady.stable {
        return Err(Error::UnstableSteadyState);
    }
    let value = builtin(kind).photon_flux(&steady.state, p);
    let scale = p.n() * p.collective_rate();
    if value < -1e-9 * scale {
        return Err(Error::NegativeFlux { value });
    }
    Ok(value.max(0.0))
}

/// Distance between the outermost component centers.
pub fn peak_separation(comps: &[SpectralComponent]) -> f64 {
    let lo = comps.iter().map(|c| c.center).fold(f64::INFINITY, f64::min);
    let hi = comps.iter().map(|c| c.center).fold(f64::NEG_INFINITY, f64::max);
    if comps.len() < 2 {
        0.0
    } else {
        hi - lo
    }
}
