use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::liouvillian::Liouvillian;
use super::space::{Ensemble, Layout};
use crate::error::{Error, Result};
use crate::model::CorrelationState;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = -1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: DMatrix<Complex64>,
}

/// Worst-case deviations from a physical state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    pub fn ok(&self) -> bool {
        self.hermiticity <= HERMITICITY_TOL && self.trace_error <= TRACE_TOL && self.min_eigenvalue >= POSITIVITY_TOL
    }
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn maximally_mixed(layout: &Layout) -> Self {
        let d = layout.dim();
        DensityMatrix {
            entries: DMatrix::identity(d, d) / Complex64::from(d as f64),
        }
    }

    /// Pure basis state `|idx⟩⟨idx|`.
    pub fn basis(layout: &Layout, idx: usize) -> Self {
        let mut entries = DMatrix::zeros(layout.dim(), layout.dim());
        entries[(idx, idx)] = Complex64::from(1.0);
        DensityMatrix { entries }
    }

    /// All atoms excited, cavities empty.
    pub fn all_excited(layout: &Layout) -> Self {
        Self::basis(layout, (1usize << layout.n_atoms_total()) - 1)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn report(&self) -> InvariantReport {
        let herm = (&self.entries - self.entries.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let h = (&self.entries + self.entries.adjoint()) * Complex64::from(0.5);
        let min_eig = h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        InvariantReport {
            hermiticity: herm,
            trace_error: (self.trace() - Complex64::from(1.0)).norm(),
            min_eigenvalue: min_eig,
        }
    }

    pub fn check(&self) -> Result<InvariantReport> {
        let r = self.report();
        if r.ok() {
            Ok(r)
        } else {
            Err(Error::InvariantViolation(format!(
                "hermiticity {:.3e}, trace error {:.3e}, min eigenvalue {:.3e}",
                r.hermiticity, r.trace_error, r.min_eigenvalue
            )))
        }
    }

    pub(crate) fn from_sector(l: &Liouvillian, v: &DVector<Complex64>) -> Self {
        let d = l.layout.dim();
        let mut entries = DMatrix::zeros(d, d);
        for (p, &(i, j)) in l.pairs.iter().enumerate() {
            entries[(i, j)] = v[p];
        }
        DensityMatrix { entries }
    }

    pub(crate) fn to_sector(&self, l: &Liouvillian) -> Result<DVector<Complex64>> {
        let d = self.dim();
        let mut outside = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if l.position(i, j).is_none() {
                    outside = outside.max(self.entries[(i, j)].norm());
                }
            }
        }
        if outside > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "state has coherence {outside:.3e} between different excitation numbers"
            )));
        }
        Ok(DVector::from_iterator(
            l.dim(),
            l.pairs.iter().map(|&(i, j)| self.entries[(i, j)]),
        ))
    }

    fn hermitize(&mut self) {
        self.entries = (&self.entries + self.entries.adjoint()) * Complex64::from(0.5);
    }

    /// `⟨σ⁺_i σ⁻_j⟩`.
    pub fn dipole_correlation(&self, layout: &Layout, i: usize, j: usize) -> Complex64 {
        let (bi, bj) = (1usize << i, 1usize << j);
        let mut acc = Complex64::default();
        for k in 0..self.dim() {
            if k & bj == 0 {
                continue;
            }
            let lowered = k ^ bj;
            if lowered & bi != 0 {
                continue;
            }
            // Tr(Oρ) = Σ_k ρ[k, O(k)]
            acc += self.entries[(k, lowered | bi)];
        }
        let _ = layout;
        acc
    }

    pub fn sigma_z(&self, atom: usize) -> f64 {
        let bit = 1usize << atom;
        (0..self.dim())
            .map(|k| {
                let p = self.entries[(k, k)].re;
                if k & bit != 0 {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }

    /// Population held by the top two Fock levels of any cavity mode.
    pub fn top_fock_population(&self, layout: &Layout) -> f64 {
        if layout.cavity_modes() == 0 {
            return 0.0;
        }
        let cut = layout.max_photons().saturating_sub(1);
        (0..self.dim())
            .filter(|&k| (0..layout.cavity_modes()).any(|m| layout.photons(k, m) >= cut))
            .map(|k| self.entries[(k, k)].re)
            .sum()
    }
}

fn agree(values: &[Complex64], what: &str) -> Result<Complex64> {
    let first = values[0];
    for v in values {
        if (v - first).norm() > 1e-10 {
            return Err(Error::SymmetryViolation(format!(
                "{what}: {first} vs {v} for different atom choices"
            )));
        }
    }
    Ok(values.iter().sum::<Complex64>() / values.len() as f64)
}

/// Cumulant-level observables of an exact state, checking exchange symmetry.
pub fn expectations(rho: &DensityMatrix, layout: &Layout) -> Result<CorrelationState> {
    let n = layout.n_small();
    let z = |ens| -> Result<f64> {
        let vals: Vec<Complex64> = layout.atoms_of(ens).map(|a| rho.sigma_z(a).into()).collect();
        Ok(agree(&vals, "σᶻ")?.re)
    };
    let inner = |ens| -> Result<Complex64> {
        if n < 2 {
            return Ok(Complex64::default());
        }
        let atoms: Vec<usize> = layout.atoms_of(ens).collect();
        let mut vals = Vec::new();
        for &i in &atoms {
            for &j in &atoms {
                if i != j {
                    vals.push(rho.dipole_correlation(layout, i, j));
                }
            }
        }
        agree(&vals, "inner-ensemble correlation")
    };
    let mut cross = Vec::new();
    for i in layout.atoms_of(Ensemble::A) {
        for j in layout.atoms_of(Ensemble::B) {
            cross.push(rho.dipole_correlation(layout, i, j));
        }
    }
    Ok(CorrelationState {
        z_a: z(Ensemble::A)?,
        z_b: z(Ensemble::B)?,
        aa: inner(Ensemble::A)?,
        bb: inner(Ensemble::B)?,
        ab: agree(&cross, "inter-ensemble correlation")?,
    })
}

/// Unique normalized null vector of `l`.
pub fn steady_state_exact(l: &Liouvillian) -> Result<DensityMatrix> {
    let n = l.dim();
    let d = l.layout.dim();
    let row = l.position(0, 0).expect("ground projector lies in every sector");
    let mut a = l.matrix.clone();
    for c in 0..n {
        a[(row, c)] = Complex64::default();
    }
    for k in 0..d {
        if let Some(p) = l.position(k, k) {
            a[(row, p)] = Complex64::from(1.0);
        }
    }
    let mut b = DVector::zeros(n);
    b[row] = Complex64::from(1.0);

    let lu = a.lu();
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|v| v.norm()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let solution = if min > 1e-12 * max { lu.solve(&b) } else { None };
    let Some(x) = solution else {
        return Err(degenerate(l));
    };
    let mut rho = DensityMatrix::from_sector(l, &x);
    rho.hermitize();
    let tr = rho.trace();
    rho.entries /= tr;
    rho.check()?;
    Ok(rho)
}

fn degenerate(l: &Liouvillian) -> Error {
    let mut v: Vec<Complex64> = l
        .matrix
        .clone()
        .schur()
        .eigenvalues()
        .map(|e| e.iter().copied().collect())
        .unwrap_or_default();
    if v.is_empty() {
        v.push(Complex64::default());
    }
    v.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    Error::DegenerateNullSpace(v[0], v.get(1).copied().unwrap_or_default())
}

/// `exp(L t) ρ0`.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t: f64) -> Result<DensityMatrix> {
    let v0 = rho0.to_sector(l)?;
    let prop = (&l.matrix * Complex64::from(t)).exp();
    let mut rho = DensityMatrix::from_sector(l, &(prop * v0));
    rho.check()?;
    // remove rounding-level anti-hermitian residue
    rho.hermitize();
    Ok(rho)
}
