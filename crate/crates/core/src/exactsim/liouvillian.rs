//! Dense superoperator assembly.
//!
//! `L(ρ) = −i[H, ρ] + Σ rate · D[C]ρ` with `D[C]ρ = CρC† − ½{C†C, ρ}`. Every
//! term shifts the total excitation number of ket and bra alike, so the
//! sector with equal ket and bra excitation (which holds the steady state) is
//! invariant and is assembled on its own.

use num_complex::Complex64;

use super::space::{Layout, Op};
use crate::error::{Error, Result};

/// Upper bound on the assembled superoperator dimension.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
pub struct Collapse {
    pub rate: f64,
    pub op: Op,
    /// Thermal occupation: `rate(1+n̄) D[op] + rate n̄ D[op†]`.
    pub thermal: f64,
}

#[derive(Debug, Clone)]
pub struct LindbladSpec {
    pub hamiltonian: Op,
    pub collapse: Vec<Collapse>,
}

impl LindbladSpec {
    pub fn new(dim: usize) -> Self {
        LindbladSpec {
            hamiltonian: Op::zeros(dim, dim),
            collapse: Vec::new(),
        }
    }

    pub fn add_collapse(&mut self, rate: f64, op: Op) {
        self.add_thermal(rate, op, 0.0);
    }

    pub fn add_thermal(&mut self, rate: f64, op: Op, thermal: f64) {
        self.collapse.push(Collapse { rate, op, thermal });
    }

    /// Incoherent repumping `w D[σ⁺]` on every atom.
    pub fn add_pump(&mut self, layout: &Layout, w: f64) {
        if w > 0.0 {
            for atom in 0..layout.n_atoms_total() {
                self.add_collapse(w, layout.sigma_plus(atom));
            }
        }
    }

    /// Plain `(rate, C)` channels with thermal terms expanded.
    pub fn jumps(&self) -> Vec<(f64, Op)> {
        let mut out = Vec::new();
        for c in &self.collapse {
            if c.rate <= 0.0 {
                continue;
            }
            out.push((c.rate * (1.0 + c.thermal), c.op.clone()));
            if c.thermal > 0.0 {
                out.push((c.rate * c.thermal, c.op.adjoint()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// The whole operator space.
    Full,
    /// Operators `|i⟩⟨j|` with equal excitation in `i` and `j`.
    Balanced,
}

/// Superoperator restricted to a sector of the operator basis.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub matrix: nalgebra::DMatrix<Complex64>,
    /// Basis pairs `(i, j)` for `|i⟩⟨j|`, in matrix order.
    pub pairs: Vec<(usize, usize)>,
    pub layout: Layout,
    position: Vec<usize>,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    /// Position of `|i⟩⟨j|` in the sector basis.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let p = self.position[i * self.layout.dim() + j];
        (p != usize::MAX).then_some(p)
    }
}

fn columns(op: &Op) -> Vec<Vec<(usize, Complex64)>> {
    (0..op.ncols())
        .map(|k| {
            op.column(k)
                .iter()
                .enumerate()
                .filter(|(_, v)| v.norm() > 0.0)
                .map(|(i, v)| (i, *v))
                .collect()
        })
        .collect()
}

pub fn sector_pairs(layout: &Layout, sector: Sector) -> Vec<(usize, usize)> {
    let d = layout.dim();
    let mut pairs = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if sector == Sector::Full || layout.excitation(i) == layout.excitation(j) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

pub fn assemble(spec: &LindbladSpec, layout: &Layout, sector: Sector) -> Result<Liouvillian> {
    let d = layout.dim();
    let pairs = sector_pairs(layout, sector);
    if pairs.len() > DENSE_LIMIT {
        return Err(Error::DimensionOverflow {
            dim: pairs.len(),
            limit: DENSE_LIMIT,
        });
    }
    let mut position = vec![usize::MAX; d * d];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        position[i * d + j] = p;
    }

    let jumps = spec.jumps();
    let mut k_eff = &spec.hamiltonian * Complex64::new(0.0, -1.0);
    for (rate, c) in &jumps {
        k_eff -= (c.adjoint() * c) * Complex64::from(0.5 * rate);
    }
    let k_cols = columns(&k_eff);
    let jump_cols: Vec<(f64, Vec<Vec<(usize, Complex64)>>)> =
        jumps.iter().map(|(r, c)| (*r, columns(c))).collect();

    let n = pairs.len();
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    let mut leak = 0.0f64;
    let mut put = |m: &mut nalgebra::DMatrix<Complex64>, i: usize, j: usize, col: usize, v: Complex64| {
        let p = position[i * d + j];
        if p == usize::MAX {
            leak = leak.max(v.norm());
        } else {
            m[(p, col)] += v;
        }
    };
    for (col, &(k, l)) in pairs.iter().enumerate() {
        // K ρ + ρ K†
        for &(i, v) in &k_cols[k] {
            put(&mut m, i, l, col, v);
        }
        for &(j, v) in &k_cols[l] {
            put(&mut m, k, j, col, v.conj());
        }
        // C ρ C†
        for (rate, cols) in &jump_cols {
            for &(i, a) in &cols[k] {
                for &(j, b) in &cols[l] {
                    put(&mut m, i, j, col, a * b.conj() * *rate);
                }
            }
        }
    }
    if leak > 1e-12 {
        return Err(Error::InvariantViolation(format!(
            "generator leaves the excitation sector (amplitude {leak:.3e})"
        )));
    }
    Ok(Liouvillian {
        matrix: m,
        pairs,
        layout: layout.clone(),
        position,
    })
}
