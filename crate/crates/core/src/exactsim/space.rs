//! Tensor-product basis of two small ensembles plus optional cavity modes.
//!
//! Basis index = atom bits + 2^(2n) · photon index. Atom `k < n` belongs to
//! ensemble A, atom `n + k` to B; a set bit means excited. The photon index is
//! mixed radix with base `n_max + 1`, mode 0 least significant.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Op = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CavityMode {
    /// Atom-only master equation after adiabatic elimination.
    Eliminated,
    /// Cavity fields kept explicitly, each truncated at `n_max` photons.
    FullCavity { n_max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    n_small: usize,
    mode: CavityMode,
    modes: usize,
    levels: usize,
    atom_dim: usize,
    dim: usize,
}

impl Layout {
    /// `cavity_modes` is ignored in eliminated mode.
    pub fn new(n_small: usize, mode: CavityMode, cavity_modes: usize) -> Layout {
        let (modes, levels) = match mode {
            CavityMode::Eliminated => (0, 1),
            CavityMode::FullCavity { n_max } => (cavity_modes, n_max + 1),
        };
        let atom_dim = 1usize << (2 * n_small);
        Layout {
            n_small,
            mode,
            modes,
            levels,
            atom_dim,
            dim: atom_dim * levels.pow(modes as u32),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n_small(&self) -> usize {
        self.n_small
    }
    pub fn mode(&self) -> CavityMode {
        self.mode
    }
    pub fn is_full(&self) -> bool {
        matches!(self.mode, CavityMode::FullCavity { .. })
    }
    pub fn cavity_modes(&self) -> usize {
        self.modes
    }
    pub fn n_atoms_total(&self) -> usize {
        2 * self.n_small
    }

    pub fn atom(&self, ens: Ensemble, k: usize) -> usize {
        match ens {
            Ensemble::A => k,
            Ensemble::B => self.n_small + k,
        }
    }

    pub fn atoms_of(&self, ens: Ensemble) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_small).map(move |k| self.atom(ens, k))
    }

    pub fn atom_bits(&self, idx: usize) -> usize {
        idx % self.atom_dim
    }

    pub fn photons(&self, idx: usize, mode: usize) -> usize {
        (idx / self.atom_dim / self.levels.pow(mode as u32)) % self.levels
    }

    pub fn max_photons(&self) -> usize {
        self.levels - 1
    }

    /// Atomic excitations plus photons; conserved by every coherent term.
    pub fn excitation(&self, idx: usize) -> usize {
        self.atom_bits(idx).count_ones() as usize + (0..self.modes).map(|m| self.photons(idx, m)).sum::<usize>()
    }

    pub fn identity(&self) -> Op {
        Op::identity(self.dim, self.dim)
    }

    pub fn zero(&self) -> Op {
        Op::zeros(self.dim, self.dim)
    }

    pub fn sigma_minus(&self, atom: usize) -> Op {
        let bit = 1usize << atom;
        let mut op = self.zero();
        for idx in 0..self.dim {
            if idx & bit != 0 {
                op[(idx ^ bit, idx)] = Complex64::from(1.0);
            }
        }
        op
    }

    pub fn sigma_plus(&self, atom: usize) -> Op {
        self.sigma_minus(atom).adjoint()
    }

    pub fn sigma_z(&self, atom: usize) -> Op {
        let bit = 1usize << atom;
        Op::from_diagonal(&nalgebra::DVector::from_fn(self.dim, |idx, _| {
            Complex64::from(if idx & bit != 0 { 1.0 } else { -1.0 })
        }))
    }

    pub fn j_minus(&self, ens: Ensemble) -> Op {
        self.atoms_of(ens).fold(self.zero(), |acc, a| acc + self.sigma_minus(a))
    }

    pub fn j_plus(&self, ens: Ensemble) -> Op {
        self.j_minus(ens).adjoint()
    }

    /// `Σ σᶻ / 2` over one ensemble.
    pub fn j_z(&self, ens: Ensemble) -> Op {
        self.atoms_of(ens).fold(self.zero(), |acc, a| acc + self.sigma_z(a)) * Complex64::from(0.5)
    }

    pub fn annihilate(&self, mode: usize) -> Op {
        assert!(mode < self.modes, "cavity mode {mode} not present");
        let stride = self.atom_dim * self.levels.pow(mode as u32);
        let mut op = self.zero();
        for idx in 0..self.dim {
            let n = self.photons(idx, mode);
            if n > 0 {
                op[(idx - stride, idx)] = Complex64::from((n as f64).sqrt());
            }
        }
        op
    }

    pub fn create(&self, mode: usize) -> Op {
        self.annihilate(mode).adjoint()
    }
}
