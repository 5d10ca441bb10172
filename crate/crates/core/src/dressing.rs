//! RWA Hamiltonian of the two-cavity network and its dressed eigenbasis.
//!
//! ```text
//! H = wf a3'a3 + sum_j (wa Sz_j + w0 aj'aj) + sum_j (g_j S+_j a_j + nu a3 aj' + h.c.)
//! ```
//!
//! All couplings are real, so `H` and the dressed transformation are real
//! orthogonal; they are stored as `f64` matrices. The Hamiltonian conserves
//! the total excitation number and is diagonalized one manifold at a time.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::{Atom, BareBasis, Channel};
use crate::exec::Exec;
use crate::{Error, Result};

/// Relative eigen-residual above which dressing is rejected.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Eigenvalue gaps below this (in units of `omega_a`) are flagged degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Hamiltonian parameters, in units of the atomic frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub omega_a: f64,
    pub omega_0: f64,
    pub omega_f: f64,
    pub g1: f64,
    pub g2: f64,
    pub nu: f64,
    /// Excitation cap `N`.
    pub excitations: u32,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [
            ("omega_a", self.omega_a),
            ("omega_0", self.omega_0),
            ("omega_f", self.omega_f),
        ] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {w}")));
            }
        }
        for (name, g) in [("g1", self.g1), ("g2", self.g2), ("nu", self.nu)] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::Config(format!("{name} must be non-negative, got {g}")));
            }
        }
        Ok(())
    }

    /// Warning text when the atom-cavity coupling does not dominate damping
    /// (`2 min(g1, g2) <= max_gamma`), outside the Markovian dressed-state regime.
    pub fn markov_warning(&self, max_gamma: f64) -> Option<String> {
        let g = self.g1.min(self.g2);
        (2.0 * g <= max_gamma).then(|| {
            format!("2*min(g1,g2) = {:.4e} <= max damping {:.4e}: dressed-state master equation is outside its Markovian regime", 2.0 * g, max_gamma)
        })
    }
}

/// `H` on the bare basis.
pub fn build_hamiltonian(config: &SystemConfig, basis: &BareBasis) -> DMatrix<f64> {
    let a = Channel::ALL.map(|ch| basis.lowering_operator(ch));
    let mut h = config.omega_f * a[2].transpose() * &a[2];
    let couplings = [(Atom::First, config.g1), (Atom::Second, config.g2)];
    for (j, (atom, g)) in couplings.into_iter().enumerate() {
        let ops = basis.atomic_operators(atom);
        h += config.omega_a * &ops.sz;
        h += config.omega_0 * basis.number_operator(Channel::ALL[j]);
        let x = g * &ops.sp * &a[j] + config.nu * &a[2] * a[j].transpose();
        h += &x + x.transpose();
    }
    h
}

/// Dressed eigenbasis of the network Hamiltonian.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    /// Dressed eigenfrequencies; index 0 is the ground state.
    pub energies: DVector<f64>,
    /// Columns are dressed eigenvectors in the bare basis.
    pub vectors: DMatrix<f64>,
    /// Excitation number of each dressed state.
    pub manifold: Vec<u32>,
    /// Pairs of dressed indices whose energies coincide within a manifold.
    pub degenerate: Vec<(usize, usize)>,
}

impl DressedBasis {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Bohr frequency `Omega_m - Omega_n`.
    pub fn bohr(&self, m: usize, n: usize) -> f64 {
        self.energies[m] - self.energies[n]
    }

    /// Express a bare-basis operator in the dressed basis, `C^T X C`.
    pub fn to_dressed(&self, op: &DMatrix<f64>) -> DMatrix<f64> {
        self.vectors.transpose() * op * &self.vectors
    }

    /// Rebuild `H` from the spectral data.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.vectors * DMatrix::from_diagonal(&self.energies) * self.vectors.transpose()
    }
}

struct Block {
    range: std::ops::Range<usize>,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    residual: f64,
}

fn diagonalize_block(h: &DMatrix<f64>, range: std::ops::Range<usize>) -> Block {
    let n = range.len();
    let sub = h.view((range.start, range.start), (n, n)).into_owned();
    let eig = SymmetricEigen::new(sub.clone());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .total_cmp(&eig.eigenvalues[j])
            .then_with(|| dominant_index(&eig.eigenvectors, i).cmp(&dominant_index(&eig.eigenvectors, j)))
    });

    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let k = dominant_index(&eig.eigenvectors, src);
        if v[k] < 0.0 {
            v = -v;
        }
        values.push(eig.eigenvalues[src]);
        vectors.set_column(col, &v);
    }

    let scale = sub.norm().max(1.0);
    let residual = (0..n)
        .map(|c| (&sub * vectors.column(c) - values[c] * vectors.column(c)).norm())
        .fold(0.0, f64::max)
        / scale;
    Block {
        range,
        values,
        vectors,
        residual,
    }
}

/// First index of the largest-magnitude component; ties broken toward the
/// lowest index so the phase convention is reproducible.
fn dominant_index(vectors: &DMatrix<f64>, col: usize) -> usize {
    let c = vectors.column(col);
    let max = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    c.iter().position(|x| x.abs() >= max * (1.0 - 1e-12)).unwrap_or(0)
}

/// Diagonalize `h` manifold by manifold.
pub fn dress(h: &DMatrix<f64>, basis: &BareBasis) -> Result<DressedBasis> {
    dress_with(h, basis, Exec::default())
}

pub fn dress_with(h: &DMatrix<f64>, basis: &BareBasis, exec: Exec) -> Result<DressedBasis> {
    let d = basis.len();
    let manifolds: Vec<u32> = (0..=basis.cap()).collect();
    let blocks = exec.map(&manifolds, |&k| diagonalize_block(h, basis.manifold(k)));

    let mut energies = DVector::zeros(d);
    let mut vectors = DMatrix::zeros(d, d);
    let mut degenerate = Vec::new();
    for (k, block) in blocks.iter().enumerate() {
        if block.residual > RESIDUAL_TOLERANCE {
            return Err(Error::Diagonalization {
                manifold: k,
                residual: block.residual,
                tolerance: RESIDUAL_TOLERANCE,
            });
        }
        let start = block.range.start;
        let n = block.range.len();
        for i in 0..n {
            energies[start + i] = block.values[i];
        }
        vectors.view_mut((start, start), (n, n)).copy_from(&block.vectors);
        for i in 1..n {
            if (block.values[i] - block.values[i - 1]).abs() < DEGENERACY_TOLERANCE {
                degenerate.push((start + i - 1, start + i));
            }
        }
    }
    Ok(DressedBasis {
        energies,
        vectors,
        manifold: basis.manifold_of(),
        degenerate,
    })
}
