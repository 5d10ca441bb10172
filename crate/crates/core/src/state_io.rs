//! Bell-diagonal initial states, their embedding into the network, and the
//! vacuum-conditioned two-qubit readout.
//!
//! Two-qubit matrices use the basis order `|ee>, |eg>, |ge>, |gg>` everywhere,
//! with `|e>` the `+1` eigenstate of `sigma_z`.

use nalgebra::{DMatrix, Matrix4};
use serde::{Deserialize, Serialize};

use crate::basis::{BareBasis, BareState, Level};
use crate::dressing::DressedBasis;
use crate::evolution::DressedDensityMatrix;
use crate::{Error, Result, C64};

/// Tolerance on the Bell-diagonal eigenvalues.
pub const BD_EIGENVALUE_TOLERANCE: f64 = 1e-12;
/// Off-X entries (relative to the block trace) below this are dropped.
pub const X_TOLERANCE: f64 = 1e-8;
/// Smallest vacuum probability the readout will condition on.
pub const MIN_VACUUM_PROBABILITY: f64 = 1e-12;
/// Slack on the X-state positivity conditions.
pub const POSITIVITY_SLACK: f64 = 1e-10;

/// Atomic states in readout order.
pub const ATOM_ORDER: [(Level, Level); 4] = [
    (Level::Excited, Level::Excited),
    (Level::Excited, Level::Ground),
    (Level::Ground, Level::Excited),
    (Level::Ground, Level::Ground),
];

/// Correlation vector `c` of `rho = [I + sum_i c_i sigma_i (x) sigma_i] / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl BlochVector {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let c = BlochVector { c1, c2, c3 };
        c.validate()?;
        Ok(c)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// Bell-basis weights, in the order
    /// `(1+c1-c2+c3)/4, (1-c1+c2+c3)/4, (1+c1+c2-c3)/4, (1-c1-c2-c3)/4`.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let BlochVector { c1, c2, c3 } = *self;
        [
            (1.0 + c1 - c2 + c3) / 4.0,
            (1.0 - c1 + c2 + c3) / 4.0,
            (1.0 + c1 + c2 - c3) / 4.0,
            (1.0 - c1 - c2 - c3) / 4.0,
        ]
    }

    /// Closest physical correlation vector in the Euclidean metric, i.e. the
    /// projection onto the tetrahedron spanned by the four Bell states.
    /// Physical vectors are returned unchanged.
    pub fn nearest_physical(c: [f64; 3]) -> Self {
        let candidate = BlochVector {
            c1: c[0],
            c2: c[1],
            c3: c[2],
        };
        if candidate.eigenvalues().iter().all(|&l| l >= 0.0) {
            return candidate;
        }
        // Eigenvalue k is (1 + s_k . c) / 4; the faces are s_k . c = -1.
        let s = [[1.0, -1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]];
        let c = nalgebra::Vector3::from(c);
        let mut best: Option<(f64, nalgebra::Vector3<f64>)> = None;
        for mask in 1u32..15 {
            let active: Vec<usize> = (0..4).filter(|k| mask & (1 << k) != 0).collect();
            if active.len() > 3 {
                continue;
            }
            let rows = nalgebra::DMatrix::from_fn(active.len(), 3, |r, j| s[active[r]][j]);
            let residual = nalgebra::DVector::from_fn(active.len(), |r, _| 1.0 + rows.row(r).dot(&c.transpose()));
            let Some(inv) = (&rows * rows.transpose()).try_inverse() else {
                continue;
            };
            let shift = rows.transpose() * inv * residual;
            let p = c - nalgebra::Vector3::new(shift[0], shift[1], shift[2]);
            let feasible = s.iter().all(|sk| 1.0 + nalgebra::Vector3::from(*sk).dot(&p) >= -1e-15);
            let dist = (p - c).norm();
            if feasible && best.as_ref().is_none_or(|(d, _)| dist < *d) {
                best = Some((dist, p));
            }
        }
        let p = best.map(|(_, p)| p).unwrap_or_else(nalgebra::Vector3::zeros);
        let mut out = BlochVector {
            c1: p[0],
            c2: p[1],
            c3: p[2],
        };
        // Clean rounding so the projected vector passes validation exactly.
        for (k, l) in out.eigenvalues().into_iter().enumerate() {
            if l < 0.0 {
                let shift = -4.0 * l / 3.0;
                out.c1 -= shift * s[k][0];
                out.c2 -= shift * s[k][1];
                out.c3 -= shift * s[k][2];
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.as_array().into_iter().enumerate() {
            if !(c.is_finite() && (-1.0..=1.0).contains(&c)) {
                return Err(Error::Config(format!("c{} = {c} outside [-1, 1]", i + 1)));
            }
        }
        for (index, value) in self.eigenvalues().into_iter().enumerate() {
            if value < -BD_EIGENVALUE_TOLERANCE {
                return Err(Error::NonPositiveBellState { index, value });
            }
        }
        Ok(())
    }
}

/// The Bell-diagonal density matrix for `c`.
pub fn bell_diagonal_state(c: &BlochVector) -> Matrix4<C64> {
    let r = |x: f64| C64::new(x, 0.0);
    let mut m = Matrix4::zeros();
    m[(0, 0)] = r((1.0 + c.c3) / 4.0);
    m[(3, 3)] = r((1.0 + c.c3) / 4.0);
    m[(1, 1)] = r((1.0 - c.c3) / 4.0);
    m[(2, 2)] = r((1.0 - c.c3) / 4.0);
    m[(0, 3)] = r((c.c1 - c.c2) / 4.0);
    m[(3, 0)] = r((c.c1 - c.c2) / 4.0);
    m[(1, 2)] = r((c.c1 + c.c2) / 4.0);
    m[(2, 1)] = r((c.c1 + c.c2) / 4.0);
    m
}

/// Two-qubit state with support on the diagonal and anti-diagonal only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitXState {
    /// Populations of `|ee>, |eg>, |ge>, |gg>`.
    pub d: [f64; 4],
    /// `<ee| rho |gg>`.
    pub a14: C64,
    /// `<eg| rho |ge>`.
    pub a23: C64,
}

impl TwoQubitXState {
    pub fn new(d: [f64; 4], a14: C64, a23: C64) -> Result<Self> {
        let x = TwoQubitXState { d, a14, a23 };
        x.validate()?;
        Ok(x)
    }

    pub fn validate(&self) -> Result<()> {
        let [d1, d2, d3, d4] = self.d;
        if self.d.iter().any(|v| !v.is_finite() || *v < -POSITIVITY_SLACK) {
            return Err(Error::InvalidXState(format!("negative population in {:?}", self.d)));
        }
        let tr: f64 = self.d.iter().sum();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidXState(format!("trace {tr}")));
        }
        if self.a14.norm() > (d1.max(0.0) * d4.max(0.0)).sqrt() + POSITIVITY_SLACK {
            return Err(Error::InvalidXState(format!(
                "|a14| = {} exceeds sqrt(d1 d4)",
                self.a14.norm()
            )));
        }
        if self.a23.norm() > (d2.max(0.0) * d3.max(0.0)).sqrt() + POSITIVITY_SLACK {
            return Err(Error::InvalidXState(format!(
                "|a23| = {} exceeds sqrt(d2 d3)",
                self.a23.norm()
            )));
        }
        Ok(())
    }

    /// Cast a 4x4 density matrix to X form; off-X entries larger than `tol`
    /// times the trace are an error.
    pub fn from_matrix(m: &Matrix4<C64>, tol: f64) -> Result<Self> {
        let tr = m.trace().re;
        let residual = off_x_residual(m) / tr.abs().max(f64::MIN_POSITIVE);
        if residual > tol {
            return Err(Error::NotXState { residual });
        }
        let d = [0, 1, 2, 3].map(|i| m[(i, i)].re.max(0.0));
        let a14 = (m[(0, 3)] + m[(3, 0)].conj()) * 0.5;
        let a23 = (m[(1, 2)] + m[(2, 1)].conj()) * 0.5;
        let x = TwoQubitXState { d, a14, a23 };
        x.validate()?;
        Ok(x)
    }

    pub fn to_matrix(&self) -> Matrix4<C64> {
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            m[(i, i)] = C64::new(self.d[i], 0.0);
        }
        m[(0, 3)] = self.a14;
        m[(3, 0)] = self.a14.conj();
        m[(1, 2)] = self.a23;
        m[(2, 1)] = self.a23.conj();
        m
    }

    /// Complex-conjugated state.
    pub fn conj(&self) -> Self {
        TwoQubitXState {
            a14: self.a14.conj(),
            a23: self.a23.conj(),
            ..*self
        }
    }

    /// Exchange the two qubits.
    pub fn swapped(&self) -> Self {
        TwoQubitXState {
            d: [self.d[0], self.d[2], self.d[1], self.d[3]],
            a14: self.a14,
            a23: self.a23.conj(),
        }
    }

    /// Same state with both anti-diagonal phases removed; all measures are
    /// invariant under this local unitary.
    pub fn dephased(&self) -> Self {
        TwoQubitXState {
            a14: C64::new(self.a14.norm(), 0.0),
            a23: C64::new(self.a23.norm(), 0.0),
            ..*self
        }
    }

    pub fn to_row(&self) -> XStateRow {
        XStateRow {
            d1: self.d[0],
            d2: self.d[1],
            d3: self.d[2],
            d4: self.d[3],
            a14_re: self.a14.re,
            a14_im: self.a14.im,
            a23_re: self.a23.re,
            a23_im: self.a23.im,
        }
    }
}

/// Flat serialized X state: four populations and two complex coherences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XStateRow {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub a14_re: f64,
    pub a14_im: f64,
    pub a23_re: f64,
    pub a23_im: f64,
}

impl TryFrom<XStateRow> for TwoQubitXState {
    type Error = Error;
    fn try_from(r: XStateRow) -> Result<Self> {
        TwoQubitXState::new(
            [r.d1, r.d2, r.d3, r.d4],
            C64::new(r.a14_re, r.a14_im),
            C64::new(r.a23_re, r.a23_im),
        )
    }
}

/// Largest modulus among the eight entries outside the X pattern.
pub fn off_x_residual(m: &Matrix4<C64>) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 {
                r = r.max(m[(i, j)].norm());
            }
        }
    }
    r
}

fn atom_indices(basis: &BareBasis) -> [Option<usize>; 4] {
    ATOM_ORDER.map(|(a1, a2)| basis.index_of(&BareState::atoms(a1, a2)))
}

/// Place `rho_atoms (x) |000><000|` in the network and rotate it to the
/// dressed basis.
pub fn embed(rho_atoms: &Matrix4<C64>, basis: &BareBasis, dressed: &DressedBasis) -> Result<DressedDensityMatrix> {
    let idx = atom_indices(basis);
    for (i, slot) in idx.iter().enumerate() {
        let weight = (0..4).map(|j| rho_atoms[(i, j)].norm()).fold(0.0, f64::max);
        if slot.is_none() && weight > 0.0 {
            let (a1, a2) = ATOM_ORDER[i];
            return Err(Error::Embed(format!(
                "{} carries weight {weight:.3e} but the excitation cap is {}",
                BareState::atoms(a1, a2),
                basis.cap()
            )));
        }
    }
    let d = basis.len();
    let mut bare = DMatrix::<C64>::zeros(d, d);
    for i in 0..4 {
        for j in 0..4 {
            if let (Some(r), Some(c)) = (idx[i], idx[j]) {
                bare[(r, c)] = rho_atoms[(i, j)];
            }
        }
    }
    let c = dressed.vectors.map(|x| C64::new(x, 0.0));
    Ok(DressedDensityMatrix(c.transpose() * bare * c))
}

/// Result of conditioning the fields on vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumReadout {
    pub state: TwoQubitXState,
    /// Probability that all three modes are empty.
    pub p_vac: f64,
    /// Largest discarded off-X entry, relative to `p_vac`.
    pub off_x: f64,
}

/// The unnormalized 4x4 atomic block `<A1 A2 000| rho |A1' A2' 000>`.
pub fn vacuum_block(rho: &DressedDensityMatrix, basis: &BareBasis, dressed: &DressedBasis) -> Matrix4<C64> {
    let idx = atom_indices(basis);
    let d = dressed.len();
    let mut rows = DMatrix::<C64>::zeros(4, d);
    for (i, slot) in idx.iter().enumerate() {
        if let Some(r) = slot {
            for m in 0..d {
                rows[(i, m)] = C64::new(dressed.vectors[(*r, m)], 0.0);
            }
        }
    }
    let block = &rows * &rho.0 * rows.transpose();
    Matrix4::from_fn(|i, j| block[(i, j)])
}

/// Project the fields on `|000>`, normalize, and cast to X form.
pub fn project_vacuum(rho: &DressedDensityMatrix, basis: &BareBasis, dressed: &DressedBasis) -> Result<VacuumReadout> {
    let block = vacuum_block(rho, basis, dressed);
    let p_vac = block.trace().re;
    if p_vac.is_nan() || p_vac < MIN_VACUUM_PROBABILITY {
        return Err(Error::VacuumProbability(p_vac));
    }
    let normalized = block / C64::new(p_vac, 0.0);
    let off_x = off_x_residual(&normalized);
    let state = TwoQubitXState::from_matrix(&normalized, X_TOLERANCE)?;
    Ok(VacuumReadout {
        state,
        p_vac: p_vac.min(1.0),
        off_x,
    })
}
