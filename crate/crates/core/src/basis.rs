//! Truncated bare product basis `|A1 A2 C1 C2 F>` and the mode/atom
//! operators written on it.
//!
//! States are ordered manifold-major (total excitation number), then
//! lexicographically on `(A1, A2, C1, C2, F)` with `g < e`. The ground state
//! `|gg000>` is always index 0, and every RWA-conserving operator is
//! block-diagonal in this order.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Two-level atom state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    Ground,
    Excited,
}

impl Level {
    pub fn excitation(self) -> u32 {
        match self {
            Level::Ground => 0,
            Level::Excited => 1,
        }
    }

    /// Eigenvalue of `S_z`: +1/2 for excited, -1/2 for ground.
    pub fn sz(self) -> f64 {
        match self {
            Level::Ground => -0.5,
            Level::Excited => 0.5,
        }
    }
}

/// Bosonic dissipation channel: the two cavity modes and the fiber mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Cavity1,
    Cavity2,
    Fiber,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Cavity1, Channel::Cavity2, Channel::Fiber];

    pub fn index(self) -> usize {
        match self {
            Channel::Cavity1 => 0,
            Channel::Cavity2 => 1,
            Channel::Fiber => 2,
        }
    }
}

/// Which atom an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BareState {
    pub a1: Level,
    pub a2: Level,
    pub c1: u32,
    pub c2: u32,
    pub f: u32,
}

impl BareState {
    pub const GROUND: BareState = BareState::new(Level::Ground, Level::Ground, 0, 0, 0);

    pub const fn new(a1: Level, a2: Level, c1: u32, c2: u32, f: u32) -> Self {
        BareState { a1, a2, c1, c2, f }
    }

    /// Atoms in the given levels with all field modes in vacuum.
    pub const fn atoms(a1: Level, a2: Level) -> Self {
        BareState::new(a1, a2, 0, 0, 0)
    }

    pub fn excitation(&self) -> u32 {
        self.a1.excitation() + self.a2.excitation() + self.c1 + self.c2 + self.f
    }

    pub fn photons(&self, channel: Channel) -> u32 {
        match channel {
            Channel::Cavity1 => self.c1,
            Channel::Cavity2 => self.c2,
            Channel::Fiber => self.f,
        }
    }

    fn with_photons(mut self, channel: Channel, n: u32) -> Self {
        match channel {
            Channel::Cavity1 => self.c1 = n,
            Channel::Cavity2 => self.c2 = n,
            Channel::Fiber => self.f = n,
        }
        self
    }

    pub fn level(&self, atom: Atom) -> Level {
        match atom {
            Atom::First => self.a1,
            Atom::Second => self.a2,
        }
    }

    fn with_level(mut self, atom: Atom, level: Level) -> Self {
        match atom {
            Atom::First => self.a1 = level,
            Atom::Second => self.a2 = level,
        }
        self
    }
}

impl fmt::Display for BareState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = |x: Level| if x == Level::Excited { 'e' } else { 'g' };
        write!(f, "|{}{}{}{}{}>", l(self.a1), l(self.a2), self.c1, self.c2, self.f)
    }
}

/// Number of states with at least one excitation for cap `n`:
/// `d_N = N + 2 * sum_{k=1..N} k(k+1)`.
pub fn excited_dimension(n: u32) -> usize {
    let n = n as usize;
    n + 2 * (1..=n).map(|k| k * (k + 1)).sum::<usize>()
}

/// Number of bare states carrying exactly `k` excitations.
pub fn manifold_size(k: u32) -> usize {
    let k = k as usize;
    1 + 2 * k * (k + 1)
}

#[derive(Debug, Clone)]
pub struct BareBasis {
    cap: u32,
    states: Vec<BareState>,
    index: HashMap<BareState, usize>,
    /// `offsets[k]..offsets[k + 1]` is the index range of manifold `k`.
    offsets: Vec<usize>,
}

impl BareBasis {
    /// All product states with total excitation `<= cap`.
    pub fn enumerate(cap: u32) -> Self {
        use Level::{Excited, Ground};
        let mut states = Vec::with_capacity(1 + excited_dimension(cap));
        let mut offsets = vec![0];
        for k in 0..=cap {
            let start = states.len();
            for a1 in [Ground, Excited] {
                for a2 in [Ground, Excited] {
                    let atoms = a1.excitation() + a2.excitation();
                    if atoms > k {
                        continue;
                    }
                    let photons = k - atoms;
                    for c1 in 0..=photons {
                        for c2 in 0..=photons - c1 {
                            states.push(BareState::new(a1, a2, c1, c2, photons - c1 - c2));
                        }
                    }
                }
            }
            states[start..].sort();
            offsets.push(states.len());
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        BareBasis {
            cap,
            states,
            index,
            offsets,
        }
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BareState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> BareState {
        self.states[i]
    }

    pub fn index_of(&self, s: &BareState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Index range of the `k`-excitation manifold.
    pub fn manifold(&self, k: u32) -> std::ops::Range<usize> {
        self.offsets[k as usize]..self.offsets[k as usize + 1]
    }

    /// Excitation number of each basis state, in basis order.
    pub fn manifold_of(&self) -> Vec<u32> {
        self.states.iter().map(BareState::excitation).collect()
    }

    /// Matrix of the annihilation operator of `channel` (`a_1`, `a_2` or `a_3`).
    pub fn lowering_operator(&self, channel: Channel) -> DMatrix<f64> {
        let d = self.len();
        let mut a = DMatrix::zeros(d, d);
        for (col, s) in self.states.iter().enumerate() {
            let n = s.photons(channel);
            if n == 0 {
                continue;
            }
            let target = s.with_photons(channel, n - 1);
            let row = self.index[&target];
            a[(row, col)] = (n as f64).sqrt();
        }
        a
    }

    /// Photon-number operator `a_j^dag a_j` (diagonal).
    pub fn number_operator(&self, channel: Channel) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.len(),
            self.states.iter().map(|s| s.photons(channel) as f64),
        ))
    }

    /// `(S_z, S^+, S^-)` for one atom. `S^+` entries whose target would exceed
    /// the excitation cap are dropped.
    pub fn atomic_operators(&self, atom: Atom) -> AtomicOperators {
        let d = self.len();
        let mut sz = DMatrix::zeros(d, d);
        let mut sp = DMatrix::zeros(d, d);
        for (col, s) in self.states.iter().enumerate() {
            let level = s.level(atom);
            sz[(col, col)] = level.sz();
            if level == Level::Ground {
                if let Some(row) = self.index_of(&s.with_level(atom, Level::Excited)) {
                    sp[(row, col)] = 1.0;
                }
            }
        }
        let sm = sp.transpose();
        AtomicOperators { sz, sp, sm }
    }

    /// Diagonal total-excitation operator.
    pub fn excitation_operator(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.len(),
            self.states.iter().map(|s| s.excitation() as f64),
        ))
    }
}

#[derive(Debug, Clone)]
pub struct AtomicOperators {
    pub sz: DMatrix<f64>,
    pub sp: DMatrix<f64>,
    pub sm: DMatrix<f64>,
}
