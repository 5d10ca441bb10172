//! Thermal transition rates between dressed states.
//!
//! Each channel `j` couples to its reservoir through `a_j + a_j^dag`. For a
//! pair of dressed states connected by `a_j`, the weight is
//! `|<phi_k'| a_j |phi_k>|^2`; the member with higher energy relaxes with
//! `gamma_j w (n + 1)` and the lower one is excited with `gamma_j w n`, where
//! `n` is the Bose occupation at the pair's gap. The spectral density is flat.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{BareBasis, Channel};
use crate::dressing::DressedBasis;
use crate::{Error, Result};

/// Gaps smaller than this (units of `omega_a`) between coupled states are
/// treated as degenerate Bohr frequencies.
pub const GAP_TOLERANCE: f64 = 1e-9;
/// Weights below this are treated as structural zeros.
pub const WEIGHT_FLOOR: f64 = 1e-24;

/// Mean thermal occupation `1 / (exp(delta / T) - 1)`, zero at `T = 0`.
pub fn thermal_occupation(delta: f64, temperature: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::NonPositiveGap(delta));
    }
    if temperature <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (delta / temperature).exp_m1())
}

/// Temperature at which the occupation at `reference` equals `nbar`.
pub fn temperature_for_occupation(nbar: f64, reference: f64) -> f64 {
    if nbar <= 0.0 {
        0.0
    } else {
        reference / (1.0 / nbar).ln_1p()
    }
}

/// Damping rate and temperature of one reservoir (`k_B = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub gamma: f64,
    pub temperature: f64,
}

impl ReservoirSpec {
    pub fn zero_temperature(gamma: f64) -> Self {
        ReservoirSpec {
            gamma,
            temperature: 0.0,
        }
    }

    /// Reservoir whose mean occupation at frequency `reference` is `nbar`.
    pub fn from_occupation(gamma: f64, nbar: f64, reference: f64) -> Self {
        ReservoirSpec {
            gamma,
            temperature: temperature_for_occupation(nbar, reference),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::Config(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::Config(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Which dressed-state transitions are retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    /// Only transitions to and from the ground state.
    Literal,
    /// Every pair connected by a field lowering operator.
    #[default]
    Cascade,
}

impl std::str::FromStr for RateMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(RateMode::Literal),
            "cascade" => Ok(RateMode::Cascade),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for RateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RateMode::Literal => "literal",
            RateMode::Cascade => "cascade",
        })
    }
}

/// Transition rates between dressed states.
#[derive(Debug, Clone)]
pub struct RateTable {
    /// `transfer[(to, from)]` is the rate `gamma_{from -> to}`; the diagonal is zero.
    pub transfer: DMatrix<f64>,
    /// `Gamma_m`: total outflow from each state.
    pub outflow: DVector<f64>,
    /// Dressed energies the table was built from.
    pub energies: DVector<f64>,
    pub mode: RateMode,
}

impl RateTable {
    pub fn len(&self) -> usize {
        self.outflow.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outflow.is_empty()
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.transfer[(to, from)]
    }

    /// Nonzero rates from a higher to a lower dressed energy, as `(from, to, rate)`.
    pub fn downward(&self) -> Vec<(usize, usize, f64)> {
        self.entries(|from, to| self.energies[from] > self.energies[to])
    }

    /// Nonzero rates from a lower to a higher dressed energy.
    pub fn upward(&self) -> Vec<(usize, usize, f64)> {
        self.entries(|from, to| self.energies[from] < self.energies[to])
    }

    fn entries(&self, keep: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize, f64)> {
        let d = self.len();
        let mut out = Vec::new();
        for from in 0..d {
            for to in 0..d {
                let r = self.transfer[(to, from)];
                if r > 0.0 && keep(from, to) {
                    out.push((from, to, r));
                }
            }
        }
        out
    }

    /// Generator of the classical population dynamics, `dp/dt = M p`.
    pub fn population_generator(&self) -> DMatrix<f64> {
        let mut m = self.transfer.clone();
        for i in 0..self.len() {
            m[(i, i)] = -self.outflow[i];
        }
        m
    }

    /// Short hex digest of the table contents, for provenance headers.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.mode.to_string().as_bytes());
        for x in self.transfer.iter().chain(self.energies.iter()) {
            hasher.update(x.to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

/// Field lowering operators for the three channels, in channel order.
pub fn lowering_operators(basis: &BareBasis) -> [DMatrix<f64>; 3] {
    Channel::ALL.map(|ch| basis.lowering_operator(ch))
}

/// Build the rate table for `reservoirs = [cavity1, cavity2, fiber]`.
pub fn build_rate_table(
    dressed: &DressedBasis,
    reservoirs: &[ReservoirSpec; 3],
    lowering: &[DMatrix<f64>; 3],
    mode: RateMode,
) -> Result<RateTable> {
    let d = dressed.len();
    let mut transfer = DMatrix::zeros(d, d);
    for (reservoir, a) in reservoirs.iter().zip(lowering) {
        if reservoir.gamma == 0.0 {
            continue;
        }
        let a_dressed = dressed.to_dressed(a);
        for k in 0..d {
            for kp in 0..d {
                let amp = a_dressed[(kp, k)];
                let weight = amp * amp;
                if weight < WEIGHT_FLOOR {
                    continue;
                }
                if mode == RateMode::Literal && kp != 0 && k != 0 {
                    continue;
                }
                let gap = dressed.energies[k] - dressed.energies[kp];
                if gap.abs() < GAP_TOLERANCE {
                    return Err(Error::DegenerateTransition {
                        upper: k,
                        lower: kp,
                        gap,
                    });
                }
                let (high, low) = if gap > 0.0 { (k, kp) } else { (kp, k) };
                let n = thermal_occupation(gap.abs(), reservoir.temperature)?;
                transfer[(low, high)] += reservoir.gamma * weight * (n + 1.0);
                transfer[(high, low)] += reservoir.gamma * weight * n;
            }
        }
    }
    let outflow = DVector::from_iterator(d, transfer.column_iter().map(|c| c.sum()));
    Ok(RateTable {
        transfer,
        outflow,
        energies: dressed.energies.clone(),
        mode,
    })
}
