//! Correlation measures of two-qubit X states.
//!
//! Entropic quantities are in bits. Both Bures measures are reported raw as
//! squared Bures distances `2 (1 - sqrt(F))` and normalized so that a Bell
//! state scores 1.

pub mod bures;
pub mod classical;
pub mod entanglement;
pub mod entropy;
pub mod fidelity;
pub mod optimize;

use serde::{Deserialize, Serialize};

pub use bures::{bures_gqd, BuresOutcome, GqdOptions};
pub use classical::{classical_correlation, mutual_information, quantum_discord, CcOptions};
pub use entanglement::{geometric_entanglement, ree, EntanglementOptions, GeOutcome};
pub use entropy::von_neumann_entropy;
pub use fidelity::uhlmann_fidelity;

use crate::exec::Exec;
use crate::state_io::TwoQubitXState;

/// Optimizer diagnostics attached to a measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Independent bound on the value (grid optimum for CC, worst polished
    /// start for GQD, pinched-state upper bound for REE, product-state
    /// upper bound for GE).
    pub bound: f64,
    /// Optimality gap estimate in the units of the measure.
    pub gap: f64,
    /// Set when the gap or bound indicates an unreliable optimum.
    pub flagged: bool,
}

/// A measure value with the optimizer argument that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub argument: Vec<f64>,
    pub certificate: Option<Certificate>,
}

/// Which measures to compute. MI is always computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSet {
    /// CC and QD.
    pub entropic: bool,
    pub gqd: bool,
    pub ree: bool,
    pub ge: bool,
}

impl Default for MeasureSet {
    fn default() -> Self {
        MeasureSet {
            entropic: true,
            gqd: true,
            ree: true,
            ge: true,
        }
    }
}

impl MeasureSet {
    /// Parse a comma-separated list such as `cc,qd,gqd`.
    pub fn parse_list(list: &str) -> crate::Result<Self> {
        let mut set = MeasureSet {
            entropic: false,
            gqd: false,
            ree: false,
            ge: false,
        };
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.to_ascii_lowercase().as_str() {
                "all" => set = MeasureSet::default(),
                "mi" => {}
                "cc" | "qd" => set.entropic = true,
                "gqd" => set.gqd = true,
                "ree" => set.ree = true,
                "ge" => set.ge = true,
                other => return Err(crate::Error::Config(format!("unknown measure `{other}`"))),
            }
        }
        Ok(set)
    }
}

/// Settings for every measure.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelationOptions {
    pub cc: CcOptions,
    pub gqd: GqdOptions,
    pub entanglement: EntanglementOptions,
}

/// All measures of one X state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSuite {
    pub p_vac: f64,
    pub mi: f64,
    pub cc: Option<MeasureResult>,
    pub qd: Option<MeasureResult>,
    pub gqd: Option<MeasureResult>,
    pub gqd_raw: Option<f64>,
    pub ree: Option<MeasureResult>,
    pub ge: Option<MeasureResult>,
}

impl CorrelationSuite {
    /// Evaluate the selected measures on one state.
    pub fn evaluate(x: &TwoQubitXState, p_vac: f64, set: &MeasureSet, options: &CorrelationOptions) -> Self {
        let mi = mutual_information(x);
        let (cc, qd) = if set.entropic {
            let cc = classical_correlation(x, &options.cc);
            let qd = classical::discord_from(mi, &cc);
            (Some(cc), Some(qd))
        } else {
            (None, None)
        };
        let (gqd, gqd_raw) = if set.gqd {
            let out = bures_gqd(x, &options.gqd);
            (Some(out.normalized), Some(out.raw))
        } else {
            (None, None)
        };
        CorrelationSuite {
            p_vac,
            mi,
            cc,
            qd,
            gqd,
            gqd_raw,
            ree: set.ree.then(|| ree(x, &options.entanglement)),
            ge: set
                .ge
                .then(|| geometric_entanglement(x, &options.entanglement).normalized),
        }
    }

    /// Evaluate a batch in order, in parallel when enabled.
    pub fn evaluate_batch(
        states: &[(TwoQubitXState, f64)],
        set: &MeasureSet,
        options: &CorrelationOptions,
        exec: Exec,
    ) -> Vec<Self> {
        exec.map(states, |(x, p)| CorrelationSuite::evaluate(x, *p, set, options))
    }

    /// Measures that have a flagged certificate.
    pub fn flagged(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (name, m) in [
            ("CC", &self.cc),
            ("GQD", &self.gqd),
            ("REE", &self.ree),
            ("GE", &self.ge),
        ] {
            if m.as_ref().and_then(|m| m.certificate).is_some_and(|c| c.flagged) {
                out.push(name);
            }
        }
        out
    }
}
