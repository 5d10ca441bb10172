//! Independent simulations across one configuration parameter.

use serde::{Deserialize, Serialize};

use super::{Measure, TransitionReport};
use crate::config::RunConfig;
use crate::correlations::MeasureSet;
use crate::exec::Exec;
use crate::pipeline::simulate;

/// Outcome of one sweep point. Exactly one of `report` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: String,
    pub value: f64,
    pub report: Option<TransitionReport>,
    /// Time averages over the sampled span, in the order of [`Measure::ALL`]
    /// restricted to the computed measures.
    pub time_averages: Vec<(Measure, f64)>,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn average(&self, measure: Measure) -> Option<f64> {
        self.time_averages.iter().find(|(m, _)| *m == measure).map(|(_, v)| *v)
    }
}

/// Simulate `base` with `axis` set to each of `values`. Points run
/// concurrently under `exec`; the output follows the order of `values`, and
/// a failing point records its error without stopping the others.
pub fn run_sweep(
    base: &RunConfig,
    axis: &str,
    values: &[f64],
    measures: &MeasureSet,
    exec: Exec,
) -> crate::Result<Vec<SweepPoint>> {
    // Reject a bad axis name up front rather than once per point. Zero is
    // accepted by every numeric field, so only the key itself is checked.
    if !values.is_empty() {
        base.clone().set_key(axis, 0.0)?;
    }
    Ok(exec.map(values, |&value| {
        let mut cfg = base.clone();
        cfg.measures = *measures;
        let outcome = cfg.set_key(axis, value).and_then(|_| simulate(&cfg, exec));
        match outcome {
            Ok(out) => SweepPoint {
                axis: axis.to_string(),
                value,
                time_averages: Measure::ALL
                    .into_iter()
                    .filter_map(|m| out.series.time_average(m).map(|a| (m, a)))
                    .collect(),
                report: Some(out.report),
                error: None,
            },
            Err(e) => SweepPoint {
                axis: axis.to_string(),
                value,
                report: None,
                time_averages: Vec::new(),
                error: Some(e.to_string()),
            },
        }
    }))
}
