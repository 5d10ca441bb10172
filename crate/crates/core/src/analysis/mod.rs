//! Sudden-change, freezing and crossing detection on correlation time
//! series, plus parameter sweeps over whole simulations.

mod detect;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use detect::{crossings, detect_freezing, detect_sudden_changes, least_squares_slope};
pub use sweep::{run_sweep, SweepPoint};

/// A correlation measure tracked over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "MI")]
    Mi,
    #[serde(rename = "CC")]
    Cc,
    #[serde(rename = "QD")]
    Qd,
    #[serde(rename = "GQD")]
    Gqd,
    #[serde(rename = "REE")]
    Ree,
    #[serde(rename = "GE")]
    Ge,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::Mi,
        Measure::Cc,
        Measure::Qd,
        Measure::Gqd,
        Measure::Ree,
        Measure::Ge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Mi => "MI",
            Measure::Cc => "CC",
            Measure::Qd => "QD",
            Measure::Gqd => "GQD",
            Measure::Ree => "REE",
            Measure::Ge => "GE",
        }
    }

    /// The measure whose optimizer argument signals branch switches of this
    /// one. Discord inherits the measurement that optimizes CC.
    pub fn argument_source(self) -> Option<Measure> {
        match self {
            Measure::Cc | Measure::Qd => Some(Measure::Cc),
            Measure::Gqd => Some(Measure::Gqd),
            _ => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown measure `{s}`")))
    }
}

/// Measure values and optimizer arguments sampled on a common time grid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationSeries {
    times: Vec<f64>,
    values: BTreeMap<Measure, Vec<f64>>,
    /// Polar angle of the optimal measurement or classical basis.
    arguments: BTreeMap<Measure, Vec<f64>>,
}

impl CorrelationSeries {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "series times must be finite and strictly increasing".into(),
            ));
        }
        Ok(CorrelationSeries {
            times,
            ..Default::default()
        })
    }

    fn check_len(&self, what: &str, n: usize) -> Result<()> {
        if n != self.times.len() {
            return Err(Error::Config(format!(
                "{what} has {n} samples but the series has {}",
                self.times.len()
            )));
        }
        Ok(())
    }

    pub fn insert_values(&mut self, measure: Measure, values: Vec<f64>) -> Result<()> {
        self.check_len(measure.name(), values.len())?;
        self.values.insert(measure, values);
        Ok(())
    }

    pub fn insert_argument(&mut self, measure: Measure, theta: Vec<f64>) -> Result<()> {
        self.check_len(measure.name(), theta.len())?;
        self.arguments.insert(measure, theta);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn values(&self, measure: Measure) -> Option<&[f64]> {
        self.values.get(&measure).map(Vec::as_slice)
    }

    pub fn argument(&self, measure: Measure) -> Option<&[f64]> {
        self.arguments.get(&measure).map(Vec::as_slice)
    }

    pub fn measures(&self) -> impl Iterator<Item = Measure> + '_ {
        self.values.keys().copied()
    }

    /// Time average of a measure over the sampled span (trapezoidal rule).
    pub fn time_average(&self, measure: Measure) -> Option<f64> {
        let v = self.values(measure)?;
        let t = &self.times;
        if t.len() < 2 {
            return v.first().copied();
        }
        let area: f64 = t
            .windows(2)
            .zip(v.windows(2))
            .map(|(tw, vw)| 0.5 * (tw[1] - tw[0]) * (vw[0] + vw[1]))
            .sum();
        Some(area / (t[t.len() - 1] - t[0]))
    }

    /// The same series on a uniformly rescaled time axis.
    pub fn rescaled(&self, factor: f64) -> Self {
        CorrelationSeries {
            times: self.times.iter().map(|t| t * factor).collect(),
            values: self.values.clone(),
            arguments: self.arguments.clone(),
        }
    }
}

/// Thresholds for change and freezing detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionOptions {
    /// Samples per side for the least-squares slopes.
    pub window: usize,
    /// Required ratio of slope jump to the local slope-jump scale.
    pub slope_jump_threshold: f64,
    /// Optimizer-argument jump between adjacent samples that counts as a
    /// branch switch, in radians.
    pub branch_jump: f64,
    /// Branch switches are ignored where the measure is below this, since
    /// the optimizer argument of a vanishing measure is arbitrary.
    pub branch_value_floor: f64,
    /// Maximum spread of a frozen measure.
    pub epsilon: f64,
    /// Minimum frozen duration as a fraction of the sampled span.
    pub min_length_fraction: f64,
}

impl Default for DetectionOptions {
    fn default() -> Self {
        DetectionOptions {
            window: 5,
            slope_jump_threshold: 3.0,
            branch_jump: 0.1,
            branch_value_floor: 1e-4,
            epsilon: 1e-3,
            min_length_fraction: 0.05,
        }
    }
}

impl DetectionOptions {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("detection window must be at least one sample".into()));
        }
        for (name, v) in [
            ("slope_jump_threshold", self.slope_jump_threshold),
            ("branch_jump", self.branch_jump),
            ("epsilon", self.epsilon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.branch_value_floor >= 0.0 && (0.0..=1.0).contains(&self.min_length_fraction)) {
            return Err(Error::Config(
                "branch_value_floor must be non-negative and min_length_fraction in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// A detected non-analytic point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuddenChange {
    pub time: f64,
    pub index: usize,
    pub measure: Measure,
    pub left_slope: f64,
    pub right_slope: f64,
    /// The optimizer argument switches branch at this point.
    pub branch_jump: bool,
}

/// An interval over which a measure stays within `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreezingInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub measure: Measure,
    /// Mean value over the interval.
    pub level: f64,
}

impl FreezingInterval {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// A time at which two measures are equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub time: f64,
    pub pair: (Measure, Measure),
}

/// Everything detected on one series.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransitionReport {
    pub sudden_changes: Vec<SuddenChange>,
    pub freezing_intervals: Vec<FreezingInterval>,
    pub crossings: Vec<Crossing>,
}

impl TransitionReport {
    /// Run every detector on every measure present in the series.
    pub fn analyze(series: &CorrelationSeries, options: &DetectionOptions) -> Self {
        let mut report = TransitionReport::default();
        let span = match series.times() {
            [first, .., last] => last - first,
            _ => 0.0,
        };
        for m in series.measures() {
            report.sudden_changes.extend(detect_sudden_changes(series, m, options));
            if let Some(v) = series.values(m) {
                report.freezing_intervals.extend(detect_freezing(
                    series.times(),
                    v,
                    m,
                    options.epsilon,
                    options.min_length_fraction * span,
                ));
            }
        }
        for (a, b) in [
            (Measure::Cc, Measure::Qd),
            (Measure::Qd, Measure::Gqd),
            (Measure::Ree, Measure::Ge),
        ] {
            report.crossings.extend(crossings(series, a, b));
        }
        report
    }

    pub fn changes_of(&self, measure: Measure) -> impl Iterator<Item = &SuddenChange> + '_ {
        self.sudden_changes.iter().filter(move |c| c.measure == measure)
    }

    pub fn freezing_of(&self, measure: Measure) -> impl Iterator<Item = &FreezingInterval> + '_ {
        self.freezing_intervals.iter().filter(move |f| f.measure == measure)
    }

    /// Summed duration of the freezing intervals of one measure.
    pub fn frozen_duration(&self, measure: Measure) -> f64 {
        self.freezing_of(measure)
            .map(FreezingInterval::duration)
            .fold(0.0, |a, d| a + d)
    }

    /// Flat CSV of change points.
    pub fn changes_csv(&self) -> String {
        let mut out = String::from("time,index,measure,left_slope,right_slope,branch_jump\n");
        for c in &self.sudden_changes {
            out.push_str(&format!(
                "{:.12e},{},{},{:.12e},{:.12e},{}\n",
                c.time, c.index, c.measure, c.left_slope, c.right_slope, c.branch_jump
            ));
        }
        out
    }
}
