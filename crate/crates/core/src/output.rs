//! CSV and JSON exports: time series with a provenance header, transition
//! reports, and batch X-state input and measure output.

use serde::{Deserialize, Serialize};

use crate::analysis::{CorrelationSeries, Measure, TransitionReport};
use crate::correlations::{CorrelationSuite, MeasureResult};
use crate::pipeline::{Diagnostics, ReadoutSample, SimulationOutput};
use crate::state_io::{TwoQubitXState, XStateRow};
use crate::{Error, Result};

/// Crate version recorded in every output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns of the time-series CSV.
pub const SERIES_COLUMNS: [&str; 13] = [
    "t",
    "p_vac",
    "MI",
    "CC",
    "QD",
    "GQD_B_norm",
    "GQD_B_raw",
    "REE",
    "GE",
    "theta_CC",
    "phi_CC",
    "theta_GQD",
    "phi_GQD",
];

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn value(m: &Option<MeasureResult>) -> Option<f64> {
    m.as_ref().map(|r| r.value)
}

fn arg(m: &Option<MeasureResult>, i: usize) -> Option<f64> {
    m.as_ref().and_then(|r| r.argument.get(i).copied())
}

fn suite_cells(s: &CorrelationSuite) -> Vec<String> {
    vec![
        num(s.mi),
        opt(value(&s.cc)),
        opt(value(&s.qd)),
        opt(value(&s.gqd)),
        opt(s.gqd_raw),
        opt(value(&s.ree)),
        opt(value(&s.ge)),
        opt(arg(&s.cc, 0)),
        opt(arg(&s.cc, 1)),
        opt(arg(&s.gqd, 0)),
        opt(arg(&s.gqd, 1)),
    ]
}

fn csv_line(cells: &[String]) -> String {
    let mut line = cells.join(",");
    line.push('\n');
    line
}

/// Time-series CSV with a `#` provenance header.
pub fn series_csv(out: &SimulationOutput) -> String {
    let cfg = &out.config;
    let d = &out.diagnostics;
    let mut text = String::new();
    text.push_str(&format!("# cqednet {VERSION}\n"));
    text.push_str(&format!("# config_hash: {}\n", out.config_hash));
    text.push_str(&format!("# name: {}\n", cfg.name));
    text.push_str(&format!("# mode: {}\n", cfg.run.mode));
    text.push_str(&format!("# propagator: {}\n", cfg.run.propagator));
    text.push_str(&format!("# rate_fingerprint: {}\n", d.rate_fingerprint));
    text.push_str(&format!("# dimension: {}\n", d.dimension));
    text.push_str(&format!(
        "# initial_c: {} {} {}\n",
        d.effective_c[0], d.effective_c[1], d.effective_c[2]
    ));
    text.push_str(&format!("# time_unit: 1/gamma_ref, gamma_ref = {}\n", d.gamma_ref));
    text.push_str("# entropic measures in bits; GQD_B_raw and GE raw are squared Bures distances\n");
    text.push_str(&csv_line(&SERIES_COLUMNS.map(String::from)));
    for (s, suite) in out.samples.iter().zip(&out.suites) {
        let mut cells = vec![num(s.time), num(s.p_vac)];
        cells.extend(suite_cells(suite));
        text.push_str(&csv_line(&cells));
    }
    text
}

/// Read a series CSV written by [`series_csv`]. Comment lines are skipped;
/// empty measure columns are treated as not computed.
pub fn read_series_csv(text: &str) -> Result<CorrelationSeries> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let t_col = col("t").ok_or_else(|| Error::Parse("missing `t` column".into()))?;
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        for (k, cell) in record.iter().enumerate().take(headers.len()) {
            let cell = cell.trim();
            let v = if cell.is_empty() {
                None
            } else {
                Some(
                    cell.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("`{cell}`: {e}")))?,
                )
            };
            columns[k].push(v);
        }
    }
    let full = |k: usize| columns[k].iter().copied().collect::<Option<Vec<f64>>>();
    let times = full(t_col).ok_or_else(|| Error::Parse("empty time cell".into()))?;
    let mut series = CorrelationSeries::new(times)?;
    for (m, name) in [
        (Measure::Mi, "MI"),
        (Measure::Cc, "CC"),
        (Measure::Qd, "QD"),
        (Measure::Gqd, "GQD_B_norm"),
        (Measure::Ree, "REE"),
        (Measure::Ge, "GE"),
    ] {
        if let Some(v) = col(name).and_then(full) {
            series.insert_values(m, v)?;
        }
    }
    for (m, name) in [(Measure::Cc, "theta_CC"), (Measure::Gqd, "theta_GQD")] {
        if let Some(v) = col(name).and_then(full) {
            series.insert_argument(m, v)?;
        }
    }
    Ok(series)
}

/// JSON document written next to the series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format: String,
    pub version: String,
    pub config_hash: String,
    pub name: String,
    pub diagnostics: Option<Diagnostics>,
    pub time_averages: Vec<(Measure, f64)>,
    pub report: TransitionReport,
}

impl ReportFile {
    pub const FORMAT: &'static str = "cqed-transition-report";

    pub fn from_output(out: &SimulationOutput) -> Self {
        ReportFile::new(
            out.config_hash.clone(),
            out.config.name.clone(),
            Some(out.diagnostics.clone()),
            &out.series,
            out.report.clone(),
        )
    }

    pub fn new(
        config_hash: String,
        name: String,
        diagnostics: Option<Diagnostics>,
        series: &CorrelationSeries,
        report: TransitionReport,
    ) -> Self {
        ReportFile {
            format: Self::FORMAT.into(),
            version: VERSION.into(),
            config_hash,
            name,
            diagnostics,
            time_averages: Measure::ALL
                .into_iter()
                .filter_map(|m| series.time_average(m).map(|a| (m, a)))
                .collect(),
            report,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: ReportFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if r.format != Self::FORMAT {
            return Err(Error::Parse(format!("not a transition report: `{}`", r.format)));
        }
        Ok(r)
    }
}

/// Batch input encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchFormat {
    Csv,
    Json,
}

impl BatchFormat {
    /// Guess from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => BatchFormat::Json,
            _ => BatchFormat::Csv,
        }
    }
}

/// Parse X states given as `d1..d4, a14_re, a14_im, a23_re, a23_im` rows.
pub fn read_x_states(text: &str, format: BatchFormat) -> Result<Vec<TwoQubitXState>> {
    let rows: Vec<XStateRow> = match format {
        BatchFormat::Json => serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?,
        BatchFormat::Csv => {
            let body: String = text
                .lines()
                .filter(|l| !l.starts_with('#'))
                .map(|l| format!("{l}\n"))
                .collect();
            csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(body.as_bytes())
                .deserialize()
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(e.to_string()))?
        }
    };
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| TwoQubitXState::try_from(r).map_err(|e| Error::Parse(format!("row {}: {e}", i + 1))))
        .collect()
}

/// Write X states as CSV rows readable by [`read_x_states`].
pub fn x_states_csv(states: &[TwoQubitXState]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in states {
        w.serialize(s.to_row()).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

/// Vacuum-conditioned X states of a run, one row per sample, readable by
/// [`read_x_states`] (the extra `t` and `p_vac` columns are ignored there).
pub fn readout_csv(samples: &[ReadoutSample]) -> String {
    let mut text = String::from("t,p_vac,d1,d2,d3,d4,a14_re,a14_im,a23_re,a23_im\n");
    for s in samples {
        let r = s.state.to_row();
        let cells = [
            s.time, s.p_vac, r.d1, r.d2, r.d3, r.d4, r.a14_re, r.a14_im, r.a23_re, r.a23_im,
        ];
        text.push_str(&csv_line(&cells.map(num)));
    }
    text
}

/// Columns of the batch measure CSV.
pub const SUITE_COLUMNS: [&str; 13] = [
    "row",
    "MI",
    "CC",
    "QD",
    "GQD_B_norm",
    "GQD_B_raw",
    "REE",
    "GE",
    "theta_CC",
    "phi_CC",
    "theta_GQD",
    "phi_GQD",
    "flagged",
];

/// One CSV row of measures per input state.
pub fn suites_csv(suites: &[CorrelationSuite]) -> String {
    let mut text = csv_line(&SUITE_COLUMNS.map(String::from));
    for (i, s) in suites.iter().enumerate() {
        let mut cells = vec![i.to_string()];
        cells.extend(suite_cells(s));
        cells.push(s.flagged().join(";"));
        text.push_str(&csv_line(&cells));
    }
    text
}

/// Measures of each input state as a JSON array.
pub fn suites_json(suites: &[CorrelationSuite]) -> String {
    let mut s = serde_json::to_string_pretty(suites).expect("suites serialize");
    s.push('\n');
    s
}
