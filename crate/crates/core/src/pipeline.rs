//! End-to-end run: basis, dressing, rates, propagation, vacuum readout,
//! correlation measures and transition detection.

use serde::{Deserialize, Serialize};

use crate::analysis::{CorrelationSeries, Measure, TransitionReport};
use crate::basis::BareBasis;
use crate::config::{Propagator, RunConfig};
use crate::correlations::CorrelationSuite;
use crate::dressing::{build_hamiltonian, dress_with, DressedBasis};
use crate::evolution::{rk_solve, DressedDensityMatrix, RkTolerances, SecularPropagator};
use crate::exec::Exec;
use crate::rates::{build_rate_table, lowering_operators, RateTable};
use crate::state_io::{bell_diagonal_state, embed, project_vacuum, TwoQubitXState, VacuumReadout};
use crate::Result;

/// The network after dressing and rate construction.
#[derive(Debug, Clone)]
pub struct Network {
    pub basis: BareBasis,
    pub dressed: DressedBasis,
    pub rates: RateTable,
    pub rho0: DressedDensityMatrix,
}

impl Network {
    pub fn build(config: &RunConfig, exec: Exec) -> Result<Self> {
        config.validate().map_err(|e| e.at("config"))?;
        let basis = BareBasis::enumerate(config.system.excitations);
        let h = build_hamiltonian(&config.system, &basis);
        let dressed = dress_with(&h, &basis, exec).map_err(|e| e.at("dressing"))?;
        let reservoirs = config.reservoir_specs().map_err(|e| e.at("rates"))?;
        let rates = build_rate_table(&dressed, &reservoirs, &lowering_operators(&basis), config.run.mode)
            .map_err(|e| e.at("rates"))?;
        let c = config.initial.effective().map_err(|e| e.at("state-io"))?;
        let rho0 = embed(&bell_diagonal_state(&c), &basis, &dressed).map_err(|e| e.at("state-io"))?;
        Ok(Network {
            basis,
            dressed,
            rates,
            rho0,
        })
    }
}

/// Physicality of the full state and the readout at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutSample {
    /// Time in units of `1 / gamma_ref`.
    pub time: f64,
    pub state: TwoQubitXState,
    pub p_vac: f64,
    pub off_x: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    /// Only computed when the state is not numerically positive definite.
    pub min_eigenvalue: Option<f64>,
}

fn readout(rho: &DressedDensityMatrix, net: &Network, time: f64, physical_time: f64) -> Result<ReadoutSample> {
    rho.validate(physical_time).map_err(|e| e.at("evolution"))?;
    let phys = rho.physicality();
    let VacuumReadout { state, p_vac, off_x } =
        project_vacuum(rho, &net.basis, &net.dressed).map_err(|e| e.at("readout"))?;
    Ok(ReadoutSample {
        time,
        state,
        p_vac,
        off_x,
        trace_error: phys.trace_error,
        hermiticity_error: phys.hermiticity_error,
        min_eigenvalue: phys.min_eigenvalue,
    })
}

/// Propagate and read out the atoms at every configured sample.
pub fn run_readout(config: &RunConfig, net: &Network, exec: Exec) -> Result<Vec<ReadoutSample>> {
    let scaled = config.scaled_times();
    let times = config.physical_times();
    match config.run.propagator {
        Propagator::Secular => {
            let prop = SecularPropagator::new(&net.rho0, &net.dressed, &net.rates).map_err(|e| e.at("evolution"))?;
            let pops = prop.populations(&times).map_err(|e| e.at("evolution"))?;
            exec.map_range(times.len(), |i| {
                readout(&prop.state(times[i], &pops[i]), net, scaled[i], times[i])
            })
            .into_iter()
            .collect()
        }
        Propagator::RungeKutta => {
            let solution = rk_solve(&net.rho0, &net.dressed, &net.rates, &times, RkTolerances::default())
                .map_err(|e| e.at("evolution"))?;
            exec.map_range(times.len(), |i| readout(&solution.state(i), net, scaled[i], times[i]))
                .into_iter()
                .collect()
        }
    }
}

/// Samples whose optimizer certificates were flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedSample {
    pub index: usize,
    pub measures: Vec<String>,
}

/// Run-level numerical health.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub dimension: usize,
    pub rate_fingerprint: String,
    pub gamma_ref: f64,
    pub effective_c: [f64; 3],
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    /// Most negative eigenvalue seen, when any state failed the fast
    /// positive-definiteness check.
    pub min_eigenvalue: Option<f64>,
    pub max_off_x: f64,
    pub markov_warning: Option<String>,
    pub flagged: Vec<FlaggedSample>,
}

/// Everything produced by [`simulate`].
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub config: RunConfig,
    pub config_hash: String,
    pub samples: Vec<ReadoutSample>,
    pub suites: Vec<CorrelationSuite>,
    pub series: CorrelationSeries,
    pub report: TransitionReport,
    pub diagnostics: Diagnostics,
}

/// Assemble the per-measure series from evaluated suites.
pub fn series_from_suites(times: Vec<f64>, suites: &[CorrelationSuite]) -> Result<CorrelationSeries> {
    let mut series = CorrelationSeries::new(times)?;
    series.insert_values(Measure::Mi, suites.iter().map(|s| s.mi).collect())?;
    type Pick = fn(&CorrelationSuite) -> Option<&crate::correlations::MeasureResult>;
    let picks: [(Measure, Pick); 5] = [
        (Measure::Cc, |s| s.cc.as_ref()),
        (Measure::Qd, |s| s.qd.as_ref()),
        (Measure::Gqd, |s| s.gqd.as_ref()),
        (Measure::Ree, |s| s.ree.as_ref()),
        (Measure::Ge, |s| s.ge.as_ref()),
    ];
    for (m, pick) in picks {
        let Some(vals) = suites
            .iter()
            .map(|s| pick(s).map(|r| r.value))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        if suites.is_empty() {
            continue;
        }
        series.insert_values(m, vals)?;
        if matches!(m, Measure::Cc | Measure::Gqd) {
            let theta = suites
                .iter()
                .map(|s| pick(s).and_then(|r| r.argument.first().copied()).unwrap_or(f64::NAN))
                .collect();
            series.insert_argument(m, theta)?;
        }
    }
    Ok(series)
}

/// Run the full pipeline for one configuration.
pub fn simulate(config: &RunConfig, exec: Exec) -> Result<SimulationOutput> {
    let net = Network::build(config, exec)?;
    let samples = run_readout(config, &net, exec)?;

    let suites = exec.map(&samples, |s| {
        CorrelationSuite::evaluate(&s.state, s.p_vac, &config.measures, &config.optimizer)
    });
    let series = series_from_suites(samples.iter().map(|s| s.time).collect(), &suites).map_err(|e| e.at("analysis"))?;
    let report = TransitionReport::analyze(&series, &config.detection);

    let max_gamma = config.reservoir.as_array().iter().map(|r| r.gamma).fold(0.0, f64::max);
    let effective_c = config.initial.effective().map_err(|e| e.at("state-io"))?.as_array();
    let diagnostics = Diagnostics {
        dimension: net.basis.len(),
        rate_fingerprint: net.rates.fingerprint(),
        gamma_ref: config.reservoir.reference_rate(),
        effective_c,
        max_trace_error: samples.iter().map(|s| s.trace_error).fold(0.0, f64::max),
        max_hermiticity_error: samples.iter().map(|s| s.hermiticity_error).fold(0.0, f64::max),
        min_eigenvalue: samples.iter().filter_map(|s| s.min_eigenvalue).reduce(f64::min),
        max_off_x: samples.iter().map(|s| s.off_x).fold(0.0, f64::max),
        markov_warning: config.system.markov_warning(max_gamma),
        flagged: suites
            .iter()
            .enumerate()
            .filter_map(|(index, s)| {
                let f = s.flagged();
                (!f.is_empty()).then(|| FlaggedSample {
                    index,
                    measures: f.into_iter().map(String::from).collect(),
                })
            })
            .collect(),
    };
    Ok(SimulationOutput {
        config: config.clone(),
        config_hash: config.hash(),
        samples,
        suites,
        series,
        report,
        diagnostics,
    })
}
