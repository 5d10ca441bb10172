//! End-to-end regression properties of the simulation pipeline.

use cqed_core::analysis::Measure;
use cqed_core::config::{preset, TimeConfig};
use cqed_core::correlations::MeasureSet;
use cqed_core::exec::Exec;
use cqed_core::pipeline::{simulate, SimulationOutput};

fn run(name: &str, measures: &str, time: Option<TimeConfig>) -> SimulationOutput {
    let mut cfg = preset(name).unwrap();
    cfg.measures = MeasureSet::parse_list(measures).unwrap();
    if let Some(t) = time {
        cfg.time = t;
    }
    simulate(&cfg, Exec::Parallel).unwrap()
}

#[test]
fn cold_vacuum_probability_recovers() {
    // Photon exchange makes p_vac oscillate, so the check is on its maximum
    // over successive windows of one damping time.
    for name in ["fig2a-cold", "fig3-cold"] {
        let out = run(name, "cc", None);
        let times = out.series.times();
        let window = times.iter().position(|&t| t >= 1.0).unwrap();
        let maxima: Vec<f64> = out
            .samples
            .chunks(window)
            .map(|c| c.iter().map(|s| s.p_vac).fold(0.0, f64::max))
            .collect();
        assert!(out.samples.iter().all(|s| (0.0..=1.0 + 1e-12).contains(&s.p_vac)));
        for w in maxima[1..].windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{name}: window maxima {maxima:?}");
        }
    }
}

#[test]
fn thermal_dynamics_leave_bell_diagonal_form_but_stay_x_shaped() {
    let out = run(
        "fig2a-hot",
        "cc",
        Some(TimeConfig {
            t_max: 2.0,
            samples: 41,
        }),
    );
    assert!(out.diagnostics.max_off_x < 1e-8, "{}", out.diagnostics.max_off_x);
    let asymmetry: Vec<f64> = out
        .samples
        .iter()
        .map(|s| (s.state.d[0] - s.state.d[3]).abs())
        .collect();
    assert!(asymmetry[0] < 1e-12);
    assert!(asymmetry.iter().any(|&a| a > 1e-3), "{asymmetry:?}");
}

#[test]
fn fig1b_reports_every_measure() {
    let out = run(
        "fig1b",
        "all",
        Some(TimeConfig {
            t_max: 0.5,
            samples: 11,
        }),
    );
    for m in [
        Measure::Mi,
        Measure::Cc,
        Measure::Qd,
        Measure::Gqd,
        Measure::Ree,
        Measure::Ge,
    ] {
        let v = out.series.values(m).unwrap_or_else(|| panic!("{m:?} missing"));
        assert_eq!(v.len(), 11);
        assert!(v.iter().all(|x| x.is_finite() && *x >= -1e-9), "{m:?}: {v:?}");
    }
}

#[test]
fn sequential_and_parallel_runs_agree() {
    let mut cfg = preset("fig3-hot").unwrap();
    cfg.time = TimeConfig {
        t_max: 1.0,
        samples: 21,
    };
    cfg.measures = MeasureSet::parse_list("cc,qd,gqd").unwrap();
    let a = simulate(&cfg, Exec::Parallel).unwrap();
    let b = simulate(&cfg, Exec::Sequential).unwrap();
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.suites, b.suites);
}
