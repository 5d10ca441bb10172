//! Property tests for the correlation measures, the state interface and the
//! transition detectors.

mod common;

use std::f64::consts::TAU;

use cqed_core::analysis::{detect_freezing, detect_sudden_changes, CorrelationSeries, DetectionOptions, Measure};
use cqed_core::basis::BareBasis;
use cqed_core::config::preset;
use cqed_core::correlations::{
    bures_gqd, classical_correlation, geometric_entanglement, mutual_information, quantum_discord, ree, CcOptions,
    EntanglementOptions, GqdOptions,
};
use cqed_core::dressing::{build_hamiltonian, dress};
use cqed_core::state_io::{bell_diagonal_state, embed, project_vacuum, BlochVector, TwoQubitXState};
use cqed_core::C64;
use proptest::prelude::*;

fn x_state() -> impl Strategy<Value = TwoQubitXState> {
    (
        prop::array::uniform4(0.01f64..1.0),
        0.0f64..1.0,
        0.0f64..1.0,
        0.0f64..TAU,
        0.0f64..TAU,
    )
        .prop_map(|(w, f14, f23, p14, p23)| {
            let total: f64 = w.iter().sum();
            let d = w.map(|v| v / total);
            let a14 = C64::from_polar(f14 * (d[0] * d[3]).sqrt(), p14);
            let a23 = C64::from_polar(f23 * (d[1] * d[2]).sqrt(), p23);
            TwoQubitXState::new(d, a14, a23).unwrap()
        })
}

fn bd_vector() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("inside the tetrahedron", |c| BlochVector::new(c[0], c[1], c[2]).is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropic_measures_are_ordered(x in x_state()) {
        let o = CcOptions::default();
        let mi = mutual_information(&x);
        let cc = classical_correlation(&x, &o).value;
        let qd = quantum_discord(&x, &o).value;
        prop_assert!(cc >= -1e-12 && qd >= -1e-9);
        prop_assert!(cc <= mi + 1e-9);
        prop_assert!((mi - cc - qd).abs() < 1e-12);
    }

    #[test]
    fn luo_closed_form_on_bell_diagonal_states(c in bd_vector()) {
        let x = common::bd_state(c);
        let (mi, cc, qd) = common::luo(c);
        let o = CcOptions::default();
        prop_assert!((mutual_information(&x) - mi).abs() < 1e-12);
        prop_assert!((classical_correlation(&x, &o).value - cc).abs() < 1e-6);
        prop_assert!((quantum_discord(&x, &o).value - qd).abs() < 1e-6);
    }

    #[test]
    fn entropic_measures_ignore_conjugation(x in x_state()) {
        let o = CcOptions::default();
        let e = EntanglementOptions::default();
        prop_assert!((quantum_discord(&x, &o).value - quantum_discord(&x.conj(), &o).value).abs() < 1e-9);
        prop_assert!((ree(&x, &e).value - ree(&x.conj(), &e).value).abs() < 1e-9);
        prop_assert!(
            (geometric_entanglement(&x, &e).normalized.value
                - geometric_entanglement(&x.conj(), &e).normalized.value)
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn swap_symmetric_measures(x in x_state()) {
        let y = x.swapped();
        let e = EntanglementOptions::default();
        prop_assert!((mutual_information(&x) - mutual_information(&y)).abs() < 1e-12);
        prop_assert!((ree(&x, &e).value - ree(&y, &e).value).abs() < 1e-6);
        prop_assert!(
            (geometric_entanglement(&x, &e).normalized.value - geometric_entanglement(&y, &e).normalized.value).abs()
                < 1e-6
        );
    }

    #[test]
    fn bell_diagonal_discord_is_swap_symmetric(c in bd_vector()) {
        let x = common::bd_state(c);
        let o = CcOptions::default();
        prop_assert!((quantum_discord(&x, &o).value - quantum_discord(&x.swapped(), &o).value).abs() < 1e-7);
    }

    #[test]
    fn vacuum_readout_inverts_embedding(c in bd_vector()) {
        let system = preset("fig1b").unwrap().system;
        let basis = BareBasis::enumerate(2);
        let dressed = dress(&build_hamiltonian(&system, &basis), &basis).unwrap();
        let b = BlochVector::new(c[0], c[1], c[2]).unwrap();
        let rho = embed(&bell_diagonal_state(&b), &basis, &dressed).unwrap();
        let out = project_vacuum(&rho, &basis, &dressed).unwrap();
        prop_assert!((out.p_vac - 1.0).abs() < 1e-12);
        let back = out.state.to_matrix();
        let orig = bell_diagonal_state(&b);
        prop_assert!((back - orig).iter().all(|z| z.norm() < 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bures_discord_matches_grid_oracle(x in x_state()) {
        let got = bures_gqd(&x, &GqdOptions::default()).normalized.value;
        prop_assert!((got - common::gqd_grid_oracle(&x)).abs() < 1e-3);
    }

    #[test]
    fn bures_discord_ignores_conjugation(x in x_state()) {
        let o = GqdOptions::default();
        prop_assert!((bures_gqd(&x, &o).normalized.value - bures_gqd(&x.conj(), &o).normalized.value).abs() < 1e-6);
    }

    #[test]
    fn entanglement_never_exceeds_discord(x in x_state()) {
        let ge = geometric_entanglement(&x, &EntanglementOptions::default()).normalized.value;
        let gqd = bures_gqd(&x, &GqdOptions::default()).normalized.value;
        prop_assert!(ge <= gqd + 1e-6, "GE {ge} > GQD {gqd}");
    }
}

/// Piecewise-linear series with kinks at the given sample indices.
fn kinked(n: usize, kinks: &[usize], slopes: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut y = 0.5;
    for i in 0..n {
        v.push(y);
        let seg = kinks.iter().filter(|&&k| i >= k).count();
        y += slopes[seg] * 0.01;
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_is_invariant_under_time_rescaling(
        k in 40usize..160,
        s0 in -1.0f64..-0.2,
        s1 in 0.2f64..1.0,
        factor in 0.01f64..100.0,
    ) {
        let n = 200;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
        let mut series = CorrelationSeries::new(times).unwrap();
        series.insert_values(Measure::Qd, kinked(n, &[k], &[s0, s1])).unwrap();
        let opts = DetectionOptions::default();
        let a = detect_sudden_changes(&series, Measure::Qd, &opts);
        let scaled = series.rescaled(factor);
        let b = detect_sudden_changes(&scaled, Measure::Qd, &opts);
        prop_assert_eq!(a.len(), 1);
        prop_assert!(a[0].index.abs_diff(k) <= 1);
        prop_assert_eq!(
            a.iter().map(|c| c.index).collect::<Vec<_>>(),
            b.iter().map(|c| c.index).collect::<Vec<_>>()
        );
    }

    #[test]
    fn freezing_intervals_are_flat_and_disjoint(values in prop::collection::vec(0.0f64..0.01, 20..200)) {
        let times: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
        let eps = 4e-3;
        let found = detect_freezing(&times, &values, Measure::Qd, eps, 5.0);
        for w in found.windows(2) {
            prop_assert!(w[0].t_end < w[1].t_start);
        }
        for f in &found {
            prop_assert!(f.duration() >= 5.0);
            let inside: Vec<f64> = times
                .iter()
                .zip(&values)
                .filter(|(t, _)| **t >= f.t_start && **t <= f.t_end)
                .map(|(_, v)| *v)
                .collect();
            let spread = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - inside.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(spread < eps);
        }
    }
}
