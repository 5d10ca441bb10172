//! Mutual information, measurement-optimized classical correlation and
//! entropic discord. The projective measurement acts on qubit B.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use super::entropy::{entropy4, partial_trace_a, partial_trace_b, qubit_entropy, PauliDecomposition};
use super::optimize::{nelder_mead, SimplexOptions};
use super::{Certificate, MeasureResult};
use crate::state_io::TwoQubitXState;
use crate::C64;

/// Search settings for the classical correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcOptions {
    /// Points per axis of the `(theta, phi)` grid.
    pub grid: usize,
    /// Value tolerance of the local refinement.
    pub tolerance: f64,
    /// Number of grid local maxima that are refined.
    pub refine_starts: usize,
}

impl Default for CcOptions {
    fn default() -> Self {
        CcOptions {
            grid: 128,
            tolerance: 1e-8,
            refine_starts: 4,
        }
    }
}

/// `S(A) + S(B) - S(AB)` in bits.
pub fn mutual_information(x: &TwoQubitXState) -> f64 {
    mutual_information_matrix(&x.to_matrix())
}

pub fn mutual_information_matrix(rho: &Matrix4<C64>) -> f64 {
    let sa = super::entropy::entropy_of_spectrum(partial_trace_b(rho).symmetric_eigenvalues().iter().copied());
    let sb = super::entropy::entropy_of_spectrum(partial_trace_a(rho).symmetric_eigenvalues().iter().copied());
    (sa + sb - entropy4(rho)).max(0.0)
}

/// Information about A gained by a projective measurement of B along a
/// Bloch direction.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementObjective {
    dec: PauliDecomposition,
    entropy_a: f64,
}

impl MeasurementObjective {
    pub fn new(rho: &Matrix4<C64>) -> Self {
        let dec = PauliDecomposition::of(rho);
        MeasurementObjective {
            entropy_a: qubit_entropy(dec.a.norm()),
            dec,
        }
    }

    /// `S(A) - sum_k p_k S(A|k)` for the measurement along `(theta, phi)`.
    pub fn value(&self, theta: f64, phi: f64) -> f64 {
        let n = direction(theta, phi);
        let bn = self.dec.b.dot(&n);
        let tn = self.dec.t * n;
        let mut conditional = 0.0;
        for s in [1.0, -1.0] {
            let p = (1.0 + s * bn) / 2.0;
            if p > 0.0 {
                let r = ((self.dec.a + tn * s) / 2.0).norm() / p;
                conditional += p * qubit_entropy(r);
            }
        }
        self.entropy_a - conditional
    }
}

/// Unit vector with polar angle `theta` and azimuth `phi`.
pub fn direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Canonical angles of the measurement axis `n ~ -n`: `theta` in
/// `[0, pi/2]`, `phi` in `[0, 2 pi)`, and `phi = 0` on the pole.
pub fn canonical_axis(theta: f64, phi: f64) -> (f64, f64) {
    let mut n = direction(theta, phi);
    if n.z < 0.0 {
        n = -n;
    }
    let theta = n.z.clamp(-1.0, 1.0).acos();
    let mut phi = if theta.sin() < 1e-12 {
        0.0
    } else {
        n.y.atan2(n.x).rem_euclid(2.0 * PI)
    };
    if (theta - FRAC_PI_2).abs() < 1e-12 && phi >= PI {
        phi -= PI;
    }
    (theta.min(FRAC_PI_2), phi)
}

/// CC of an X state (argument `[theta, phi]` of the optimal axis on B).
pub fn classical_correlation(x: &TwoQubitXState, options: &CcOptions) -> MeasureResult {
    classical_correlation_matrix(&x.to_matrix(), options)
}

/// Evaluate CC at a given measurement axis.
pub fn classical_correlation_at(x: &TwoQubitXState, theta: f64, phi: f64) -> f64 {
    MeasurementObjective::new(&x.to_matrix()).value(theta, phi)
}

/// CC of an arbitrary two-qubit state.
pub fn classical_correlation_matrix(rho: &Matrix4<C64>, options: &CcOptions) -> MeasureResult {
    let obj = MeasurementObjective::new(rho);
    let n = options.grid.max(2);
    let dtheta = FRAC_PI_2 / (n - 1) as f64;
    let dphi = 2.0 * PI / n as f64;
    let mut grid = vec![f64::NEG_INFINITY; n * n];
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for i in 0..n {
        let theta = i as f64 * dtheta;
        for j in 0..n {
            let v = if i == 0 && j > 0 {
                grid[0]
            } else {
                obj.value(theta, j as f64 * dphi)
            };
            grid[i * n + j] = v;
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }

    // local maxima of the grid (periodic in phi), best first
    let mut peaks: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i * n + j];
            let mut is_peak = true;
            'scan: for di in [-1i64, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    let ii = i as i64 + di;
                    if (di == 0 && dj == 0) || ii < 0 || ii >= n as i64 {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(n as i64) as usize;
                    if grid[ii as usize * n + jj] > v {
                        is_peak = false;
                        break 'scan;
                    }
                }
            }
            if is_peak {
                peaks.push((v, i, j));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    peaks.truncate(options.refine_starts.max(1));

    let mut arg = (best.1 as f64 * dtheta, best.2 as f64 * dphi);
    let mut value = best.0;
    let simplex = SimplexOptions {
        f_tolerance: options.tolerance * 1e-4,
        x_tolerance: 1e-9,
        max_evaluations: 2000,
    };
    for &(_, i, j) in &peaks {
        let start = [i as f64 * dtheta, j as f64 * dphi];
        let r = nelder_mead(|p| -obj.value(p[0], p[1]), &start, &[dtheta / 2.0, dphi / 2.0], simplex);
        if -r.value > value + 1e-14 {
            value = -r.value;
            arg = (r.x[0], r.x[1]);
        }
    }
    let (theta, phi) = canonical_axis(arg.0, arg.1);
    let value_at = obj.value(theta, phi);
    MeasureResult {
        value: value_at.max(0.0),
        argument: vec![theta, phi],
        certificate: Some(Certificate {
            bound: best.0,
            gap: value_at - best.0,
            flagged: value_at < best.0 - 1e-12,
        }),
    }
}

/// QD from an already computed MI and CC; the argument is inherited.
pub fn discord_from(mutual_information: f64, cc: &MeasureResult) -> MeasureResult {
    MeasureResult {
        value: (mutual_information - cc.value).max(0.0),
        argument: cc.argument.clone(),
        certificate: cc.certificate,
    }
}

/// Entropic discord `MI - CC` with the measurement on B.
pub fn quantum_discord(x: &TwoQubitXState, options: &CcOptions) -> MeasureResult {
    let cc = classical_correlation(x, options);
    discord_from(mutual_information(x), &cc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_io::{bell_diagonal_state, BlochVector};

    fn bd(c1: f64, c2: f64, c3: f64) -> TwoQubitXState {
        TwoQubitXState::from_matrix(&bell_diagonal_state(&BlochVector::new(c1, c2, c3).unwrap()), 1e-12).unwrap()
    }

    #[test]
    fn product_state_has_no_correlations() {
        let x = TwoQubitXState::new([0.12, 0.28, 0.18, 0.42], C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert!(mutual_information(&x).abs() < 1e-14);
        let o = CcOptions::default();
        assert!(classical_correlation(&x, &o).value.abs() < 1e-12);
        assert!(quantum_discord(&x, &o).value.abs() < 1e-12);
    }

    #[test]
    fn bell_state() {
        let x = bd(1.0, -1.0, 1.0);
        assert!((mutual_information(&x) - 2.0).abs() < 1e-12);
        let o = CcOptions::default();
        assert!((classical_correlation(&x, &o).value - 1.0).abs() < 1e-12);
        assert!((quantum_discord(&x, &o).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn initial_state_values() {
        let x = bd(1.0, -0.95, 0.95);
        let mi = mutual_information(&x);
        assert!((mi - 1.83134).abs() < 5e-6);
        let cc = classical_correlation(&x, &CcOptions::default());
        assert!((cc.value - 1.0).abs() < 1e-10);
        // |c1| is the largest component, so the optimal axis is sigma_x
        assert!((cc.argument[0] - FRAC_PI_2).abs() < 1e-9 && cc.argument[1].abs() < 1e-9);
        assert!((discord_from(mi, &cc).value - 0.83134).abs() < 5e-6);
    }

    #[test]
    fn classical_classical_state_has_zero_discord() {
        let x = TwoQubitXState::new([0.5, 0.0, 0.0, 0.5], C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let qd = quantum_discord(&x, &CcOptions::default());
        assert!(qd.value.abs() < 1e-12);
        assert!(qd.argument[0].abs() < 1e-12);
    }

    #[test]
    fn argument_reproduces_value() {
        let x = TwoQubitXState::new([0.3, 0.2, 0.15, 0.35], C64::new(0.1, 0.05), C64::new(-0.08, 0.1)).unwrap();
        let cc = classical_correlation(&x, &CcOptions::default());
        let again = classical_correlation_at(&x, cc.argument[0], cc.argument[1]);
        assert!((again - cc.value).abs() < 1e-10);
        assert!(cc.certificate.unwrap().gap >= 0.0);
    }

    #[test]
    fn axis_canonicalization() {
        let (t, p) = canonical_axis(PI - 0.3, 0.2);
        assert!((t - 0.3).abs() < 1e-12 && (p - (0.2 + PI)).abs() < 1e-12);
        assert_eq!(canonical_axis(0.0, 1.3), (0.0, 0.0));
        let (t, p) = canonical_axis(FRAC_PI_2, 1.5 * PI);
        assert!((t - FRAC_PI_2).abs() < 1e-12 && (p - 0.5 * PI).abs() < 1e-12);
    }
}
