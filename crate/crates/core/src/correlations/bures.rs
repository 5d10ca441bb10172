//! Bures geometric discord: distance to the closest classical-quantum state
//! `sum_i p_i |alpha_i><alpha_i| (x) chi_i`, classical on qubit A.
//!
//! The CQ manifold is parameterized by nine angles
//! `[theta, phi, s, u1, v1, c1, u2, v2, c2]`:
//! the basis `|alpha_1> = (cos theta/2, e^{i phi} sin theta/2)`, the weight
//! `p_1 = sin^2 s`, and Bloch vectors `|sin c_k| (sin u_k cos v_k,
//! sin u_k sin v_k, cos u_k)` for the two states `chi_k` of qubit B.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::entropy::{bloch_vector, kron2, qubit_state};
use super::fidelity::FidelityTarget;
use super::optimize::{nelder_mead, SimplexOptions};
use super::{Certificate, MeasureResult};
use crate::state_io::TwoQubitXState;
use crate::C64;

/// Rescales `1 - sqrt(F)` so that a Bell state scores 1.
pub const BELL_NORMALIZATION: f64 = 1.0 / (1.0 - FRAC_1_SQRT_2);

/// Number of CQ parameters.
pub const CQ_PARAMETERS: usize = 9;

/// Multi-start settings for the Bures discord.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GqdOptions {
    /// Random starts, in addition to the structured ones.
    pub starts: usize,
    /// Value tolerance of each local search.
    pub tolerance: f64,
    /// Evaluation cap per local search.
    pub max_evaluations: usize,
    /// Certificate flag threshold on the spread of the best polished starts.
    pub spread_tolerance: f64,
    pub seed: u64,
}

impl Default for GqdOptions {
    fn default() -> Self {
        GqdOptions {
            starts: 16,
            tolerance: 1e-6,
            max_evaluations: 3000,
            spread_tolerance: 1e-4,
            seed: 0x5eed_b0e5,
        }
    }
}

/// Normalized value, raw squared Bures distance and the optimal fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct BuresOutcome {
    /// `(1 - sqrt(F_max)) / (1 - sqrt(1/2))`, argument = CQ parameters.
    pub normalized: MeasureResult,
    /// `2 (1 - sqrt(F_max))`.
    pub raw: f64,
    pub fidelity: f64,
}

/// Orthonormal basis of qubit A with `|alpha_1>` along `(theta, phi)`.
pub fn basis_vectors(theta: f64, phi: f64) -> [[C64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = C64::from_polar(1.0, phi);
    [[C64::new(c, 0.0), e * s], [-e.conj() * s, C64::new(c, 0.0)]]
}

fn projector(v: &[C64; 2]) -> Matrix2<C64> {
    Matrix2::from_fn(|i, j| v[i] * v[j].conj())
}

fn chi_bloch(u: f64, v: f64, c: f64) -> Vector3<f64> {
    let r = c.sin().abs();
    Vector3::new(r * u.sin() * v.cos(), r * u.sin() * v.sin(), r * u.cos())
}

/// The classical-quantum state for a parameter vector.
pub fn cq_state(p: &[f64]) -> Matrix4<C64> {
    let [a1, a2] = basis_vectors(p[0], p[1]);
    let w = p[2].sin().powi(2);
    let chi1 = qubit_state(&chi_bloch(p[3], p[4], p[5]));
    let chi2 = qubit_state(&chi_bloch(p[6], p[7], p[8]));
    kron2(&projector(&a1), &chi1) * C64::new(w, 0.0) + kron2(&projector(&a2), &chi2) * C64::new(1.0 - w, 0.0)
}

/// Map a parameter vector to the equivalent one with the classical axis in
/// the upper hemisphere (`theta` in `[0, pi/2]`).
pub fn canonical_parameters(p: &[f64]) -> [f64; CQ_PARAMETERS] {
    let mut q: [f64; CQ_PARAMETERS] = p.try_into().expect("nine CQ parameters");
    let mut theta = q[0].rem_euclid(2.0 * PI);
    if theta > PI {
        theta = 2.0 * PI - theta;
        q[1] += PI;
    }
    if theta > FRAC_PI_2 {
        theta = PI - theta;
        q[1] += PI;
        let w = q[2].sin().powi(2);
        q[2] = (1.0 - w).max(0.0).sqrt().asin();
        q.swap(3, 6);
        q.swap(4, 7);
        q.swap(5, 8);
    }
    q[0] = theta;
    q[1] = if theta.sin() < 1e-12 {
        0.0
    } else {
        q[1].rem_euclid(2.0 * PI)
    };
    q
}

/// Conditional-state start: measure A in the basis `(theta, phi)` and use the
/// outcome probabilities and conditional states of B.
fn conditional_start(rho: &Matrix4<C64>, theta: f64, phi: f64) -> [f64; CQ_PARAMETERS] {
    let basis = basis_vectors(theta, phi);
    let mut out = [theta, phi, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut weights = [0.0; 2];
    for (k, alpha) in basis.iter().enumerate() {
        let m = Matrix2::from_fn(|b, bp| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..2 {
                for ap in 0..2 {
                    acc += alpha[a].conj() * rho[(2 * a + b, 2 * ap + bp)] * alpha[ap];
                }
            }
            acc
        });
        let p = m.trace().re.max(0.0);
        weights[k] = p;
        let r = if p > 1e-15 {
            bloch_vector(&m) / p
        } else {
            Vector3::zeros()
        };
        let len = r.norm().min(1.0);
        out[3 + 3 * k] = if len > 0.0 {
            (r.z / r.norm()).clamp(-1.0, 1.0).acos()
        } else {
            0.0
        };
        out[4 + 3 * k] = r.y.atan2(r.x);
        // stay slightly inside the Bloch ball so the simplex can move both ways
        out[5 + 3 * k] = (0.999 * len).asin();
    }
    out[2] = weights[0].clamp(0.0, 1.0).sqrt().asin();
    out
}

/// `sqrt(F)` between the state and the CQ state at `params`.
pub fn cq_root_fidelity(target: &FidelityTarget, params: &[f64]) -> f64 {
    target.root_fidelity(&cq_state(params))
}

/// Re-evaluate the normalized Bures discord at a parameter vector.
pub fn bures_gqd_at(x: &TwoQubitXState, params: &[f64]) -> f64 {
    let target = FidelityTarget::new(&x.to_matrix());
    normalize(cq_root_fidelity(&target, params))
}

fn normalize(root_fidelity: f64) -> f64 {
    ((1.0 - root_fidelity) * BELL_NORMALIZATION).max(0.0)
}

/// Bures geometric discord by multi-start simplex search over the CQ manifold.
pub fn bures_gqd(x: &TwoQubitXState, options: &GqdOptions) -> BuresOutcome {
    let rho = x.to_matrix();
    let target = FidelityTarget::new(&rho);
    let objective = |p: &[f64]| -cq_root_fidelity(&target, p);

    let mut starts: Vec<[f64; CQ_PARAMETERS]> = vec![
        conditional_start(&rho, 0.0, 0.0),
        conditional_start(&rho, FRAC_PI_2, 0.0),
        conditional_start(&rho, FRAC_PI_2, FRAC_PI_2),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for _ in 0..options.starts {
        starts.push([
            rng.random_range(0.0..PI),
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(0.0..PI),
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(0.0..PI),
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..FRAC_PI_2),
        ]);
    }

    let search = SimplexOptions {
        f_tolerance: options.tolerance * 1e-3,
        x_tolerance: 1e-7,
        max_evaluations: options.max_evaluations,
    };
    let mut results: Vec<(f64, Vec<f64>)> = starts
        .iter()
        .map(|s| {
            let r = nelder_mead(objective, s, &[0.3; CQ_PARAMETERS], search);
            (-r.value, r.x)
        })
        .collect();
    results.sort_by(|a, b| b.0.total_cmp(&a.0));

    // restart the best few from a fresh small simplex
    let polish = SimplexOptions {
        f_tolerance: options.tolerance * 1e-5,
        ..search
    };
    let mut polished: Vec<(f64, Vec<f64>)> = results
        .iter()
        .take(3)
        .map(|(v, x0)| {
            let r = nelder_mead(objective, x0, &[0.02; CQ_PARAMETERS], polish);
            if -r.value >= *v {
                (-r.value, r.x)
            } else {
                (*v, x0.clone())
            }
        })
        .collect();
    polished.sort_by(|a, b| b.0.total_cmp(&a.0));
    let spread = normalize(polished.last().map_or(0.0, |p| p.0)) - normalize(polished[0].0);

    let params = canonical_parameters(&polished[0].1);
    let root = cq_root_fidelity(&target, &params).min(1.0);
    BuresOutcome {
        normalized: MeasureResult {
            value: normalize(root),
            argument: params.to_vec(),
            certificate: Some(Certificate {
                bound: normalize(polished.last().map_or(root, |p| p.0)),
                gap: spread,
                flagged: spread > options.spread_tolerance,
            }),
        },
        raw: (2.0 * (1.0 - root)).max(0.0),
        fidelity: root * root,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_io::{bell_diagonal_state, BlochVector};

    fn x_of(m: &Matrix4<C64>) -> TwoQubitXState {
        TwoQubitXState::from_matrix(m, 1e-12).unwrap()
    }

    #[test]
    fn cq_state_is_a_state() {
        let p = [0.7, 1.1, 0.4, 2.0, 0.3, 0.9, 0.5, 4.0, 1.3];
        let s = cq_state(&p);
        assert!((s.trace().re - 1.0).abs() < 1e-14);
        assert!(crate::max_modulus(&(s - s.adjoint())) < 1e-15);
        assert!(s.symmetric_eigenvalues().min() > -1e-14);
    }

    #[test]
    fn canonical_parameters_describe_the_same_state() {
        for p in [
            [2.5, 1.1, 0.4, 2.0, 0.3, 0.9, 0.5, 4.0, 1.3],
            [4.0, -0.2, 1.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            [-1.0, 0.0, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3],
        ] {
            let q = canonical_parameters(&p);
            assert!((0.0..=FRAC_PI_2).contains(&q[0]));
            assert!(crate::max_modulus(&(cq_state(&p) - cq_state(&q))) < 1e-14);
        }
    }

    #[test]
    fn bell_state_scores_one() {
        let x = x_of(&bell_diagonal_state(&BlochVector::new(1.0, -1.0, 1.0).unwrap()));
        let out = bures_gqd(&x, &GqdOptions::default());
        assert!((out.fidelity - 0.5).abs() < 1e-6, "{}", out.fidelity);
        assert!((out.normalized.value - 1.0).abs() < 1e-4);
        assert!((out.raw - (2.0 - 2.0f64.sqrt())).abs() < 1e-5);
    }

    #[test]
    fn classical_quantum_states_score_zero() {
        // classical along sigma_x on A: I/4 + 0.2 sigma_x (x) sigma_x
        let r = 0.8f64.asin();
        let p = [FRAC_PI_2, 0.0, PI / 4.0, FRAC_PI_2, 0.0, r, FRAC_PI_2, PI, r];
        let x = x_of(&cq_state(&p));
        assert!((x.a23.re - 0.2).abs() < 1e-14 && (x.a14.re - 0.2).abs() < 1e-14);
        assert!(bures_gqd(&x, &GqdOptions::default()).normalized.value < 1e-6);
        let product = TwoQubitXState::new([0.12, 0.28, 0.18, 0.42], C64::new(0.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert!(bures_gqd(&product, &GqdOptions::default()).normalized.value < 1e-6);
    }

    #[test]
    fn argument_reproduces_value() {
        let x = TwoQubitXState::new([0.3, 0.2, 0.15, 0.35], C64::new(0.1, 0.05), C64::new(-0.08, 0.1)).unwrap();
        let out = bures_gqd(&x, &GqdOptions::default());
        assert!((bures_gqd_at(&x, &out.normalized.argument) - out.normalized.value).abs() < 1e-10);
    }
}
