//! Dressed-basis master equation.
//!
//! In the secular form the populations obey a classical rate equation
//! `dp_m/dt = sum_k gamma_{k->m} p_k - Gamma_m p_m` while every coherence
//! evolves on its own,
//! `rho_mn(t) = rho_mn(0) exp[(-i(Omega_m - Omega_n) - (Gamma_m + Gamma_n)/2) t]`.
//!
//! [`propagate`] uses that closed form (matrix exponential for the
//! populations); [`rk_propagate`] integrates the same generator numerically
//! and serves as an independent check.

mod rk;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dressing::DressedBasis;
use crate::rates::{RateMode, RateTable};
use crate::{Error, Result, C64};

pub use rk::{rk_propagate, rk_solve, RkSolution, RkTolerances};

pub const TRACE_TOLERANCE: f64 = 1e-9;
pub const HERMITICITY_TOLERANCE: f64 = 1e-9;
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;

/// Density matrix in the dressed basis, `rho_mn = <phi_m| rho |phi_n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedDensityMatrix(pub DMatrix<C64>);

/// Summary of how far a density matrix is from the physical set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    /// Smallest eigenvalue, or `None` when only the cheap positivity test ran
    /// and passed.
    pub min_eigenvalue: Option<f64>,
}

impl DressedDensityMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn populations(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.0.diagonal().iter().map(|z| z.re))
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        crate::max_modulus(&(&self.0 - self.0.adjoint()))
    }

    /// Indices that share a nonzero off-diagonal entry with another index.
    /// Every other index is an isolated diagonal block.
    fn coupled_indices(&self) -> Vec<usize> {
        let d = self.dim();
        let zero = C64::new(0.0, 0.0);
        (0..d)
            .filter(|&i| (0..d).any(|j| j != i && (self.0[(i, j)] != zero || self.0[(j, i)] != zero)))
            .collect()
    }

    /// Hermitian part restricted to `indices`, shifted by `shift * I`.
    fn hermitian_block(&self, indices: &[usize], shift: f64) -> DMatrix<C64> {
        DMatrix::from_fn(indices.len(), indices.len(), |a, b| {
            let (i, j) = (indices[a], indices[b]);
            let v = (self.0[(i, j)] + self.0[(j, i)].conj()) * 0.5;
            if a == b {
                v + C64::new(shift, 0.0)
            } else {
                v
            }
        })
    }

    fn isolated_minimum(&self, coupled: &[usize]) -> f64 {
        (0..self.dim())
            .filter(|i| coupled.binary_search(i).is_err())
            .map(|i| self.0[(i, i)].re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let coupled = self.coupled_indices();
        let block = if coupled.is_empty() {
            f64::INFINITY
        } else {
            self.hermitian_block(&coupled, 0.0).symmetric_eigenvalues().min()
        };
        block.min(self.isolated_minimum(&coupled))
    }

    /// Check trace, Hermiticity and positivity at the module tolerances.
    ///
    /// Positivity is tested with a Cholesky factorization of
    /// `rho + tol * I` on the coupled indices (the rest of the matrix is
    /// diagonal); the full spectrum is only computed when that fails.
    pub fn physicality(&self) -> Physicality {
        let trace_error = (self.trace() - C64::new(1.0, 0.0)).norm();
        let hermiticity_error = self.hermiticity_error();
        let coupled = self.coupled_indices();
        let positive = self.isolated_minimum(&coupled) > -POSITIVITY_TOLERANCE
            && (coupled.is_empty()
                || self
                    .hermitian_block(&coupled, POSITIVITY_TOLERANCE)
                    .cholesky()
                    .is_some());
        Physicality {
            trace_error,
            hermiticity_error,
            min_eigenvalue: (!positive).then(|| self.min_eigenvalue()),
        }
    }

    pub fn validate(&self, time: f64) -> Result<()> {
        if self.0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Invariant {
                time,
                detail: "non-finite entries".into(),
            });
        }
        let p = self.physicality();
        let mut problems = Vec::new();
        if p.trace_error > TRACE_TOLERANCE {
            problems.push(format!("trace error {:.3e}", p.trace_error));
        }
        if p.hermiticity_error > HERMITICITY_TOLERANCE {
            problems.push(format!("hermiticity error {:.3e}", p.hermiticity_error));
        }
        if let Some(min) = p.min_eigenvalue {
            if min < -POSITIVITY_TOLERANCE {
                problems.push(format!("minimum eigenvalue {min:.3e}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invariant {
                time,
                detail: problems.join(", "),
            })
        }
    }
}

/// Sampled solution of the master equation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample instants in units of `1 / omega_a`.
    pub times: Vec<f64>,
    pub states: Vec<DressedDensityMatrix>,
    pub mode: RateMode,
    pub rate_fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryFile {
    format: String,
    version: u32,
    mode: RateMode,
    rate_fingerprint: String,
    dim: usize,
    times: Vec<f64>,
    /// Row-major, real and imaginary parts interleaved.
    states: Vec<Vec<f64>>,
}

const TRAJECTORY_FORMAT: &str = "cqed-trajectory";

impl Trajectory {
    pub fn to_json(&self) -> String {
        let dim = self.states.first().map_or(0, |s| s.dim());
        let file = TrajectoryFile {
            format: TRAJECTORY_FORMAT.into(),
            version: 1,
            mode: self.mode,
            rate_fingerprint: self.rate_fingerprint.clone(),
            dim,
            times: self.times.clone(),
            states: self
                .states
                .iter()
                .map(|s| {
                    let mut flat = Vec::with_capacity(2 * dim * dim);
                    for r in 0..dim {
                        for c in 0..dim {
                            flat.push(s.0[(r, c)].re);
                            flat.push(s.0[(r, c)].im);
                        }
                    }
                    flat
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("trajectory serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TrajectoryFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.format != TRAJECTORY_FORMAT {
            return Err(Error::Parse(format!("not a trajectory file: `{}`", file.format)));
        }
        let d = file.dim;
        let states = file
            .states
            .into_iter()
            .map(|flat| {
                if flat.len() != 2 * d * d {
                    return Err(Error::Parse("state length does not match dim".into()));
                }
                Ok(DressedDensityMatrix(DMatrix::from_fn(d, d, |r, c| {
                    let k = 2 * (r * d + c);
                    C64::new(flat[k], flat[k + 1])
                })))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            times: file.times,
            states,
            mode: file.mode,
            rate_fingerprint: file.rate_fingerprint,
        })
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Config("sample times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// Closed-form secular propagator. Populations are advanced with the rate
/// matrix exponential; coherences are evaluated directly at each instant.
#[derive(Debug, Clone)]
pub struct SecularPropagator {
    rho0: DMatrix<C64>,
    p0: DVector<f64>,
    generator: DMatrix<f64>,
    energies: DVector<f64>,
    outflow: DVector<f64>,
}

impl SecularPropagator {
    pub fn new(rho0: &DressedDensityMatrix, dressed: &DressedBasis, rates: &RateTable) -> Result<Self> {
        if rho0.dim() != dressed.len() || rates.len() != dressed.len() {
            return Err(Error::Config("state, basis and rate table dimensions differ".into()));
        }
        rho0.validate(0.0)?;
        Ok(SecularPropagator {
            rho0: rho0.0.clone(),
            p0: rho0.populations(),
            generator: rates.population_generator(),
            energies: dressed.energies.clone(),
            outflow: rates.outflow.clone(),
        })
    }

    /// Populations at every requested time. Uniform grids reuse a single
    /// propagator `exp(M dt)`.
    pub fn populations(&self, times: &[f64]) -> Result<Vec<DVector<f64>>> {
        check_times(times)?;
        let Some(&first) = times.first() else {
            return Ok(Vec::new());
        };
        let mut out = Vec::with_capacity(times.len());
        let mut p = self.evolve_populations(&self.p0, first);
        out.push(p.clone());
        if times.len() == 1 {
            return Ok(out);
        }
        let dt = times[1] - times[0];
        let uniform = times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-12 * dt.max(w[1].abs()));
        if uniform {
            let step = (&self.generator * dt).exp();
            for _ in 1..times.len() {
                p = &step * &p;
                out.push(p.clone());
            }
        } else {
            for &t in &times[1..] {
                out.push(self.evolve_populations(&self.p0, t));
            }
        }
        Ok(out)
    }

    fn evolve_populations(&self, p: &DVector<f64>, t: f64) -> DVector<f64> {
        if t == 0.0 {
            return p.clone();
        }
        (&self.generator * t).exp() * p
    }

    /// Full density matrix at time `t` given the populations at `t`.
    pub fn state(&self, t: f64, populations: &DVector<f64>) -> DressedDensityMatrix {
        let d = self.rho0.nrows();
        let mut rho = DMatrix::zeros(d, d);
        for m in 0..d {
            rho[(m, m)] = C64::new(populations[m], 0.0);
            for n in m + 1..d {
                let c0 = self.rho0[(m, n)];
                if c0 == C64::new(0.0, 0.0) {
                    continue;
                }
                let rate = C64::new(
                    -0.5 * (self.outflow[m] + self.outflow[n]),
                    -(self.energies[m] - self.energies[n]),
                );
                let mut v = c0 * (rate * t).exp();
                // subnormal arithmetic is orders of magnitude slower downstream
                if v.norm() < f64::MIN_POSITIVE {
                    v = C64::new(0.0, 0.0);
                }
                rho[(m, n)] = v;
                rho[(n, m)] = v.conj();
            }
        }
        DressedDensityMatrix(rho)
    }

    /// Density matrix at a single instant.
    pub fn state_at(&self, t: f64) -> DressedDensityMatrix {
        let p = self.evolve_populations(&self.p0, t);
        self.state(t, &p)
    }
}

/// Propagate `rho0` to each of `times` with the closed-form secular solution.
pub fn propagate(
    rho0: &DressedDensityMatrix,
    dressed: &DressedBasis,
    rates: &RateTable,
    times: &[f64],
) -> Result<Trajectory> {
    let prop = SecularPropagator::new(rho0, dressed, rates)?;
    let pops = prop.populations(times)?;
    let states = times
        .iter()
        .zip(&pops)
        .map(|(&t, p)| {
            let s = prop.state(t, p);
            s.validate(t)?;
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        mode: rates.mode,
        rate_fingerprint: rates.fingerprint(),
    })
}

/// Stationary populations of the rate equation, from the null space of the
/// generator with the normalization row substituted for the first equation.
pub fn stationary_populations(rates: &RateTable) -> Option<DVector<f64>> {
    let d = rates.len();
    let mut m = rates.population_generator();
    let mut rhs = DVector::zeros(d);
    for c in 0..d {
        m[(0, c)] = 1.0;
    }
    rhs[0] = 1.0;
    m.lu().solve(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BareBasis;
    use crate::dressing::{build_hamiltonian, dress, SystemConfig};
    use crate::rates::{build_rate_table, lowering_operators, ReservoirSpec};
    use crate::state_io::{bell_diagonal_state, embed, BlochVector};

    pub(super) struct Fixture {
        pub dressed: DressedBasis,
        pub rates: RateTable,
        pub rho0: DressedDensityMatrix,
    }

    pub(super) fn fixture(n: u32, gamma: f64, temps: [f64; 3], mode: RateMode) -> Fixture {
        let cfg = SystemConfig {
            omega_a: 1.0,
            omega_0: 0.9,
            omega_f: 1.0,
            g1: 0.08,
            g2: 0.08,
            nu: 0.08,
            excitations: n,
        };
        let basis = BareBasis::enumerate(n);
        let dressed = dress(&build_hamiltonian(&cfg, &basis), &basis).unwrap();
        let res = temps.map(|t| ReservoirSpec { gamma, temperature: t });
        let rates = build_rate_table(&dressed, &res, &lowering_operators(&basis), mode).unwrap();
        let c = BlochVector::new(1.0, -0.95, 0.95).unwrap();
        let atoms = if n >= 2 {
            bell_diagonal_state(&c)
        } else {
            // single excitation: (|eg> + |ge>)/sqrt 2 mixed with ground
            let mut m = nalgebra::Matrix4::zeros();
            m[(1, 1)] = C64::new(0.3, 0.0);
            m[(2, 2)] = C64::new(0.3, 0.0);
            m[(1, 2)] = C64::new(0.3, 0.0);
            m[(2, 1)] = C64::new(0.3, 0.0);
            m[(3, 3)] = C64::new(0.4, 0.0);
            m[(1, 3)] = C64::new(0.1, 0.05);
            m[(3, 1)] = C64::new(0.1, -0.05);
            m
        };
        let rho0 = embed(&atoms, &basis, &dressed).unwrap();
        Fixture { dressed, rates, rho0 }
    }

    #[test]
    fn zero_rates_give_pure_phase_evolution() {
        let f = fixture(2, 0.0, [0.0; 3], RateMode::Cascade);
        let traj = propagate(&f.rho0, &f.dressed, &f.rates, &[0.0, 3.7, 50.0]).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.populations() - f.rho0.populations()).amax() < 1e-15);
            for m in 0..s.dim() {
                for n in 0..s.dim() {
                    let expected = f.rho0.0[(m, n)] * C64::new(0.0, -f.dressed.bohr(m, n) * t).exp();
                    assert!((s.0[(m, n)] - expected).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_temperature_decays_to_ground() {
        let f = fixture(2, 0.05, [0.0; 3], RateMode::Cascade);
        let s = SecularPropagator::new(&f.rho0, &f.dressed, &f.rates)
            .unwrap()
            .state_at(4000.0);
        let mut ground = DMatrix::zeros(s.dim(), s.dim());
        ground[(0, 0)] = C64::new(1.0, 0.0);
        assert!(crate::max_modulus(&(&s.0 - ground)) < 1e-8);
    }

    #[test]
    fn uniform_temperature_relaxes_to_gibbs() {
        let temp = 0.6;
        let f = fixture(3, 0.05, [temp; 3], RateMode::Cascade);
        let prop = SecularPropagator::new(&f.rho0, &f.dressed, &f.rates).unwrap();
        let p = prop.populations(&[20000.0]).unwrap().pop().unwrap();
        let w: Vec<f64> = f
            .dressed
            .energies
            .iter()
            .map(|e| (-(e - f.dressed.energies[0]) / temp).exp())
            .collect();
        let z: f64 = w.iter().sum();
        let null = stationary_populations(&f.rates).unwrap();
        for k in 0..p.len() {
            let gibbs = w[k] / z;
            assert!(
                (p[k] - gibbs).abs() <= 1e-6 * gibbs.max(1e-12),
                "{k}: {} vs {gibbs}",
                p[k]
            );
            assert!((null[k] - gibbs).abs() <= 1e-9 * gibbs.max(1e-12) + 1e-15);
        }
    }

    #[test]
    fn semigroup_property() {
        let f = fixture(3, 0.02, [0.0, 0.3, 0.8], RateMode::Cascade);
        let prop = SecularPropagator::new(&f.rho0, &f.dressed, &f.rates).unwrap();
        let (t1, t2) = (37.0, 91.5);
        let mid = prop.state_at(t1);
        let again = SecularPropagator::new(&mid, &f.dressed, &f.rates)
            .unwrap()
            .state_at(t2 - t1);
        let direct = prop.state_at(t2);
        assert!(crate::max_modulus(&(&again.0 - &direct.0)) < 1e-9);
    }

    #[test]
    fn uniform_and_pointwise_populations_agree() {
        let f = fixture(2, 0.01, [0.0, 0.0, 0.9], RateMode::Cascade);
        let prop = SecularPropagator::new(&f.rho0, &f.dressed, &f.rates).unwrap();
        let times: Vec<f64> = (0..50).map(|i| 5.0 + 10.0 * i as f64).collect();
        let grid = prop.populations(&times).unwrap();
        for (t, p) in times.iter().zip(&grid) {
            let direct = prop.evolve_populations(&prop.p0, *t);
            assert!((p - direct).amax() < 1e-12);
        }
    }

    #[test]
    fn physicality_along_trajectory() {
        let f = fixture(3, 0.01, [0.0, 0.0, 2.0], RateMode::Cascade);
        let times: Vec<f64> = (0..40).map(|i| 12.5 * i as f64).collect();
        let traj = propagate(&f.rho0, &f.dressed, &f.rates, &times).unwrap();
        for s in &traj.states {
            let p = s.physicality();
            assert!(p.trace_error < 1e-9);
            assert_eq!(p.hermiticity_error, 0.0);
            assert!(p.min_eigenvalue.is_none());
        }
    }

    #[test]
    fn literal_ground_coherence_rate() {
        // rho_0n decays at (gamma_{n->0} + sum_k gamma_{0->k}) / 2
        let f = fixture(1, 0.02, [0.4, 0.9, 1.3], RateMode::Literal);
        let n = (1..f.dressed.len()).find(|&k| f.rho0.0[(0, k)].norm() > 1e-6).unwrap();
        let up: f64 = (1..f.dressed.len()).map(|k| f.rates.rate(0, k)).sum();
        let expected = 0.5 * (f.rates.rate(n, 0) + up);
        let t = 40.0;
        let s = SecularPropagator::new(&f.rho0, &f.dressed, &f.rates)
            .unwrap()
            .state_at(t);
        let ratio = s.0[(0, n)].norm() / f.rho0.0[(0, n)].norm();
        assert!((ratio - (-expected * t).exp()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsorted_times() {
        let f = fixture(2, 0.01, [0.0; 3], RateMode::Cascade);
        assert!(propagate(&f.rho0, &f.dressed, &f.rates, &[1.0, 1.0]).is_err());
        assert!(propagate(&f.rho0, &f.dressed, &f.rates, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn trajectory_json_round_trip() {
        let f = fixture(2, 0.01, [0.0; 3], RateMode::Cascade);
        let traj = propagate(&f.rho0, &f.dressed, &f.rates, &[0.0, 10.0]).unwrap();
        let back = Trajectory::from_json(&traj.to_json()).unwrap();
        assert_eq!(back.times, traj.times);
        assert_eq!(back.states, traj.states);
        assert_eq!(back.rate_fingerprint, traj.rate_fingerprint);
        assert!(Trajectory::from_json("{}").is_err());
    }
}
