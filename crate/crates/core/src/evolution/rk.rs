//! Dormand-Prince 5(4) integration of the dressed-basis generator with
//! continuous (dense) output at the requested sample times.

use nalgebra::DMatrix;

use super::{check_times, DressedDensityMatrix, Trajectory};
use crate::dressing::DressedBasis;
use crate::rates::RateTable;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkTolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step accepted before reporting underflow.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for RkTolerances {
    fn default() -> Self {
        RkTolerances {
            rtol: 1e-8,
            atol: 1e-12,
            h_min: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// The master-equation generator restricted to the entries it can reach.
///
/// Populations only feed populations and every coherence only feeds itself,
/// so entries that start at zero stay zero. The state vector holds the
/// populations followed by the initially nonzero coherences, and the two
/// blocks are integrated independently with their own step sizes.
struct Generator {
    d: usize,
    /// Row-major position in the full matrix of every state-vector entry.
    positions: Vec<usize>,
    /// Nonzero `(to, from, rate)` population transfers.
    transfers: Vec<(usize, usize, f64)>,
    outflow: Vec<f64>,
    /// Decay and rotation of each tracked coherence.
    coherence_rate: Vec<C64>,
}

impl Generator {
    fn new(rho0: &DMatrix<C64>, dressed: &DressedBasis, rates: &RateTable) -> Self {
        let d = dressed.len();
        let mut positions: Vec<usize> = (0..d).map(|m| m * d + m).collect();
        let mut coherence_rate = Vec::new();
        for m in 0..d {
            for n in 0..d {
                if m != n && rho0[(m, n)] != C64::new(0.0, 0.0) {
                    positions.push(m * d + n);
                    coherence_rate.push(C64::new(
                        -0.5 * (rates.outflow[m] + rates.outflow[n]),
                        -(dressed.energies[m] - dressed.energies[n]),
                    ));
                }
            }
        }
        let mut transfers = Vec::new();
        for to in 0..d {
            for from in 0..d {
                let r = rates.transfer[(to, from)];
                if r != 0.0 {
                    transfers.push((to, from, r));
                }
            }
        }
        Generator {
            d,
            positions,
            transfers,
            outflow: rates.outflow.iter().copied().collect(),
            coherence_rate,
        }
    }

    fn gather(&self, m: &DMatrix<C64>) -> Vec<C64> {
        let d = self.d;
        self.positions.iter().map(|&k| m[(k / d, k % d)]).collect()
    }

    fn scatter(&self, populations: &[C64], coherences: &[C64]) -> DressedDensityMatrix {
        let d = self.d;
        let mut m = DMatrix::zeros(d, d);
        for (&k, v) in self.positions.iter().zip(populations.iter().chain(coherences)) {
            m[(k / d, k % d)] = *v;
        }
        // restore exact Hermiticity lost to rounding in the dense output
        for r in 0..d {
            m[(r, r)].im = 0.0;
        }
        for &k in &self.positions[d..] {
            let (r, c) = (k / d, k % d);
            if r < c {
                let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
                m[(r, c)] = avg;
                m[(c, r)] = avg.conj();
            }
        }
        DressedDensityMatrix(m)
    }

    fn apply_populations(&self, y: &[C64], dy: &mut [C64]) {
        for ((out, yk), rate) in dy.iter_mut().zip(y).zip(&self.outflow) {
            *out = C64::new(-rate * yk.re, 0.0);
        }
        for &(to, from, r) in &self.transfers {
            dy[to].re += r * y[from].re;
        }
    }

    fn apply_coherences(&self, y: &[C64], dy: &mut [C64]) {
        for ((out, yk), rate) in dy.iter_mut().zip(y).zip(&self.coherence_rate) {
            *out = rate * yk;
        }
    }
}

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrate the same generator as [`super::propagate`] with an adaptive
/// embedded Runge-Kutta scheme.
pub fn rk_propagate(
    rho0: &DressedDensityMatrix,
    dressed: &DressedBasis,
    rates: &RateTable,
    times: &[f64],
    tol: RkTolerances,
) -> Result<Trajectory> {
    let solution = rk_solve(rho0, dressed, rates, times, tol)?;
    let states = (0..solution.len())
        .map(|i| {
            let s = solution.state(i);
            s.validate(times[i])?;
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

/// Runge-Kutta solution held in compressed form: only the entries the
/// generator can reach are stored, and full density matrices are built on
/// request. At six excitations a dense trajectory of 2001 samples would
/// occupy about 1.7 GB.
pub struct RkSolution {
    generator: Generator,
    populations: Vec<Vec<C64>>,
    coherences: Vec<Vec<C64>>,
}

impl RkSolution {
    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    /// Density matrix at sample `i`, unvalidated.
    pub fn state(&self, i: usize) -> DressedDensityMatrix {
        self.generator.scatter(&self.populations[i], &self.coherences[i])
    }
}

/// Integrate to every sample time and keep the compressed solution.
pub fn rk_solve(
    rho0: &DressedDensityMatrix,
    dressed: &DressedBasis,
    rates: &RateTable,
    times: &[f64],
    tol: RkTolerances,
) -> Result<RkSolution> {
    check_times(times)?;
    rho0.validate(0.0)?;
    let gen = Generator::new(&rho0.0, dressed, rates);
    let mut y = gen.gather(&rho0.0);
    let y_coh = y.split_off(gen.d);
    let populations = dopri5(|y, dy| gen.apply_populations(y, dy), y, times, tol)?;
    let coherences = dopri5(|y, dy| gen.apply_coherences(y, dy), y_coh, times, tol)?;
    Ok(RkSolution {
        generator: gen,
        populations,
        coherences,
    })
}

/// Adaptive Dormand-Prince integration of `y' = f(y)` from `t = 0`,
/// returning the dense-output solution at every sample time.
fn dopri5<F>(f: F, mut y: Vec<C64>, times: &[f64], tol: RkTolerances) -> Result<Vec<Vec<C64>>>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = y.len();
    if n == 0 {
        return Ok(vec![Vec::new(); times.len()]);
    }
    let mut out = Vec::with_capacity(times.len());
    let mut next = 0;
    while next < times.len() && times[next] == 0.0 {
        out.push(y.clone());
        next += 1;
    }

    let zero = C64::new(0.0, 0.0);
    let mut k: Vec<Vec<C64>> = vec![vec![zero; n]; 7];
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut cont: [Vec<C64>; 5] = std::array::from_fn(|_| vec![zero; n]);

    let t_end = times.last().copied().unwrap_or(0.0);
    let mut t = 0.0;
    f(&y, &mut k[0]);
    let mut h = initial_step(&f, &y, &k[0], tol);
    let mut steps = 0;
    let mut err_prev: f64 = 1e-4;

    while next < times.len() {
        if steps >= tol.max_steps || h < tol.h_min {
            return Err(Error::StepUnderflow { time: t, step: h });
        }
        h = h.min(t_end - t).max(tol.h_min);
        steps += 1;

        let (k1, rest) = k.split_first_mut().unwrap();
        let [k2, k3, k4, k5, k6, k7] = rest else { unreachable!() };
        axpy_into(&mut tmp, &y, h, &[(A21, k1)]);
        f(&tmp, k2);
        axpy_into(&mut tmp, &y, h, &[(A31, k1), (A32, k2)]);
        f(&tmp, k3);
        axpy_into(&mut tmp, &y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        f(&tmp, k4);
        axpy_into(&mut tmp, &y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        f(&tmp, k5);
        axpy_into(
            &mut tmp,
            &y,
            h,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
        );
        f(&tmp, k6);
        axpy_into(
            &mut y_new,
            &y,
            h,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
        );
        f(&y_new, k7);

        // max norm: small populations would vanish in an RMS
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sc);
        }

        if err <= 1.0 {
            for i in 0..n {
                let dy = y_new[i] - y[i];
                let bspl = k1[i] * h - dy;
                cont[0][i] = y[i];
                cont[1][i] = dy;
                cont[2][i] = bspl;
                cont[3][i] = dy - k7[i] * h - bspl;
                cont[4][i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
            }
            let t_new = t + h;
            while next < times.len() && times[next] <= t_new * (1.0 + 1e-15) {
                let s = ((times[next] - t) / h).clamp(0.0, 1.0);
                let s1 = 1.0 - s;
                out.push(
                    (0..n)
                        .map(|i| cont[0][i] + (cont[1][i] + (cont[2][i] + (cont[3][i] + cont[4][i] * s1) * s) * s1) * s)
                        .collect(),
                );
                next += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            // PI step-size control
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 10.0);
            err_prev = err.max(1e-4);
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    Ok(out)
}

fn initial_step<F>(f: &F, y: &[C64], f0: &[C64], tol: RkTolerances) -> f64
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = y.len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..y.len() {
        let sc = tol.atol + tol.rtol * y[i].norm();
        d0 += (y[i].norm() / sc).powi(2);
        d1 += (f0[i].norm() / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<C64> = y.iter().zip(f0).map(|(a, b)| a + b * h0).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y.len()];
    f(&y1, &mut f1);
    let mut d2 = 0.0;
    for i in 0..y.len() {
        let sc = tol.atol + tol.rtol * y[i].norm();
        d2 += ((f1[i] - f0[i]).norm() / sc).powi(2);
    }
    let d2 = (d2 / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}
