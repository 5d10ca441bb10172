//! Relative entropy of entanglement and geometric (Bures) entanglement.
//!
//! Both objectives are invariant under the `sigma_z (x) sigma_z` twirl and
//! under complex conjugation once the local phases of the X state have been
//! removed, and the separable set is invariant under both. Averaging any
//! optimal separable state over these symmetries therefore gives an optimal
//! state that is a real X state, so the search runs over real separable X
//! states. Extreme points of that set are twirled product states, and the
//! linear maximization oracle reduces to a one-dimensional search.
//!
//! The separable real X states are also described explicitly: populations on
//! the simplex and both coherences bounded by `sqrt(min(d1 d4, d2 d3))`. A
//! simplex search over that parametrization finds the optimum quickly. It is
//! then handed to a fully corrective conditional-gradient method, which adds
//! oracle atoms and re-optimizes the weights of all active atoms until the
//! duality gap of the last linearization certifies the result.

use std::f64::consts::{FRAC_PI_2, LN_2};

use serde::{Deserialize, Serialize};

use super::bures::BELL_NORMALIZATION;
use super::optimize::{golden_max, nelder_mead, SimplexOptions};
use super::{Certificate, MeasureResult};
use crate::state_io::TwoQubitXState;
use crate::C64;

/// Separability test slack on the partial-transpose conditions.
pub const PPT_SLACK: f64 = 1e-14;
/// Eigenvalue floor inside derivatives of `log` and `det`.
const EIGENVALUE_FLOOR: f64 = 1e-15;

/// Conditional-gradient settings shared by REE and GE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntanglementOptions {
    /// Stop when the duality gap (bits for REE, root fidelity for GE) is below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Grid points per angle of the product-state lower-bound oracle.
    pub oracle_grid: usize,
    /// Flag GE when it exceeds the oracle bound by more than this.
    pub flag_tolerance: f64,
}

impl Default for EntanglementOptions {
    fn default() -> Self {
        EntanglementOptions {
            tolerance: 1e-6,
            max_iterations: 500,
            oracle_grid: 101,
            flag_tolerance: 1e-3,
        }
    }
}

/// Real symmetric 2x2 matrix `[[p, q], [q, r]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sym2 {
    p: f64,
    q: f64,
    r: f64,
}

impl Sym2 {
    fn trace(&self) -> f64 {
        self.p + self.r
    }

    fn det(&self) -> f64 {
        self.p * self.r - self.q * self.q
    }

    /// Eigenvalues (descending) and the rotation angle of the eigenvectors
    /// `(cos t, sin t)`, `(-sin t, cos t)`.
    fn eigen(&self) -> ([f64; 2], f64) {
        let m = (self.p + self.r) / 2.0;
        let d = ((self.p - self.r) / 2.0).hypot(self.q);
        let l1 = m + d;
        let l2 = if l1 > 0.0 { self.det() / l1 } else { m - d };
        ([l1, l2], 0.5 * (2.0 * self.q).atan2(self.p - self.r))
    }

    /// `[v1^T A v1, v1^T A v2, v2^T A v2]` in the eigenbasis of `self`.
    fn rotate(a: &Sym2, t: f64) -> [f64; 3] {
        let (c, s) = (t.cos(), t.sin());
        let a11 = c * c * a.p + 2.0 * c * s * a.q + s * s * a.r;
        let a22 = s * s * a.p - 2.0 * c * s * a.q + c * c * a.r;
        let a12 = -c * s * a.p + (c * c - s * s) * a.q + c * s * a.r;
        [a11, a12, a22]
    }

    /// Inverse of [`Sym2::rotate`].
    fn unrotate(m: [f64; 3], t: f64) -> Sym2 {
        let (c, s) = (t.cos(), t.sin());
        let [m11, m12, m22] = m;
        Sym2 {
            p: c * c * m11 - 2.0 * c * s * m12 + s * s * m22,
            q: c * s * m11 + (c * c - s * s) * m12 - c * s * m22,
            r: s * s * m11 + 2.0 * c * s * m12 + c * c * m22,
        }
    }
}

/// Real X state: populations of `|ee>, |eg>, |ge>, |gg>` and real coherences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealX {
    pub d: [f64; 4],
    pub a14: f64,
    pub a23: f64,
}

impl RealX {
    /// The state with both coherence phases removed by local `z` rotations.
    pub fn dephased(x: &TwoQubitXState) -> Self {
        RealX {
            d: x.d,
            a14: x.a14.norm(),
            a23: x.a23.norm(),
        }
    }

    pub fn maximally_mixed() -> Self {
        RealX {
            d: [0.25; 4],
            a14: 0.0,
            a23: 0.0,
        }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        RealX {
            d: [v[0], v[1], v[2], v[3]],
            a14: v[4],
            a23: v[5],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.d[0], self.d[1], self.d[2], self.d[3], self.a14, self.a23]
    }

    pub fn to_x_state(&self) -> TwoQubitXState {
        TwoQubitXState {
            d: self.d,
            a14: C64::new(self.a14, 0.0),
            a23: C64::new(self.a23, 0.0),
        }
    }

    fn blocks(&self) -> [Sym2; 2] {
        [
            Sym2 {
                p: self.d[0],
                q: self.a14,
                r: self.d[3],
            },
            Sym2 {
                p: self.d[1],
                q: self.a23,
                r: self.d[2],
            },
        ]
    }

    fn from_blocks(b: [Sym2; 2]) -> Self {
        RealX {
            d: [b[0].p, b[1].p, b[1].r, b[0].r],
            a14: b[0].q,
            a23: b[1].q,
        }
    }

    /// Frobenius inner product of the full 4x4 matrices.
    pub fn dot(&self, other: &RealX) -> f64 {
        self.d.iter().zip(&other.d).map(|(a, b)| a * b).sum::<f64>()
            + 2.0 * (self.a14 * other.a14 + self.a23 * other.a23)
    }

    fn axpy(&mut self, w: f64, other: &RealX) {
        for k in 0..4 {
            self.d[k] += w * other.d[k];
        }
        self.a14 += w * other.a14;
        self.a23 += w * other.a23;
    }

    /// Positive partial transpose, which for two qubits is separability.
    pub fn is_ppt(&self) -> bool {
        self.a14 * self.a14 <= self.d[1] * self.d[2] + PPT_SLACK
            && self.a23 * self.a23 <= self.d[0] * self.d[3] + PPT_SLACK
    }

    fn pinched(&self) -> Self {
        RealX {
            d: self.d,
            a14: 0.0,
            a23: 0.0,
        }
    }
}

/// Map unconstrained coordinates onto the separable real X states.
fn separable_from(x: &[f64]) -> RealX {
    let norm: f64 = x[..4].iter().map(|v| v * v).sum();
    if norm.is_nan() || norm <= 0.0 {
        return RealX::maximally_mixed();
    }
    let d = [
        x[0] * x[0] / norm,
        x[1] * x[1] / norm,
        x[2] * x[2] / norm,
        x[3] * x[3] / norm,
    ];
    let bound = (d[0] * d[3]).min(d[1] * d[2]).sqrt();
    RealX {
        d,
        a14: bound * x[4].sin(),
        a23: bound * x[5].sin(),
    }
}

/// Coordinates of a separable real X state under [`separable_from`].
fn separable_coordinates(s: &RealX) -> Vec<f64> {
    let bound = (s.d[0] * s.d[3]).min(s.d[1] * s.d[2]).max(0.0).sqrt();
    let angle = |a: f64| {
        if bound > 0.0 {
            (a / bound).clamp(-1.0, 1.0).asin()
        } else {
            0.0
        }
    };
    let mut x: Vec<f64> = s.d.iter().map(|v| v.max(0.0).sqrt()).collect();
    x.push(angle(s.a14));
    x.push(angle(s.a23));
    x
}

/// Populations of `rho` with both coherences clipped to the separable bound.
fn clipped(rho: &RealX) -> RealX {
    let bound = (rho.d[0] * rho.d[3]).min(rho.d[1] * rho.d[2]).max(0.0).sqrt();
    RealX {
        d: rho.d,
        a14: rho.a14.clamp(-bound, bound),
        a23: rho.a23.clamp(-bound, bound),
    }
}

/// Simplex search over the explicit parametrization from a few starts.
fn direct_search<O: Objective>(obj: &O, rho: &RealX) -> RealX {
    let options = SimplexOptions {
        f_tolerance: 1e-15,
        x_tolerance: 1e-10,
        max_evaluations: 6000,
    };
    let mut best = (f64::NEG_INFINITY, RealX::maximally_mixed());
    for start in [clipped(rho), RealX::maximally_mixed()] {
        let x0 = separable_coordinates(&start);
        let mut x = x0.clone();
        // A restart from the first optimum shakes off simplex collapse.
        for _ in 0..2 {
            let r = nelder_mead(|x| -obj.value(&separable_from(x)), &x, &[0.1; 6], options);
            x = r.x;
        }
        let s = separable_from(&x);
        let v = obj.value(&s);
        if v > best.0 {
            best = (v, s);
        }
    }
    best.1
}

fn combine(atoms: &[RealX], w: &[f64]) -> RealX {
    let mut s = RealX {
        d: [0.0; 4],
        a14: 0.0,
        a23: 0.0,
    };
    for (a, wk) in atoms.iter().zip(w) {
        s.axpy(*wk, a);
    }
    s
}

/// Twirled product state for the angles `(a, b)` with coherence signs
/// matched to `g`.
fn product_atom(a: f64, b: f64, g: &RealX) -> RealX {
    let (ca, sa, cb, sb) = (a.cos(), a.sin(), b.cos(), b.sin());
    let m = ca * sa * cb * sb;
    RealX {
        d: [
            ca * ca * cb * cb,
            ca * ca * sb * sb,
            sa * sa * cb * cb,
            sa * sa * sb * sb,
        ],
        a14: if g.a14 < 0.0 { -m } else { m },
        a23: if g.a23 < 0.0 { -m } else { m },
    }
}

/// For fixed `a`, the best `b` is the top eigenvector of a 2x2 matrix.
fn best_partner(a: f64, g: &RealX) -> (f64, f64) {
    let (ca, sa) = (a.cos(), a.sin());
    let k = g.a14.abs() + g.a23.abs();
    let m = Sym2 {
        p: g.d[0] * ca * ca + g.d[2] * sa * sa,
        q: k * ca * sa,
        r: g.d[1] * ca * ca + g.d[3] * sa * sa,
    };
    let ([l1, _], t) = m.eigen();
    // eigenvector (cos t, sin t) up to sign; fold into [0, pi/2]
    let mut b = t.rem_euclid(std::f64::consts::PI);
    if b > FRAC_PI_2 {
        b = std::f64::consts::PI - b;
    }
    (b, l1)
}

/// Linear maximization oracle: the twirled product state maximizing `<g, s>`.
fn product_oracle(g: &RealX) -> RealX {
    let n = 64;
    let mut best = (f64::NEG_INFINITY, 0usize);
    for i in 0..=n {
        let a = FRAC_PI_2 * i as f64 / n as f64;
        let v = best_partner(a, g).1;
        if v > best.0 {
            best = (v, i);
        }
    }
    let h = FRAC_PI_2 / n as f64;
    let lo = (best.1 as f64 - 1.0).max(0.0) * h;
    let hi = ((best.1 as f64 + 1.0) * h).min(FRAC_PI_2);
    let (mut a, v) = golden_max(|a| best_partner(a, g).1, lo, hi, 1e-12);
    if v < best.0 {
        a = best.1 as f64 * h;
    }
    let (b, _) = best_partner(a, g);
    product_atom(a, b, g)
}

/// Largest overlap `<ab| rho |ab>` over product states, on a grid.
pub fn product_overlap_grid(rho: &RealX, points: usize) -> f64 {
    let n = points.max(2) - 1;
    let mut best: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            let a = FRAC_PI_2 * i as f64 / n as f64;
            let b = FRAC_PI_2 * j as f64 / n as f64;
            best = best.max(rho.dot(&product_atom(a, b, rho)));
        }
    }
    best
}

fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, uk) in u.iter().enumerate() {
        cumulative += uk;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Concave objective over separable real X states.
trait Objective {
    fn value(&self, s: &RealX) -> f64;
    fn gradient(&self, s: &RealX) -> RealX;
}

/// `-D(rho || sigma)` in nats.
struct NegRelativeEntropy {
    rho: [Sym2; 2],
    entropy_term: f64,
}

impl NegRelativeEntropy {
    fn new(rho: &RealX) -> Self {
        let blocks = rho.blocks();
        let entropy_term = blocks
            .iter()
            .map(|b| {
                let (l, _) = b.eigen();
                l.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
            })
            .sum();
        NegRelativeEntropy {
            rho: blocks,
            entropy_term,
        }
    }
}

impl Objective for NegRelativeEntropy {
    fn value(&self, s: &RealX) -> f64 {
        let mut cross = 0.0;
        for (a, b) in self.rho.iter().zip(s.blocks()) {
            if a.trace() <= 0.0 {
                continue;
            }
            let (mu, t) = b.eigen();
            let [a11, _, a22] = Sym2::rotate(a, t);
            for (w, m) in [(a11, mu[0]), (a22, mu[1])] {
                if w <= 1e-300 {
                    continue;
                }
                if m <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                cross += w * m.ln();
            }
        }
        -(self.entropy_term - cross)
    }

    fn gradient(&self, s: &RealX) -> RealX {
        let mut out = [Sym2 { p: 0.0, q: 0.0, r: 0.0 }; 2];
        for (k, (a, b)) in self.rho.iter().zip(s.blocks()).enumerate() {
            if a.trace() <= 0.0 {
                continue;
            }
            let (mu, t) = b.eigen();
            let (m1, m2) = (mu[0].max(EIGENVALUE_FLOOR), mu[1].max(EIGENVALUE_FLOOR));
            let [a11, a12, a22] = Sym2::rotate(a, t);
            let l12 = if (m1 - m2).abs() > 1e-12 * m1 {
                (m1.ln() - m2.ln()) / (m1 - m2)
            } else {
                2.0 / (m1 + m2)
            };
            out[k] = Sym2::unrotate([a11 / m1, a12 * l12, a22 / m2], t);
        }
        RealX::from_blocks(out)
    }
}

/// `sqrt(F(rho, sigma))`, using the 2x2 identity
/// `Tr sqrt(sqrt(A) B sqrt(A)) = sqrt(Tr(AB) + 2 sqrt(det A det B))`.
struct RootFidelity {
    rho: [Sym2; 2],
}

fn block_product(a: &Sym2, b: &Sym2) -> f64 {
    a.p * b.p + 2.0 * a.q * b.q + a.r * b.r
}

impl Objective for RootFidelity {
    fn value(&self, s: &RealX) -> f64 {
        self.rho
            .iter()
            .zip(s.blocks())
            .map(|(a, b)| {
                let inner = block_product(a, &b) + 2.0 * (a.det().max(0.0) * b.det().max(0.0)).sqrt();
                inner.max(0.0).sqrt()
            })
            .sum()
    }

    fn gradient(&self, s: &RealX) -> RealX {
        let mut out = [Sym2 { p: 0.0, q: 0.0, r: 0.0 }; 2];
        for (k, (a, b)) in self.rho.iter().zip(s.blocks()).enumerate() {
            let da = a.det().max(0.0);
            let db = b.det().max(0.0);
            let root = (block_product(a, &b) + 2.0 * (da * db).sqrt()).max(0.0).sqrt();
            if root <= 0.0 {
                continue;
            }
            let ratio = if da > 0.0 {
                (da / db.max(EIGENVALUE_FLOOR * EIGENVALUE_FLOOR)).sqrt()
            } else {
                0.0
            };
            // d det B / dB = adj(B)
            out[k] = Sym2 {
                p: (a.p + ratio * b.r) / (2.0 * root),
                q: (a.q - ratio * b.q) / (2.0 * root),
                r: (a.r + ratio * b.p) / (2.0 * root),
            };
        }
        RealX::from_blocks(out)
    }
}

/// Outcome of a conditional-gradient run.
#[derive(Debug, Clone)]
struct Solution {
    sigma: RealX,
    value: f64,
    gap: f64,
}

fn conditional_gradient<O: Objective>(obj: &O, start: &[RealX], options: &EntanglementOptions) -> Solution {
    let mut atoms: Vec<RealX> = start.to_vec();
    let mut w = vec![1.0 / atoms.len() as f64; atoms.len()];
    let mut step = 1.0;
    let mut gap = f64::INFINITY;
    for _ in 0..options.max_iterations {
        correct_weights(obj, &atoms, &mut w, &mut step);
        // drop inactive atoms
        let keep: Vec<usize> = (0..atoms.len()).filter(|&k| w[k] > 1e-14).collect();
        atoms = keep.iter().map(|&k| atoms[k]).collect();
        w = keep.iter().map(|&k| w[k]).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);

        let sigma = combine(&atoms, &w);
        let g = obj.gradient(&sigma);
        let s = product_oracle(&g);
        gap = g.dot(&s) - g.dot(&sigma);
        if gap <= options.tolerance {
            break;
        }
        atoms.push(s);
        w.push(0.0);
    }
    let sigma = combine(&atoms, &w);
    Solution {
        value: obj.value(&sigma),
        sigma,
        gap: gap.max(0.0),
    }
}

/// Projected-gradient ascent on the simplex of atom weights.
fn correct_weights<O: Objective>(obj: &O, atoms: &[RealX], w: &mut Vec<f64>, step: &mut f64) {
    let mut f = obj.value(&combine(atoms, w));
    for _ in 0..300 {
        let g = obj.gradient(&combine(atoms, w));
        let gw: Vec<f64> = atoms.iter().map(|a| g.dot(a)).collect();
        let mut accepted = false;
        while *step > 1e-18 {
            let mut trial: Vec<f64> = w.iter().zip(&gw).map(|(x, d)| x + *step * d).collect();
            project_simplex(&mut trial);
            let ascent: f64 = trial.iter().zip(w.iter()).zip(&gw).map(|((t, x), d)| (t - x) * d).sum();
            let ft = obj.value(&combine(atoms, &trial));
            if ft.is_finite() && ft >= f + 1e-4 * ascent {
                let improvement = ft - f;
                *w = trial;
                f = ft;
                *step *= 2.0;
                accepted = improvement > 1e-16 * (1.0 + f.abs());
                break;
            }
            *step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    *step = step.max(1e-6);
}

/// REE in bits; the argument is the closest separable real X state in the
/// dephased frame.
pub fn ree(x: &TwoQubitXState, options: &EntanglementOptions) -> MeasureResult {
    let rho = RealX::dephased(x);
    let obj = NegRelativeEntropy::new(&rho);
    let upper = -obj.value(&rho.pinched()) / LN_2;
    if rho.is_ppt() {
        return MeasureResult {
            value: 0.0,
            argument: rho.to_vec(),
            certificate: Some(Certificate {
                bound: upper,
                gap: 0.0,
                flagged: false,
            }),
        };
    }
    let sol = conditional_gradient(&obj, &[direct_search(&obj, &rho)], options);
    let value = (-sol.value / LN_2).max(0.0);
    let gap = sol.gap / LN_2;
    MeasureResult {
        value,
        argument: sol.sigma.to_vec(),
        certificate: Some(Certificate {
            bound: upper,
            gap,
            flagged: gap > options.tolerance || value > upper + 1e-9,
        }),
    }
}

/// Re-evaluate `D(rho || sigma)` in bits for a REE argument.
pub fn ree_at(x: &TwoQubitXState, sigma: &[f64]) -> f64 {
    let rho = RealX::dephased(x);
    (-NegRelativeEntropy::new(&rho).value(&RealX::from_slice(sigma)) / LN_2).max(0.0)
}

/// Geometric entanglement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GeOutcome {
    /// `(1 - sqrt(F_sep)) / (1 - sqrt(1/2))`.
    pub normalized: MeasureResult,
    /// `2 (1 - sqrt(F_sep))`.
    pub raw: f64,
    pub fidelity: f64,
}

fn normalize(root: f64) -> f64 {
    ((1.0 - root) * BELL_NORMALIZATION).max(0.0)
}

/// Geometric entanglement: Bures distance to the separable set.
pub fn geometric_entanglement(x: &TwoQubitXState, options: &EntanglementOptions) -> GeOutcome {
    let rho = RealX::dephased(x);
    let obj = RootFidelity { rho: rho.blocks() };
    let oracle_root = product_overlap_grid(&rho, options.oracle_grid).sqrt();
    let bound = normalize(oracle_root);
    if rho.is_ppt() {
        return GeOutcome {
            normalized: MeasureResult {
                value: 0.0,
                argument: rho.to_vec(),
                certificate: Some(Certificate {
                    bound,
                    gap: 0.0,
                    flagged: false,
                }),
            },
            raw: 0.0,
            fidelity: 1.0,
        };
    }
    let sol = conditional_gradient(&obj, &[direct_search(&obj, &rho)], options);
    let root = sol.value.min(1.0);
    let value = normalize(root);
    GeOutcome {
        normalized: MeasureResult {
            value,
            argument: sol.sigma.to_vec(),
            certificate: Some(Certificate {
                bound,
                gap: sol.gap * BELL_NORMALIZATION,
                flagged: value > bound + options.flag_tolerance,
            }),
        },
        raw: (2.0 * (1.0 - root)).max(0.0),
        fidelity: root * root,
    }
}

/// Re-evaluate the normalized GE for a GE argument.
pub fn geometric_entanglement_at(x: &TwoQubitXState, sigma: &[f64]) -> f64 {
    let rho = RealX::dephased(x);
    normalize(
        RootFidelity { rho: rho.blocks() }
            .value(&RealX::from_slice(sigma))
            .min(1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::fidelity::fidelity4;
    use crate::state_io::{bell_diagonal_state, BlochVector};

    fn bd(c1: f64, c2: f64, c3: f64) -> TwoQubitXState {
        TwoQubitXState::from_matrix(&bell_diagonal_state(&BlochVector::new(c1, c2, c3).unwrap()), 1e-12).unwrap()
    }

    fn binary_entropy(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    #[test]
    fn sym2_eigen_and_rotation() {
        let s = Sym2 {
            p: 0.3,
            q: -0.2,
            r: 0.1,
        };
        let ([l1, l2], t) = s.eigen();
        assert!((l1 + l2 - 0.4).abs() < 1e-15 && (l1 * l2 - s.det()).abs() < 1e-15);
        let [m11, m12, m22] = Sym2::rotate(&s, t);
        assert!((m11 - l1).abs() < 1e-15 && m12.abs() < 1e-15 && (m22 - l2).abs() < 1e-15);
        let back = Sym2::unrotate([m11, m12, m22], t);
        assert!((back.p - s.p).abs() < 1e-15 && (back.q - s.q).abs() < 1e-15 && (back.r - s.r).abs() < 1e-15);
    }

    #[test]
    fn block_fidelity_matches_general_formula() {
        let a = TwoQubitXState::new([0.4, 0.1, 0.2, 0.3], C64::new(0.3, 0.0), C64::new(0.1, 0.0)).unwrap();
        let b = TwoQubitXState::new([0.25, 0.3, 0.2, 0.25], C64::new(-0.1, 0.0), C64::new(0.2, 0.0)).unwrap();
        let obj = RootFidelity {
            rho: RealX::dephased(&a).blocks(),
        };
        let sb = RealX {
            d: b.d,
            a14: b.a14.re,
            a23: b.a23.re,
        };
        let f = obj.value(&sb).powi(2);
        assert!((f - fidelity4(&a.to_matrix(), &b.to_matrix())).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let rho = RealX {
            d: [0.4, 0.1, 0.2, 0.3],
            a14: 0.3,
            a23: 0.1,
        };
        let s = RealX {
            d: [0.3, 0.2, 0.25, 0.25],
            a14: 0.05,
            a23: 0.1,
        };
        let dir = RealX {
            d: [0.1, -0.05, 0.02, -0.07],
            a14: 0.03,
            a23: -0.02,
        };
        let h = 1e-6;
        let check = |obj: &dyn Objective| {
            let mut plus = s;
            plus.axpy(h, &dir);
            let mut minus = s;
            minus.axpy(-h, &dir);
            let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * h);
            let an = obj.gradient(&s).dot(&dir);
            assert!((fd - an).abs() < 1e-7, "{fd} vs {an}");
        };
        check(&NegRelativeEntropy::new(&rho));
        check(&RootFidelity { rho: rho.blocks() });
    }

    #[test]
    fn oracle_atoms_are_separable_states() {
        let g = RealX {
            d: [0.1, -0.3, 0.5, 0.2],
            a14: -0.4,
            a23: 0.25,
        };
        let s = product_oracle(&g);
        assert!((s.d.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(s.is_ppt());
        // the oracle beats every grid product state
        let grid_best = product_overlap_grid(&g, 201);
        assert!(g.dot(&s) >= grid_best - 1e-12);
    }

    #[test]
    fn bell_state_values() {
        let bell = bd(1.0, -1.0, 1.0);
        let o = EntanglementOptions::default();
        let r = ree(&bell, &o);
        assert!((r.value - 1.0).abs() < 1e-4, "{}", r.value);
        let ge = geometric_entanglement(&bell, &o);
        assert!((ge.fidelity - 0.5).abs() < 1e-6);
        assert!((ge.normalized.value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn werner_like_closed_form() {
        // BD states with largest weight lambda >= 1/2 have REE = 1 - h(lambda)
        for c in [(0.8, -0.8, 0.8), (1.0, -0.6, 0.6), (0.9, -0.7, 0.6)] {
            let x = bd(c.0, c.1, c.2);
            let lam = BlochVector::new(c.0, c.1, c.2)
                .unwrap()
                .eigenvalues()
                .into_iter()
                .fold(0.0, f64::max);
            let r = ree(&x, &EntanglementOptions::default());
            assert!(
                (r.value - (1.0 - binary_entropy(lam))).abs() < 1e-5,
                "{c:?}: {} vs {}",
                r.value,
                1.0 - binary_entropy(lam)
            );
        }
    }

    #[test]
    fn separable_states_score_zero() {
        let x = bd(0.5, -0.3, 0.2);
        assert!(RealX::dephased(&x).is_ppt());
        let o = EntanglementOptions::default();
        assert_eq!(ree(&x, &o).value, 0.0);
        assert_eq!(geometric_entanglement(&x, &o).normalized.value, 0.0);
    }

    #[test]
    fn arguments_reproduce_values() {
        let x = TwoQubitXState::new([0.45, 0.05, 0.1, 0.4], C64::new(0.0, 0.3), C64::new(0.02, 0.0)).unwrap();
        let o = EntanglementOptions::default();
        let r = ree(&x, &o);
        assert!((ree_at(&x, &r.argument) - r.value).abs() < 1e-10);
        let g = geometric_entanglement(&x, &o);
        assert!((geometric_entanglement_at(&x, &g.normalized.argument) - g.normalized.value).abs() < 1e-10);
        assert!(RealX::from_slice(&r.argument).is_ppt());
        assert!(!g.normalized.certificate.unwrap().flagged);
    }
}
