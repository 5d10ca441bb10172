//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the optimizers under test: the closed forms and
//! grid searches are written directly against the matrix definitions.

#![allow(dead_code)]

use cqed_core::state_io::{bell_diagonal_state, BlochVector, TwoQubitXState};
use cqed_core::C64;
use nalgebra::{Matrix2, Matrix4};
use rand::Rng;

/// Correlation vector drawn uniformly from the Bell-diagonal tetrahedron.
pub fn random_bd_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let c = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if BlochVector::new(c[0], c[1], c[2]).is_ok() {
            return c;
        }
    }
}

pub fn bd_state(c: [f64; 3]) -> TwoQubitXState {
    let b = BlochVector::new(c[0], c[1], c[2]).unwrap();
    TwoQubitXState::from_matrix(&bell_diagonal_state(&b), 1e-12).unwrap()
}

/// Random X state with complex coherences filling a random fraction of the
/// positivity bound.
pub fn random_x_state<R: Rng>(rng: &mut R) -> TwoQubitXState {
    let w: Vec<f64> = (0..4).map(|_| -rng.random_range(1e-12f64..1.0).ln()).collect();
    let total: f64 = w.iter().sum();
    let d = [w[0] / total, w[1] / total, w[2] / total, w[3] / total];
    let r14 = rng.random_range(0.0..1.0) * (d[0] * d[3]).sqrt();
    let r23 = rng.random_range(0.0..1.0) * (d[1] * d[2]).sqrt();
    let a14 = C64::from_polar(r14, rng.random_range(0.0..std::f64::consts::TAU));
    let a23 = C64::from_polar(r23, rng.random_range(0.0..std::f64::consts::TAU));
    TwoQubitXState::new(d, a14, a23).unwrap()
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Closed-form mutual information, classical correlation and discord of a
/// Bell-diagonal state, in bits.
pub fn luo(c: [f64; 3]) -> (f64, f64, f64) {
    let [c1, c2, c3] = c;
    let lambdas = [
        (1.0 - c1 - c2 - c3) / 4.0,
        (1.0 - c1 + c2 + c3) / 4.0,
        (1.0 + c1 - c2 + c3) / 4.0,
        (1.0 + c1 + c2 - c3) / 4.0,
    ];
    let mi = 2.0 + lambdas.iter().map(|&l| plogp(l)).sum::<f64>();
    let cmax = c1.abs().max(c2.abs()).max(c3.abs());
    let cc = plogp((1.0 - cmax) / 2.0) + plogp((1.0 + cmax) / 2.0) + 1.0;
    (mi, cc, mi - cc)
}

fn hermitian_sqrt(m: &Matrix4<C64>) -> Matrix4<C64> {
    let eig = m.symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Best fidelity to a classical-quantum state whose classical basis on qubit
/// A is the eigenbasis of `n . sigma`: half of one plus the spread between
/// the two largest and two smallest eigenvalues of
/// `sqrt(rho) (n . sigma (x) 1) sqrt(rho)`.
fn basis_fidelity(root: &Matrix4<C64>, theta: f64, phi: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let n_sigma = Matrix2::new(
        C64::new(ct, 0.0),
        C64::new(st * cp, -st * sp),
        C64::new(st * cp, st * sp),
        C64::new(-ct, 0.0),
    );
    let op = n_sigma.kronecker(&Matrix2::<C64>::identity());
    let lambda = root * op * root;
    let mut ev: Vec<f64> = lambda.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    0.5 * (1.0 + ev[0] + ev[1] - ev[2] - ev[3])
}

/// Normalized Bures geometric discord by a dense search over measurement
/// directions on qubit A, refined by two successively finer local grids.
pub fn gqd_grid_oracle(x: &TwoQubitXState) -> f64 {
    use std::f64::consts::{FRAC_PI_2, TAU};
    let root = hermitian_sqrt(&x.to_matrix());
    let (nt, np) = (91usize, 360usize);
    let (ht, hp) = (FRAC_PI_2 / (nt - 1) as f64, TAU / np as f64);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..nt {
        for j in 0..np {
            let (t, p) = (i as f64 * ht, j as f64 * hp);
            let f = basis_fidelity(&root, t, p);
            if f > best.0 {
                best = (f, t, p);
            }
        }
    }
    let (mut st, mut sp) = (ht, hp);
    for _ in 0..3 {
        let (_, t0, p0) = best;
        for i in -10..=10 {
            for j in -10..=10 {
                let (t, p) = (t0 + i as f64 * st / 10.0, p0 + j as f64 * sp / 10.0);
                let f = basis_fidelity(&root, t, p);
                if f > best.0 {
                    best = (f, t, p);
                }
            }
        }
        st /= 10.0;
        sp /= 10.0;
    }
    let f = best.0.min(1.0);
    (1.0 - f.sqrt()) / (1.0 - std::f64::consts::FRAC_1_SQRT_2)
}
