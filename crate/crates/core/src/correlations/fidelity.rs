//! Uhlmann fidelity `F(rho, sigma) = [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2`.

use nalgebra::{DMatrix, Matrix4};

use super::entropy::{sqrt_psd4, trace_sqrt4};
use crate::C64;

/// Uhlmann fidelity of two density matrices of any dimension.
pub fn uhlmann_fidelity(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    let eig = rho.clone().symmetric_eigen();
    let n = rho.nrows();
    let mut d = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = C64::new(eig.eigenvalues[i].max(0.0).sqrt(), 0.0);
    }
    let root = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
    let m = &root * sigma * &root;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let s: f64 = m.symmetric_eigenvalues().iter().map(|l| l.max(0.0).sqrt()).sum();
    (s * s).min(1.0)
}

/// Fidelity against a fixed two-qubit state, reusing `sqrt(rho)`.
#[derive(Debug, Clone, Copy)]
pub struct FidelityTarget {
    root: Matrix4<C64>,
}

impl FidelityTarget {
    pub fn new(rho: &Matrix4<C64>) -> Self {
        FidelityTarget { root: sqrt_psd4(rho) }
    }

    /// `sqrt(F(rho, sigma))`.
    pub fn root_fidelity(&self, sigma: &Matrix4<C64>) -> f64 {
        let m = self.root * sigma * self.root;
        let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
        trace_sqrt4(&m)
    }

    pub fn fidelity(&self, sigma: &Matrix4<C64>) -> f64 {
        self.root_fidelity(sigma).powi(2).min(1.0)
    }
}

/// Fidelity of two two-qubit states.
pub fn fidelity4(rho: &Matrix4<C64>, sigma: &Matrix4<C64>) -> f64 {
    FidelityTarget::new(rho).fidelity(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::entropy::{kron2, qubit_state};
    use nalgebra::Vector3;

    fn dm(m: &Matrix4<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
    }

    #[test]
    fn identical_and_orthogonal() {
        let rho = kron2(
            &qubit_state(&Vector3::new(0.2, 0.3, 0.1)),
            &qubit_state(&Vector3::new(-0.5, 0.0, 0.4)),
        );
        assert!((uhlmann_fidelity(&dm(&rho), &dm(&rho)) - 1.0).abs() < 1e-12);
        assert!((fidelity4(&rho, &rho) - 1.0).abs() < 1e-12);
        let mut a = Matrix4::<C64>::zeros();
        a[(0, 0)] = C64::new(1.0, 0.0);
        let mut b = Matrix4::<C64>::zeros();
        b[(3, 3)] = C64::new(1.0, 0.0);
        assert!(fidelity4(&a, &b).abs() < 1e-14);
        assert!(uhlmann_fidelity(&dm(&a), &dm(&b)).abs() < 1e-14);
    }

    #[test]
    fn pure_against_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, s),
        ];
        let pure = Matrix4::from_fn(|i, j| psi[i] * psi[j].conj());
        let sigma = kron2(
            &qubit_state(&Vector3::new(0.1, 0.6, 0.2)),
            &qubit_state(&Vector3::new(0.3, -0.2, -0.1)),
        );
        let expect: C64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| psi[i].conj() * sigma[(i, j)] * psi[j])
            .sum();
        // rank-deficient inputs lose accuracy to sqrt of rounding-level eigenvalues
        assert!((fidelity4(&pure, &sigma) - expect.re).abs() < 1e-7);
        assert!((fidelity4(&sigma, &pure) - expect.re).abs() < 1e-7);
    }

    #[test]
    fn commuting_states_use_classical_fidelity() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.25, 0.25, 0.4, 0.1];
        let a = Matrix4::from_fn(|i, j| {
            if i == j {
                C64::new(p[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let b = Matrix4::from_fn(|i, j| {
            if i == j {
                C64::new(q[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let bc: f64 = p.iter().zip(q).map(|(x, y)| (x * y).sqrt()).sum();
        assert!((fidelity4(&a, &b) - bc * bc).abs() < 1e-14);
    }
}
