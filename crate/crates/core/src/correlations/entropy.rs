//! Spectra, entropies, partial traces and Pauli decompositions of small
//! density matrices.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen, Vector3};

use crate::C64;

/// Eigenvalues at or below this are treated as exact zeros in `0 log 0`.
pub const ZERO_EIGENVALUE: f64 = 0.0;

/// `-sum p log2 p` over a spectrum, ignoring non-positive entries.
pub fn entropy_of_spectrum<I: IntoIterator<Item = f64>>(spectrum: I) -> f64 {
    spectrum
        .into_iter()
        .filter(|&p| p > ZERO_EIGENVALUE)
        .map(|p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy in bits of a Hermitian density matrix.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> f64 {
    entropy_of_spectrum(rho.symmetric_eigenvalues().iter().copied())
}

/// Von Neumann entropy in bits of a two-qubit density matrix.
pub fn entropy4(rho: &Matrix4<C64>) -> f64 {
    entropy_of_spectrum(spectrum4(rho))
}

/// Entropy in bits of a qubit with Bloch vector length `r`.
pub fn qubit_entropy(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    entropy_of_spectrum([(1.0 + r) / 2.0, (1.0 - r) / 2.0])
}

/// Binary entropy `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of_spectrum([p, 1.0 - p])
}

/// Eigenvalues of a Hermitian 4x4 matrix in ascending order.
pub fn spectrum4(m: &Matrix4<C64>) -> [f64; 4] {
    let ev = m.symmetric_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(f64::total_cmp);
    out
}

/// Positive square root of a positive semidefinite Hermitian 4x4 matrix.
/// Slightly negative eigenvalues from rounding are clipped to zero.
pub fn sqrt_psd4(m: &Matrix4<C64>) -> Matrix4<C64> {
    let eig = SymmetricEigen::new(*m);
    let mut d = Matrix4::<C64>::zeros();
    for i in 0..4 {
        d[(i, i)] = C64::new(eig.eigenvalues[i].max(0.0).sqrt(), 0.0);
    }
    eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Trace of the positive square root of a positive semidefinite 4x4 matrix.
pub fn trace_sqrt4(m: &Matrix4<C64>) -> f64 {
    spectrum4(m).iter().map(|l| l.max(0.0).sqrt()).sum()
}

/// Reduced state of the first qubit.
pub fn partial_trace_b(rho: &Matrix4<C64>) -> Matrix2<C64> {
    Matrix2::from_fn(|a, b| rho[(2 * a, 2 * b)] + rho[(2 * a + 1, 2 * b + 1)])
}

/// Reduced state of the second qubit.
pub fn partial_trace_a(rho: &Matrix4<C64>) -> Matrix2<C64> {
    Matrix2::from_fn(|a, b| rho[(a, b)] + rho[(2 + a, 2 + b)])
}

/// Pauli matrices `sigma_x, sigma_y, sigma_z` with `|e> = (1, 0)`.
pub fn pauli() -> [Matrix2<C64>; 3] {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        Matrix2::new(o, one, one, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(one, o, o, -one),
    ]
}

/// Kronecker product of two qubit operators, first factor on qubit A.
pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Qubit density matrix with Bloch vector `r`.
pub fn qubit_state(r: &Vector3<f64>) -> Matrix2<C64> {
    let p = pauli();
    let mut m = Matrix2::identity() * C64::new(0.5, 0.0);
    for k in 0..3 {
        m += p[k] * C64::new(r[k] / 2.0, 0.0);
    }
    m
}

/// Bloch vector of a qubit operator (`Tr(m sigma_k)`).
pub fn bloch_vector(m: &Matrix2<C64>) -> Vector3<f64> {
    let p = pauli();
    Vector3::from_fn(|k, _| (m * p[k]).trace().re)
}

/// Pauli decomposition
/// `rho = [I + a.sigma (x) I + I (x) b.sigma + sum T_ij sigma_i (x) sigma_j] / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliDecomposition {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub t: nalgebra::Matrix3<f64>,
}

impl PauliDecomposition {
    pub fn of(rho: &Matrix4<C64>) -> Self {
        let p = pauli();
        let id = Matrix2::<C64>::identity();
        let a = Vector3::from_fn(|i, _| (rho * kron2(&p[i], &id)).trace().re);
        let b = Vector3::from_fn(|j, _| (rho * kron2(&id, &p[j])).trace().re);
        let t = nalgebra::Matrix3::from_fn(|i, j| (rho * kron2(&p[i], &p[j])).trace().re);
        PauliDecomposition { a, b, t }
    }
}
