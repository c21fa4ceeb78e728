//! Dense complex vectors and matrices, Hermitian eigendecomposition and
//! unitary exponentials for small Hilbert spaces (dim ≲ 64).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub type C64 = num_complex::Complex64;

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |m - m†| entry = {max_dev:.3e}")]
    NotHermitian { max_dev: f64 },
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Column of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(DVector<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Self {
        assert!(!entries.is_empty(), "vector must have at least one entry");
        Self(DVector::from_vec(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// Computational basis state |index⟩.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn inner(&self) -> &DVector<C64> {
        &self.0
    }

    pub(crate) fn from_inner(v: DVector<C64>) -> Self {
        Self(v)
    }

    /// Hermitian inner product ⟨self|other⟩ (conjugate-linear in self).
    pub fn dot(&self, other: &Self) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn normalized(&self) -> Self {
        Self(&self.0 / C64::new(self.norm(), 0.0))
    }
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let dim = rows.len();
        assert!(dim >= 1, "matrix must be at least 1x1");
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        Self(DMatrix::from_fn(dim, dim, |i, j| {
            if i == j { C64::new(entries[i], 0.0) } else { C64::new(0.0, 0.0) }
        }))
    }

    /// Columns become the matrix; all must share the vectors' dimension.
    pub fn from_columns(cols: &[ComplexVector]) -> Self {
        let dim = cols[0].dim();
        assert!(cols.iter().all(|c| c.dim() == dim));
        assert_eq!(cols.len(), dim, "from_columns expects a square matrix");
        Self(DMatrix::from_fn(dim, dim, |i, j| cols[j].entries()[i]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        ComplexVector(&self.0 * v.inner())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Expectation ⟨v|M|v⟩.
    pub fn expectation(&self, v: &ComplexVector) -> C64 {
        v.dot(&self.mul_vec(v))
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<ComplexVector>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[ComplexVector] {
        &self.eigenvectors
    }

    pub fn min_eigenpair(&self) -> (f64, &ComplexVector) {
        (self.eigenvalues[0], &self.eigenvectors[0])
    }

    pub fn max_eigenpair(&self) -> (f64, &ComplexVector) {
        let n = self.dim() - 1;
        (self.eigenvalues[n], &self.eigenvectors[n])
    }

    /// Σ λ_i |v_i⟩⟨v_i|.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|lambda| C64::new(lambda, 0.0))
    }

    /// Σ f(λ_i) |v_i⟩⟨v_i|.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let dim = self.dim();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            out += v.inner() * v.inner().adjoint() * f(*lambda);
        }
        ComplexMatrix(out)
    }
}

/// Rotate `v` by a global phase so its largest-magnitude component is real
/// positive. Makes eigenvector output deterministic.
fn fix_phase(v: &mut DVector<C64>) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag + 1e-12 {
            best_mag = m;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best] / C64::new(best_mag, 0.0);
        let correction = phase.conj();
        for z in v.iter_mut() {
            *z *= correction;
        }
    }
}

fn first_significant_index(v: &DVector<C64>) -> usize {
    v.iter()
        .position(|z| z.norm() > 1e-8)
        .unwrap_or(v.len())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized before decomposition; eigenvalues come back
/// ascending and degenerate blocks are re-orthonormalized with a stable
/// ordering so repeated runs agree.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<SpectralDecomposition, LinalgError> {
    let dev = m.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(LinalgError::NotHermitian { max_dev: dev });
    }
    let dim = m.dim();
    let sym = (m.inner() + m.inner().adjoint()) * C64::new(0.5, 0.0);
    let eig = sym
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 4096)
        .ok_or(LinalgError::NoConvergence)?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(dim);
    for &k in &order {
        eigenvalues.push(eig.eigenvalues[k]);
        vectors.push(eig.eigenvectors.column(k).into());
    }

    // degenerate blocks: modified Gram-Schmidt, then stable reordering
    let scale = eigenvalues.iter().fold(1.0f64, |acc, l| acc.max(l.abs()));
    let tol = 1e-8 * scale;
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eigenvalues[end] - eigenvalues[end - 1] <= tol {
            end += 1;
        }
        for i in start..end {
            for j in start..i {
                let proj = vectors[j].dotc(&vectors[i]);
                let prev = vectors[j].clone();
                vectors[i] -= prev * proj;
            }
            let n = vectors[i].norm();
            vectors[i] /= C64::new(n, 0.0);
        }
        for v in vectors[start..end].iter_mut() {
            fix_phase(v);
        }
        if end - start > 1 {
            vectors[start..end].sort_by_key(first_significant_index);
        }
        start = end;
    }
    for v in vectors.iter_mut() {
        fix_phase(v);
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors.into_iter().map(ComplexVector::from_inner).collect(),
    })
}

/// exp(−i m t) for Hermitian `m`, via the spectrum.
pub fn unitary_exp(m: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, LinalgError> {
    let spec = hermitian_eig(m)?;
    Ok(spec.map(|lambda| (C64::new(0.0, -lambda * t)).exp()))
}

/// Max entrywise deviation of the Gram matrix ⟨v_i|v_j⟩ from the identity.
pub fn gram_check(vectors: &[ComplexVector]) -> Result<f64, LinalgError> {
    let dim = vectors[0].dim();
    for v in vectors {
        if v.dim() != dim {
            return Err(LinalgError::DimensionMismatch { expected: dim, got: v.dim() });
        }
    }
    let mut worst = 0.0f64;
    for (i, vi) in vectors.iter().enumerate() {
        for (j, vj) in vectors.iter().enumerate() {
            let g = vi.dot(vj);
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((g - target).norm());
        }
    }
    Ok(worst)
}

/// Pauli matrices, used throughout the tests and CLI presets.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, -1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Deterministic pseudo-random Hermitian matrix for property checks.
    pub(crate) fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let raw = ComplexMatrix::from_fn(dim, |_, _| c(next(), next()));
        raw.add(&raw.adjoint()).scale(c(0.5, 0.0))
    }

    #[test]
    fn identity_eigenvalues() {
        let spec = hermitian_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pauli_z_eigenvalues_sorted() {
        let spec = hermitian_eig(&pauli_z()).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pauli_x_eigenvectors() {
        // by hand: det(sigma_x - l) = l^2 - 1, eigenvectors (|0> -+ |1>)/sqrt2
        let spec = hermitian_eig(&pauli_x()).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues()[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues()[1], 1.0, epsilon = 1e-12);
        let s = 1.0 / 2.0_f64.sqrt();
        let minus = &spec.eigenvectors()[0];
        let plus = &spec.eigenvectors()[1];
        let overlap_minus = minus.dot(&ComplexVector::new(vec![c(s, 0.0), c(-s, 0.0)]));
        let overlap_plus = plus.dot(&ComplexVector::new(vec![c(s, 0.0), c(s, 0.0)]));
        assert_abs_diff_eq!(overlap_minus.norm(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(overlap_plus.norm(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn not_hermitian_rejected() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.5, 0.0), c(0.0, 0.0)],
        ]);
        assert!(matches!(hermitian_eig(&m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn reconstruction_random() {
        for seed in 0..20 {
            for dim in [2, 3, 5, 8, 16] {
                let m = random_hermitian(dim, seed * 31 + dim as u64);
                let spec = hermitian_eig(&m).unwrap();
                let sym = m.add(&m.adjoint()).scale(c(0.5, 0.0));
                assert!(
                    spec.reconstruct().max_abs_diff(&sym) < 1e-9,
                    "reconstruction failed dim={dim} seed={seed}"
                );
                assert!(gram_check(spec.eigenvectors()).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn unitary_exp_zero_time_is_identity() {
        let m = random_hermitian(4, 3);
        let u = unitary_exp(&m, 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn unitary_exp_diagonal() {
        let u = unitary_exp(&pauli_z(), std::f64::consts::FRAC_PI_2).unwrap();
        let expect = ComplexMatrix::from_rows(&[
            vec![c(0.0, -1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0)],
        ]);
        assert!(u.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn unitary_exp_matches_taylor() {
        // exp(-i sx t) = cos t - i sin t sx; 4-term Taylor at t=0.01
        let t = 0.01;
        let sx = pauli_x();
        let u = unitary_exp(&sx, t).unwrap();
        let mut taylor = ComplexMatrix::identity(2);
        let mut term = ComplexMatrix::identity(2);
        for k in 1..=4 {
            term = term.mul(&sx).scale(c(0.0, -t) / c(k as f64, 0.0));
            taylor = taylor.add(&term);
        }
        assert!(u.max_abs_diff(&taylor) < 1e-10);
        let expect = ComplexMatrix::from_rows(&[
            vec![c(t.cos(), 0.0), c(0.0, -t.sin())],
            vec![c(0.0, -t.sin()), c(t.cos(), 0.0)],
        ]);
        assert!(u.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn unitary_exp_group_property_and_isometry() {
        for seed in 0..10 {
            let m = random_hermitian(5, 100 + seed);
            let (s, t) = (0.37, -1.21);
            let a = unitary_exp(&m, s).unwrap().mul(&unitary_exp(&m, t).unwrap());
            let b = unitary_exp(&m, s + t).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-9);
            let v = ComplexVector::from_real(&[0.1, 0.2, 0.3, 0.4, 0.5]).normalized();
            let w = unitary_exp(&m, s).unwrap().mul_vec(&v);
            assert_abs_diff_eq!(w.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn gram_check_cases() {
        let e1 = ComplexVector::basis_state(2, 0);
        let e2 = ComplexVector::basis_state(2, 1);
        assert_abs_diff_eq!(gram_check(&[e1.clone(), e2.clone()]).unwrap(), 0.0, epsilon = 1e-15);
        let s = 1.0 / 2.0_f64.sqrt();
        let plus = ComplexVector::from_real(&[s, s]);
        let minus = ComplexVector::from_real(&[s, -s]);
        assert!(gram_check(&[plus, minus]).unwrap() < 1e-12);
        assert_abs_diff_eq!(gram_check(&[e1.clone(), e1]).unwrap(), 1.0, epsilon = 1e-12);
        let v3 = ComplexVector::basis_state(3, 0);
        assert!(matches!(
            gram_check(&[e2, v3]),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn degenerate_spectrum_is_orthonormal() {
        // block diag(1,1,2) rotated by a fixed unitary
        let base = ComplexMatrix::diagonal(&[1.0, 1.0, 2.0]);
        let u = unitary_exp(&random_hermitian(3, 9), 0.83).unwrap();
        let m = u.mul(&base).mul(&u.adjoint());
        let spec = hermitian_eig(&m).unwrap();
        assert!(gram_check(spec.eigenvectors()).unwrap() < 1e-10);
        let sym = m.add(&m.adjoint()).scale(c(0.5, 0.0));
        assert!(spec.reconstruct().max_abs_diff(&sym) < 1e-9);
    }
}

#[cfg(test)]
pub(crate) use tests::random_hermitian;
