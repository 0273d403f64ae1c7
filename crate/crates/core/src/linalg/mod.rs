//! Dense square matrices and the eigenvalue solvers built on them.
//!
//! The nonsymmetric path is the classic balance / Householder-Hessenberg /
//! shifted-QR chain (Algol `orthes`/`hqr2` lineage, as in EISPACK and JAMA):
//! [`eigenvalues`] computes the full spectrum only, [`eigen_decomposition`]
//! also accumulates eigenvectors. The symmetric path tridiagonalizes and runs
//! implicit QL ([`symmetric_eigenvalues`]).

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

mod schur;
mod symmetric;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix dimension must be positive")]
    EmptyMatrix,
    #[error("QR iteration failed to converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
}

/// Row-major dense square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds from a row-major slice of length `n * n`.
    pub fn from_row_major(n: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), n * n, "row-major data length mismatch");
        Self { n, data: data.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Eigenvalues and eigenvectors of a real square matrix.
///
/// Complex conjugate pairs are stored JAMA-style: the pair occupies two
/// consecutive indices `j, j+1` with `im[j] > 0 > im[j+1]`, and the packed
/// vector columns `j, j+1` hold the real and imaginary parts.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    re: Vec<f64>,
    im: Vec<f64>,
    vectors: DenseMatrix,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn eigenvalue(&self, idx: usize) -> Complex64 {
        Complex64::new(self.re[idx], self.im[idx])
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.eigenvalue(i)).collect()
    }

    /// Complex eigenvector for eigenvalue index `idx`, unpacking conjugate
    /// pairs from the adjacent real columns.
    pub fn eigenvector(&self, idx: usize) -> Vec<Complex64> {
        let n = self.vectors.dim();
        let mut v = Vec::with_capacity(n);
        if self.im[idx] == 0.0 {
            for i in 0..n {
                v.push(Complex64::new(self.vectors.get(i, idx), 0.0));
            }
        } else if self.im[idx] > 0.0 {
            for i in 0..n {
                v.push(Complex64::new(self.vectors.get(i, idx), self.vectors.get(i, idx + 1)));
            }
        } else {
            for i in 0..n {
                v.push(Complex64::new(self.vectors.get(i, idx - 1), -self.vectors.get(i, idx)));
            }
        }
        v
    }
}

/// All eigenvalues of a real square matrix, without eigenvectors.
///
/// Faster than [`eigen_decomposition`]: the QR sweep restricts updates to the
/// active window and accumulates nothing.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>, LinalgError> {
    if a.dim() == 0 {
        return Err(LinalgError::EmptyMatrix);
    }
    let mut h = a.clone();
    schur::balance(&mut h);
    schur::hessenberg(&mut h, None);
    let (re, im) = schur::hqr_values(&mut h)?;
    Ok(re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect())
}

/// Full eigenvalue decomposition of a real square matrix.
pub fn eigen_decomposition(a: &DenseMatrix) -> Result<EigenDecomposition, LinalgError> {
    if a.dim() == 0 {
        return Err(LinalgError::EmptyMatrix);
    }
    let n = a.dim();
    let mut h = a.clone();
    let scale = schur::balance(&mut h);
    let mut v = DenseMatrix::identity(n);
    schur::hessenberg(&mut h, Some(&mut v));
    let (re, im) = schur::hqr2(&mut h, &mut v)?;
    schur::balance_back(&mut v, &scale);
    Ok(EigenDecomposition { re, im, vectors: v })
}

/// Eigenvalues of a symmetric matrix, ascending. Only the lower triangle is
/// read.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    if a.dim() == 0 {
        return Err(LinalgError::EmptyMatrix);
    }
    symmetric::eigenvalues(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_by_re_im(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    fn nalgebra_eigenvalues(a: &DenseMatrix) -> Vec<Complex64> {
        let n = a.dim();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        m.complex_eigenvalues().iter().map(|c| Complex64::new(c.re, c.im)).collect()
    }

    fn assert_spectra_match(ours: Vec<Complex64>, reference: Vec<Complex64>, tol: f64) {
        let ours = sorted_by_re_im(ours);
        let reference = sorted_by_re_im(reference);
        assert_eq!(ours.len(), reference.len());
        for (a, b) in ours.iter().zip(reference.iter()) {
            assert!(
                (a - b).norm() < tol,
                "eigenvalue mismatch: {a} vs {b} (tol {tol})"
            );
        }
    }

    #[test]
    fn directed_cycle_roots_of_unity() {
        let n = 8;
        let mut a = DenseMatrix::zeros(n);
        for i in 0..n {
            a.set((i + 1) % n, i, 1.0);
        }
        let eig = eigenvalues(&a).unwrap();
        for mu in &eig {
            assert!((mu.norm() - 1.0).abs() < 1e-10);
            assert!(mu.powu(n as u32).re - 1.0 < 1e-9);
        }
        // all 8 eighth roots of unity present
        for k in 0..n {
            let target = Complex64::from_polar(1.0, core::f64::consts::TAU * k as f64 / n as f64);
            assert!(
                eig.iter().any(|mu| (mu - target).norm() < 1e-10),
                "missing root {target}"
            );
        }
    }

    #[test]
    fn two_by_two_symmetric_stochastic() {
        let p = 0.3;
        let a = DenseMatrix::from_row_major(2, &[1.0 - p, p, p, 1.0 - p]);
        let mut eig = eigenvalues(&a).unwrap();
        eig.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((eig[0] - Complex64::new(0.4, 0.0)).norm() < 1e-14);
        assert!((eig[1] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn matches_nalgebra_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for &n in &[2, 3, 5, 8, 13, 21, 40, 60] {
            let a = DenseMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let ours = eigenvalues(&a).unwrap();
            let reference = nalgebra_eigenvalues(&a);
            assert_spectra_match(ours, reference, 1e-7 * n as f64);
        }
    }

    #[test]
    fn values_and_decomposition_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &n in &[3, 6, 17, 33] {
            let a = DenseMatrix::from_fn(n, |_, _| rng.random_range(0.0..1.0));
            let vals = eigenvalues(&a).unwrap();
            let dec = eigen_decomposition(&a).unwrap();
            assert_spectra_match(vals, dec.eigenvalues(), 1e-8 * n as f64);
        }
    }

    #[test]
    fn decomposition_residuals_are_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &n in &[2, 4, 9, 25] {
            let a = DenseMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let dec = eigen_decomposition(&a).unwrap();
            for idx in 0..n {
                let mu = dec.eigenvalue(idx);
                let v = dec.eigenvector(idx);
                let norm_v: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                assert!(norm_v > 0.0);
                let mut resid = 0.0f64;
                for i in 0..n {
                    let mut av = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        av += a.get(i, j) * v[j];
                    }
                    resid += (av - mu * v[i]).norm_sqr();
                }
                assert!(
                    resid.sqrt() / norm_v < 1e-8 * n as f64,
                    "residual too large at n={n} idx={idx}"
                );
            }
        }
    }

    #[test]
    fn conjugate_closure() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = DenseMatrix::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
        let eig = eigenvalues(&a).unwrap();
        for mu in &eig {
            assert!(
                eig.iter().any(|nu| (nu - mu.conj()).norm() < 1e-8),
                "spectrum not closed under conjugation at {mu}"
            );
        }
    }

    #[test]
    fn symmetric_solver_matches_nalgebra() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for &n in &[1, 2, 3, 7, 20, 50] {
            let mut a = DenseMatrix::zeros(n);
            for i in 0..n {
                for j in 0..=i {
                    let v = rng.random_range(-1.0..1.0);
                    a.set(i, j, v);
                    a.set(j, i, v);
                }
            }
            let mut ours = symmetric_eigenvalues(&a).unwrap();
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a.get(i, j));
            let mut reference: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            ours.sort_by(|x, y| x.partial_cmp(y).unwrap());
            reference.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (x, y) in ours.iter().zip(reference.iter()) {
                assert!((x - y).abs() < 1e-10 * (n as f64), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn one_by_one() {
        let a = DenseMatrix::from_row_major(1, &[3.5]);
        assert_eq!(eigenvalues(&a).unwrap(), vec![Complex64::new(3.5, 0.0)]);
        assert_eq!(symmetric_eigenvalues(&a).unwrap(), vec![3.5]);
        let dec = eigen_decomposition(&a).unwrap();
        assert_eq!(dec.eigenvalue(0), Complex64::new(3.5, 0.0));
    }

    #[test]
    fn empty_matrix_rejected() {
        let a = DenseMatrix::zeros(0);
        assert!(matches!(eigenvalues(&a), Err(LinalgError::EmptyMatrix)));
    }
}
