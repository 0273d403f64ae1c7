//! Spectra and absolute spectral gaps of expanded chains, and the condensed
//! `k`-dimensional eigenvalue problem `C A x = D_mu x`.
//!
//! `C` is the cyclic shift `C[i][i-1] = 1` and `D_mu = diag(mu^L_i)`; a value
//! `mu` is an eigenvalue of the expanded `N x N` chain exactly when the
//! condensed system has a nontrivial solution, with the full eigenvector
//! recovered as `y[i,l] = x_i mu^(L_i - l)`. Restriction and expansion
//! between the two representations are exact; round-trips are only asserted
//! for `|mu| > 0.1` because the power factors degenerate as `mu -> 0`.

use alloc::vec::Vec;

// f64 math resolves through libm on no_std targets; host builds shadow
// this with the inherent std methods
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use thiserror::Error;

use crate::chain::{CondensedChain, StochasticMatrix};
use crate::linalg::{self, DenseMatrix, LinalgError};

/// Largest matrix the dense eigensolver will accept by default.
pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// An eigenvalue qualifies as "the" unit eigenvalue within this distance.
pub const ONE_TOL: f64 = 1e-8;

/// Residual tolerance for condensed/full equivalence checks.
pub const EQUIV_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix dimension {n} exceeds dense solver limit {limit}")]
    SizeExceedsLimit { n: usize, limit: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no eigenvalue within {ONE_TOL} of 1 (closest at distance {closest})")]
    NotStochastic { closest: f64 },
    #[error("matrix is not symmetric (defect {defect})")]
    NotSymmetric { defect: f64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("cannot expand an eigenvector at mu = 0")]
    SingularExpansion,
    #[error("vector length {got} does not match expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("restricted eigenvector misses the condensed equation (residual {residual}); expansion or indexing bug")]
    Inconsistent { residual: f64 },
}

/// Complete eigenvalue multiset of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
    source_dim: usize,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<Complex64>) -> Self {
        let source_dim = eigenvalues.len();
        Self { eigenvalues, source_dim }
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// Index of the eigenvalue closest to 1.
    pub fn unit_index(&self) -> Option<usize> {
        (0..self.eigenvalues.len()).min_by(|&a, &b| {
            let da = (self.eigenvalues[a] - 1.0).norm();
            let db = (self.eigenvalues[b] - 1.0).norm();
            da.partial_cmp(&db).unwrap()
        })
    }

    /// Largest modulus among eigenvalues other than the deflated unit one.
    pub fn second_largest_modulus(&self) -> Option<f64> {
        let unit = self.unit_index()?;
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != unit)
            .map(|(_, mu)| mu.norm())
            .fold(None, |acc, m| Some(acc.map_or(m, |a: f64| a.max(m))))
    }
}

/// One eigenvalue with its eigenvector in full (length `N`) or condensed
/// (length `k`) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub mu: Complex64,
    pub vector: EigenVector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EigenVector {
    Full(Vec<Complex64>),
    Condensed(Vec<Complex64>),
}

impl EigenVector {
    pub fn components(&self) -> &[Complex64] {
        match self {
            EigenVector::Full(v) | EigenVector::Condensed(v) => v,
        }
    }
}

/// `mu^e` by exponentiation-by-squaring; exact for `e = 0`.
pub fn complex_pow(mu: Complex64, e: usize) -> Complex64 {
    mu.powu(e as u32)
}

fn check_limit(n: usize, limit: usize) -> Result<(), SpectralError> {
    if n > limit {
        return Err(SpectralError::SizeExceedsLimit { n, limit });
    }
    Ok(())
}

/// All `N` eigenvalues of the expanded chain via the dense nonsymmetric
/// reference path (balance, Hessenberg, shifted QR).
pub fn eigenvalues_dense(m: &StochasticMatrix) -> Result<Spectrum, SpectralError> {
    eigenvalues_dense_with_limit(m, DEFAULT_DENSE_LIMIT)
}

pub fn eigenvalues_dense_with_limit(
    m: &StochasticMatrix,
    limit: usize,
) -> Result<Spectrum, SpectralError> {
    check_limit(m.dim(), limit)?;
    let dense = m.to_dense();
    let eigenvalues = linalg::eigenvalues(&dense)?;
    Ok(Spectrum::new(eigenvalues))
}

/// Eigenvalues of a symmetric stochastic matrix (e.g. a symmetrized chain)
/// through the much cheaper tridiagonal path.
pub fn eigenvalues_symmetric(
    m: &StochasticMatrix,
    limit: usize,
) -> Result<Spectrum, SpectralError> {
    check_limit(m.dim(), limit)?;
    let dense = m.to_dense();
    let defect = dense.max_abs_asymmetry();
    if defect > 1e-12 {
        return Err(SpectralError::NotSymmetric { defect });
    }
    let eigenvalues = linalg::symmetric_eigenvalues(&dense)?
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    Ok(Spectrum::new(eigenvalues))
}

/// Full eigenpairs (eigenvalues and length-`N` eigenvectors) of the expanded
/// chain.
pub fn eigenpairs_dense(
    m: &StochasticMatrix,
    limit: usize,
) -> Result<Vec<EigenPair>, SpectralError> {
    check_limit(m.dim(), limit)?;
    let dense = m.to_dense();
    let dec = linalg::eigen_decomposition(&dense)?;
    Ok((0..dec.len())
        .map(|i| EigenPair {
            mu: dec.eigenvalue(i),
            vector: EigenVector::Full(dec.eigenvector(i)),
        })
        .collect())
}

/// The absolute spectral gap: one eigenvalue closest to 1 is removed (it
/// must lie within [`ONE_TOL`] of 1), then `min(1 - |mu|)` over the rest,
/// clamped to `>= 0`.
///
/// A one-dimensional spectrum has no other eigenvalues; the gap of the
/// single-state chain is defined as 1.
pub fn absolute_spectral_gap(spec: &Spectrum) -> Result<f64, SpectralError> {
    let unit = spec.unit_index().ok_or(SpectralError::NotStochastic { closest: f64::NAN })?;
    let closest = (spec.eigenvalues[unit] - 1.0).norm();
    if closest > ONE_TOL {
        return Err(SpectralError::NotStochastic { closest });
    }
    let gap = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != unit)
        .map(|(_, mu)| 1.0 - mu.norm())
        .fold(f64::INFINITY, f64::min);
    if gap == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(gap.max(0.0))
}

/// The condensed matrix `C A` (row `i` is row `i-1` of `A`, cyclically).
pub fn condensed_matrix(chain: &CondensedChain) -> DenseMatrix {
    let k = chain.k();
    let a = chain.interconnect();
    DenseMatrix::from_fn(k, |i, j| a.get((i + k - 1) % k, j))
}

/// Residual `|| C A x - D_mu x || / || x ||` of the condensed eigenvalue
/// equation.
pub fn condensed_residual(
    chain: &CondensedChain,
    mu: Complex64,
    x: &[Complex64],
) -> Result<f64, SpectralError> {
    let k = chain.k();
    if x.len() != k {
        return Err(SpectralError::LengthMismatch { got: x.len(), expected: k });
    }
    let norm_x: f64 = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm_x == 0.0 {
        return Err(SpectralError::ZeroVector);
    }
    let a = chain.interconnect();
    let lengths = chain.lengths();
    let mut resid = 0.0f64;
    for i in 0..k {
        let mut cax = Complex64::new(0.0, 0.0);
        let arow = (i + k - 1) % k;
        for j in 0..k {
            let w = a.get(arow, j);
            if w != 0.0 {
                cax += w * x[j];
            }
        }
        let r = cax - complex_pow(mu, lengths[i]) * x[i];
        resid += r.norm_sqr();
    }
    Ok(resid.sqrt() / norm_x)
}

fn arc_offsets(chain: &CondensedChain) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(chain.k());
    let mut acc = 0;
    for &l in chain.lengths().as_slice() {
        offsets.push(acc);
        acc += l;
    }
    offsets
}

/// Restricts a full eigenpair to condensed coordinates: `x_i = y[i, L_i]`.
///
/// For `|mu| > 0.1` the result is checked against the condensed equation;
/// a violation indicates an expansion or indexing bug, not roundoff.
pub fn restrict_eigvec(
    chain: &CondensedChain,
    pair: &EigenPair,
) -> Result<Vec<Complex64>, SpectralError> {
    let y = match &pair.vector {
        EigenVector::Full(y) => y,
        EigenVector::Condensed(_) => {
            return Err(SpectralError::LengthMismatch { got: chain.k(), expected: chain.total_nodes() })
        }
    };
    let n = chain.total_nodes();
    if y.len() != n {
        return Err(SpectralError::LengthMismatch { got: y.len(), expected: n });
    }
    let offsets = arc_offsets(chain);
    let lengths = chain.lengths();
    let x: Vec<Complex64> = (0..chain.k()).map(|i| y[offsets[i] + lengths[i] - 1]).collect();
    if pair.mu.norm() > 0.1 {
        let residual = condensed_residual(chain, pair.mu, &x)?;
        if residual >= EQUIV_TOL {
            return Err(SpectralError::Inconsistent { residual });
        }
    }
    Ok(x)
}

/// Expands a condensed solution to the full eigenvector
/// `y[i, l] = x_i mu^(L_i - l)`.
pub fn expand_eigvec(
    chain: &CondensedChain,
    mu: Complex64,
    x: &[Complex64],
) -> Result<Vec<Complex64>, SpectralError> {
    if mu.norm() == 0.0 {
        return Err(SpectralError::SingularExpansion);
    }
    let k = chain.k();
    if x.len() != k {
        return Err(SpectralError::LengthMismatch { got: x.len(), expected: k });
    }
    let lengths = chain.lengths();
    let mut y = Vec::with_capacity(chain.total_nodes());
    for i in 0..k {
        // positions l = 1..=L_i carry exponents L_i-1 down to 0
        let li = lengths[i];
        for p in 0..li {
            y.push(x[i] * complex_pow(mu, li - 1 - p));
        }
    }
    Ok(y)
}

/// Splits a condensed vector into its mean component and the zero-sum
/// remainder: `x = x_par * 1 + x_perp`.
pub fn decompose_parallel(x: &[Complex64]) -> (Complex64, Vec<Complex64>) {
    if x.is_empty() {
        return (Complex64::new(0.0, 0.0), Vec::new());
    }
    let mean = x.iter().sum::<Complex64>() / x.len() as f64;
    let perp = x.iter().map(|&v| v - mean).collect();
    (mean, perp)
}

/// `|| M y - mu y || / || y ||` on the expanded chain.
pub fn full_residual(m: &StochasticMatrix, mu: Complex64, y: &[Complex64]) -> f64 {
    let my = m.apply(y);
    let norm_y: f64 = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let resid: f64 = my
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - mu * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    resid / norm_y
}
