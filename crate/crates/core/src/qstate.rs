//! Finite-dimensional density operators and classical-quantum states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

/// Tolerance used by every density-operator invariant check.
pub const TOLERANCE: f64 = 1e-10;

/// Largest Hilbert-space dimension any constructor will produce by default.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// A validated density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

/// Validates `matrix` as a density operator.
///
/// Eigenvalues in `[-1e-10, 0)` are treated as roundoff: they are clamped to
/// zero and the spectrum is renormalised. Anything more negative is rejected.
pub fn make_density(matrix: CMatrix) -> Result<DensityOperator> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(Error::MalformedMatrix(format!("shape {}x{}", n, matrix.ncols())));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::MalformedMatrix("non-finite entry".into()));
    }
    let defect = linalg::hermitian_defect(&matrix);
    if defect > TOLERANCE {
        return Err(Error::NotHermitian { defect });
    }
    let h = linalg::hermitize(&matrix);
    let trace: f64 = (0..n).map(|i| h[(i, i)].re).sum();
    if (trace - 1.0).abs() > TOLERANCE {
        return Err(Error::TraceNotOne { trace, defect: (trace - 1.0).abs() });
    }
    let eig = linalg::hermitian_eigen(&h);
    let min = eig.values[0];
    if min < -TOLERANCE {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let matrix = if min < 0.0 || eig.values[n - 1] > 1.0 {
        let clamped: Vec<f64> = eig.values.iter().map(|&l| l.clamp(0.0, 1.0)).collect();
        let total: f64 = clamped.iter().sum();
        let mut rebuilt = eig;
        for (v, c) in rebuilt.values.iter_mut().zip(&clamped) {
            *v = c / total;
        }
        linalg::spectral_map(&rebuilt, |l| l)
    } else if trace != 1.0 {
        h.map(|z| z / trace)
    } else {
        h
    };
    Ok(DensityOperator { matrix })
}

impl DensityOperator {
    /// For operators already known to be valid (products, blocks of valid states).
    pub(crate) fn from_valid(matrix: CMatrix) -> Self {
        DensityOperator { matrix }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        make_density(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(probs[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = 1.0 / dim as f64;
        DensityOperator::from_valid(CMatrix::from_diagonal_element(dim, dim, Complex64::new(w, 0.0)))
    }

    /// Projector onto computational basis vector `index`.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        DensityOperator::from_valid(m)
    }

    /// |psi><psi| for a state vector, normalised first.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::MalformedMatrix("state vector has zero or non-finite norm".into()));
        }
        let n = psi.len();
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        make_density(CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        linalg::entropy_bits(&self.eigenvalues())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Convex combination `sum_i w_i rho_i`. Weights must sum to one.
    pub(crate) fn mixture<'a>(parts: impl IntoIterator<Item = (f64, &'a DensityOperator)>, dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if w != 0.0 {
                m += rho.matrix.map(|z| z * w);
            }
        }
        DensityOperator::from_valid(m)
    }
}

pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    tensor_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_with_cap(a: &DensityOperator, b: &DensityOperator, cap: usize) -> Result<DensityOperator> {
    let requested = a.dim().saturating_mul(b.dim());
    if requested > cap {
        return Err(Error::DimensionOverflow { requested, cap });
    }
    Ok(DensityOperator::from_valid(a.matrix.kronecker(&b.matrix)))
}

/// Which tensor factor survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(rho: &DensityOperator, dims: (usize, usize), keep: Keep) -> Result<DensityOperator> {
    let (da, db) = dims;
    if da.saturating_mul(db) != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: da.saturating_mul(db) });
    }
    let m = &rho.matrix;
    let out = match keep {
        Keep::A => DMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Keep::B => DMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    };
    Ok(DensityOperator::from_valid(out))
}

/// Classical-quantum ensemble `{p(k), rho_E^k}` over `2^key_bits` key values.
///
/// Key index `k` reads the key as a big-endian bit string.
#[derive(Debug, Clone, PartialEq)]
pub struct CQState {
    key_bits: u32,
    entries: Vec<(f64, DensityOperator)>,
}

impl CQState {
    pub fn new(key_bits: u32, entries: Vec<(f64, DensityOperator)>) -> Result<Self> {
        if key_bits == 0 || key_bits > 30 {
            return Err(Error::InvalidConfig(format!("key_bits {key_bits} outside 1..=30")));
        }
        let expected = 1usize << key_bits;
        if entries.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: entries.len() });
        }
        let dim = entries[0].1.dim();
        if let Some((_, bad)) = entries.iter().find(|(_, r)| r.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
        }
        if let Some((p, _)) = entries.iter().find(|(p, _)| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("negative or non-finite weight {p}")));
        }
        let total: f64 = entries.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(CQState { key_bits, entries })
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    pub fn key_count(&self) -> usize {
        self.entries.len()
    }

    pub fn eve_dim(&self) -> usize {
        self.entries[0].1.dim()
    }

    pub fn entries(&self) -> &[(f64, DensityOperator)] {
        &self.entries
    }

    pub fn key_marginal(&self) -> Vec<f64> {
        self.entries.iter().map(|(p, _)| *p).collect()
    }

    /// rho_E = sum_k p(k) rho_E^k.
    pub fn eve_state(&self) -> DensityOperator {
        DensityOperator::mixture(self.entries.iter().map(|(p, r)| (*p, r)), self.eve_dim())
    }

    /// The ideal reference rho_U (x) rho_E with a uniform key register.
    pub fn ideal_state(&self) -> Result<DensityOperator> {
        tensor(&DensityOperator::maximally_mixed(self.key_count()), &self.eve_state())
    }

    /// rho_K (x) rho_E: same key marginal, eavesdropper decoupled.
    pub fn decoupled_state(&self) -> Result<DensityOperator> {
        tensor(&DensityOperator::diagonal(&self.key_marginal())?, &self.eve_state())
    }
}

/// Builds rho_KE = sum_k p(k) |k><k| (x) rho_E^k as a block-diagonal operator.
pub fn cq_assemble(cq: &CQState) -> Result<DensityOperator> {
    cq_assemble_with_cap(cq, DEFAULT_DIM_CAP)
}

pub fn cq_assemble_with_cap(cq: &CQState, cap: usize) -> Result<DensityOperator> {
    let de = cq.eve_dim();
    let requested = cq.key_count().saturating_mul(de);
    if requested > cap {
        return Err(Error::DimensionOverflow { requested, cap });
    }
    let mut m = CMatrix::zeros(requested, requested);
    for (k, (p, rho)) in cq.entries.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        let block = rho.matrix.map(|z| z * *p);
        m.view_mut((k * de, k * de), (de, de)).copy_from(&block);
    }
    Ok(DensityOperator::from_valid(m))
}
