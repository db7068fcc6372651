//! Symmetric positive semi-definite tensors and their spectra.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// A symmetric `d × d` tensor, typically a covariance tensor `Σ_α(x, σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovTensor {
    m: DMatrix<f64>,
}

impl CovTensor {
    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    /// Builds a tensor from row-major entries. Fails if the matrix is not
    /// symmetric within `1e-12 max(1, |Σ|)`.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::dims(dim * dim, entries.len()));
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("tensor must be square"));
        }
        let tol = 1e-12 * m.norm().max(1.0);
        let n = m.nrows();
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > tol {
                    return Err(Error::invalid("tensor is not symmetric"));
                }
            }
        }
        Ok(Self { m })
    }

    /// Builds from the packed upper triangle (row-major `(i, j), j ≥ i`).
    pub(crate) fn from_upper(dim: usize, upper: &[f64]) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                m[(i, j)] = upper[k];
                m[(j, i)] = upper[k];
                k += 1;
            }
        }
        Self { m }
    }

    /// `Σ c_i v_i v_iᵀ`.
    pub fn from_dyads(dim: usize, terms: &[(f64, &[f64])]) -> Result<Self> {
        let mut m = DMatrix::zeros(dim, dim);
        for (c, v) in terms {
            if v.len() != dim {
                return Err(Error::dims(dim, v.len()));
            }
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += c * v[i] * v[j];
                }
            }
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d).map(|k| self.m[(k / d, k % d)]).collect()
    }

    /// Upper triangle in row-major order, `d(d+1)/2` values.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                out.push(self.m[(i, j)]);
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    /// Frobenius norm, the norm induced by `|x ⊗ y| = |x| |y|`.
    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn frobenius_distance(&self, other: &CovTensor) -> f64 {
        (&self.m - &other.m).norm()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { m: &self.m * c }
    }

    /// `U Σ Uᵀ`.
    pub fn conjugate(&self, u: &DMatrix<f64>) -> Self {
        Self { m: u * &self.m * u.transpose() }
    }

    pub fn max_abs_diff(&self, other: &CovTensor) -> f64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn spectrum(&self) -> SpectrumSummary {
        spectrum(self)
    }
}

/// Eigen-decomposition of a tensor.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, `eigenvectors[i]` belonging to `eigenvalues[i]`.
    /// Each has its first non-negligible component positive.
    pub eigenvectors: Vec<Vec<f64>>,
    pub trace: f64,
    /// `λ_i / λ_d` for `i < d`; zeros for the zero tensor.
    pub anisotropy_ratios: Vec<f64>,
}

/// Spectrum via nalgebra's symmetric QR iteration.
pub fn spectrum(t: &CovTensor) -> SpectrumSummary {
    let d = t.dim();
    let eig = SymmetricEigen::new(t.m.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut eigenvalues = Vec::with_capacity(d);
    let mut eigenvectors = Vec::with_capacity(d);
    for &k in &order {
        eigenvalues.push(eig.eigenvalues[k]);
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        if let Some(first) = v.iter().copied().find(|c| c.abs() > 1e-12) {
            if first < 0.0 {
                v.iter_mut().for_each(|c| *c = -*c);
            }
        }
        eigenvectors.push(v);
    }
    let top = eigenvalues.last().copied().unwrap_or(0.0);
    let anisotropy_ratios = eigenvalues[..d.saturating_sub(1)]
        .iter()
        .map(|l| if top > 0.0 { l / top } else { 0.0 })
        .collect();
    SpectrumSummary { eigenvalues, eigenvectors, trace: t.trace(), anisotropy_ratios }
}

/// Number of eigenvalues with `λ_i / λ_max > threshold`; 0 for the zero tensor.
pub fn dimension_estimate(s: &SpectrumSummary, threshold: f64) -> usize {
    let top = s.eigenvalues.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    s.eigenvalues.iter().filter(|&&l| l / top > threshold).count()
}
