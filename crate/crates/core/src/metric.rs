//! Dense symmetric distance matrices.

use crate::error::{Error, Result};
use crate::measures::WeightedMeasure;

/// A symmetric `n × n` matrix of non-negative distances with zero diagonal,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates symmetry, zero diagonal, and the absence of NaN or
    /// negative entries.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::dims(n * n, data.len()));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::invalid("distance matrix must have a zero diagonal"));
            }
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if a.is_nan() || b.is_nan() {
                    return Err(Error::invalid("distance matrix contains NaN"));
                }
                if a < 0.0 || a != b {
                    return Err(Error::invalid("distance matrix must be symmetric and non-negative"));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from a function on pairs `i < j`; the result is symmetric by
    /// construction.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::new(n, data)
    }

    /// Euclidean distances between the atoms of a measure.
    pub fn euclidean(m: &WeightedMeasure) -> Self {
        Self::from_fn(m.len(), |i, j| euclid(m.atom(i), m.atom(j))).expect("euclidean distances are valid")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every entry by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// Restriction to the given indices, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self { n: k, data }
    }
}

#[inline]
pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
