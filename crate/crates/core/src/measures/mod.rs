//! Weighted point measures in R^d, quadrature approximations of arc-length
//! and surface measures, synthetic datasets, and file I/O.

mod generators;
mod io;
mod quadrature;

pub use generators::{
    gen_arrangement_suite, gen_line_arrangement, ArrangementKind, ArrangementParams, BoundingBox,
    LineSpec,
};
pub use io::{
    load_dataset_csv, load_dataset_json, load_measure_csv, save_dataset_csv, save_dataset_json,
    save_measure_csv,
};
pub use quadrature::{
    quadrature_arc, quadrature_circle, quadrature_cylinder_patch, quadrature_plane_disk,
    quadrature_segment, quadrature_sphere, quadrature_sphere_cap,
};

use crate::error::{Error, Result};

/// Label reserved for outliers. Component labels are `0..k`.
pub const OUTLIER_LABEL: u32 = u32::MAX;

/// Tolerance on the total mass for a measure to count as a probability measure.
pub const NORMALIZED_TOL: f64 = 1e-12;

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A finite positive measure on R^d given by atoms and strictly positive
/// weights. Coordinates are stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    normalized: bool,
}

impl WeightedMeasure {
    /// Builds a measure from flat coordinates (`weights.len() * dim` values).
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if coords.len() != weights.len() * dim {
            return Err(Error::invalid(format!(
                "{} coordinates do not form {} atoms of dimension {}",
                coords.len(),
                weights.len(),
                dim
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("atom {} has a non-finite coordinate", i / dim)));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid(format!(
                "weights must be positive (atom {i} has weight {})",
                weights[i]
            )));
        }
        let normalized = (neumaier_sum(weights.iter().copied()) - 1.0).abs() <= NORMALIZED_TOL;
        Ok(Self { dim, coords, weights, normalized })
    }

    /// Builds a measure from a list of points.
    pub fn from_points(points: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or_else(|| Error::invalid("no atoms"))?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::dims(dim, p.len()));
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords, weights)
    }

    /// The empirical measure with weight `1/n` on each atom.
    pub fn uniform(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::invalid("empirical measure needs at least one atom"));
        }
        let n = coords.len() / dim;
        Self::new(dim, coords, vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_mass(&self) -> f64 {
        neumaier_sum(self.weights.iter().copied())
    }

    /// Rescales the weights to total mass one.
    pub fn normalize(&self) -> Self {
        let m = self.total_mass();
        let weights: Vec<f64> = self.weights.iter().map(|w| w / m).collect();
        let normalized = (neumaier_sum(weights.iter().copied()) - 1.0).abs() <= NORMALIZED_TOL;
        Self { dim: self.dim, coords: self.coords.clone(), weights, normalized }
    }

    /// Multiplies every weight by `c > 0`.
    pub fn scale_weights(&self, c: f64) -> Result<Self> {
        Self::new(self.dim, self.coords.clone(), self.weights.iter().map(|w| w * c).collect())
    }

    /// Pushes the measure forward along `f`, applied atom by atom.
    pub fn map_atoms<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let mut coords = Vec::with_capacity(self.coords.len());
        let mut dim = None;
        for a in self.atoms() {
            let y = f(a);
            match dim {
                None => dim = Some(y.len()),
                Some(d) if d != y.len() => return Err(Error::dims(d, y.len())),
                _ => {}
            }
            coords.extend(y);
        }
        Self::new(dim.unwrap_or(self.dim), coords, self.weights.clone())
    }

    /// Concatenates the atoms of several measures of the same dimension.
    pub fn concat(parts: &[WeightedMeasure]) -> Result<Self> {
        let dim = parts.first().map(|m| m.dim).ok_or_else(|| Error::invalid("nothing to concatenate"))?;
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for m in parts {
            if m.dim != dim {
                return Err(Error::dims(dim, m.dim));
            }
            coords.extend_from_slice(&m.coords);
            weights.extend_from_slice(&m.weights);
        }
        Self::new(dim, coords, weights)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::dims(self.dim, x.len()));
        }
        Ok(())
    }
}

/// A measure with one ground-truth cluster label per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub measure: WeightedMeasure,
    pub labels: Vec<u32>,
    pub description: String,
}

impl LabeledDataset {
    pub fn new(measure: WeightedMeasure, labels: Vec<u32>, description: impl Into<String>) -> Result<Self> {
        if labels.len() != measure.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} atoms",
                labels.len(),
                measure.len()
            )));
        }
        Ok(Self { measure, labels, description: description.into() })
    }

    /// Number of distinct non-outlier labels.
    pub fn n_components(&self) -> usize {
        let mut seen: Vec<u32> = self.labels.iter().copied().filter(|&l| l != OUTLIER_LABEL).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn n_outliers(&self) -> usize {
        self.labels.iter().filter(|&&l| l == OUTLIER_LABEL).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        let err = WeightedMeasure::new(1, vec![0.0, 1.0], vec![0.5, -0.5]).unwrap_err();
        assert!(err.to_string().contains("weights must be positive"));
        assert!(WeightedMeasure::new(1, vec![0.0, 1.0], vec![0.5, 0.0]).is_err());
        assert!(WeightedMeasure::new(1, vec![f64::NAN], vec![1.0]).is_err());
        assert!(WeightedMeasure::new(2, vec![0.0, 1.0, 2.0], vec![1.0]).is_err());
    }

    #[test]
    fn normalized_flag() {
        let m = WeightedMeasure::new(1, vec![0.0, 1.0, 2.0], vec![0.1, 0.2, 0.7]).unwrap();
        assert!(m.is_normalized());
        let m = WeightedMeasure::new(1, vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(!m.is_normalized());
        assert!(m.normalize().is_normalized());
    }

    #[test]
    fn neumaier_beats_naive() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
    }
}
