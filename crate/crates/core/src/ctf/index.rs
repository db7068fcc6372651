//! Uniform bucket grid for fixed-radius neighbour queries.

use std::collections::HashMap;

use crate::measures::WeightedMeasure;

/// Atoms hashed into cubic cells of side `cell`. A ball query of radius
/// `<= cell` only has to look at the `3^d` cells around the query's cell.
#[derive(Debug)]
pub(crate) struct BucketGrid {
    dim: usize,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl BucketGrid {
    pub(crate) fn new(measure: &WeightedMeasure, cell: f64) -> Self {
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, a) in measure.atoms().enumerate() {
            buckets.entry(key(a, cell)).or_default().push(i);
        }
        Self { dim: measure.dim(), cell, buckets }
    }

    /// Indices of all atoms in the neighbouring cells of `x`, ascending.
    pub(crate) fn candidates(&self, x: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let base = key(x, self.cell);
        let mut offset = vec![-1i64; self.dim];
        let mut probe = base.clone();
        loop {
            for j in 0..self.dim {
                probe[j] = base[j] + offset[j];
            }
            if let Some(b) = self.buckets.get(&probe) {
                out.extend_from_slice(b);
            }
            // Odometer over {-1, 0, 1}^d.
            let mut j = 0;
            while j < self.dim {
                offset[j] += 1;
                if offset[j] <= 1 {
                    break;
                }
                offset[j] = -1;
                j += 1;
            }
            if j == self.dim {
                break;
            }
        }
        out.sort_unstable();
    }
}

fn key(x: &[f64], cell: f64) -> Vec<i64> {
    x.iter().map(|v| (v / cell).floor() as i64).collect()
}
