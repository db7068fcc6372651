//! Covariance tensor fields `Σ_α(x, σ) = Σ_i w_i (y_i - x)(y_i - x)ᵀ K(x, y_i, σ)`
//! and Fréchet functions `V_α(x, σ) = Σ_i w_i |y_i - x|^2 K(x, y_i, σ)`.

mod flow;
mod index;

pub use flow::{basin_labels, flow_basins, flow_to_attractor, FlowParams, FlowResult};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{RadialKernel, ScaledKernel};
use crate::measures::WeightedMeasure;
use crate::tensor::CovTensor;
use index::BucketGrid;

/// How grid evaluation finds the atoms that contribute at a query point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceleration {
    /// Visit every atom.
    Exact,
    /// Bucket-grid neighbour search; compactly supported kernels only.
    Indexed,
}

/// Adds the contribution of the atoms `idx` to the packed upper triangle.
#[inline]
fn accumulate<I: IntoIterator<Item = usize>>(
    measure: &WeightedMeasure,
    sk: &ScaledKernel<'_>,
    x: &[f64],
    idx: I,
    upper: &mut [f64],
    diff: &mut [f64],
) {
    let d = x.len();
    let w = measure.weights();
    for i in idx {
        let y = measure.atom(i);
        let mut r2 = 0.0;
        for j in 0..d {
            diff[j] = y[j] - x[j];
            r2 += diff[j] * diff[j];
        }
        let k = sk.value(r2);
        if k == 0.0 {
            continue;
        }
        let wk = w[i] * k;
        let mut p = 0;
        for a in 0..d {
            let s = wk * diff[a];
            for b in a..d {
                upper[p] += s * diff[b];
                p += 1;
            }
        }
    }
}

fn ctf_scaled(measure: &WeightedMeasure, sk: &ScaledKernel<'_>, x: &[f64]) -> CovTensor {
    let d = x.len();
    let mut upper = vec![0.0; d * (d + 1) / 2];
    let mut diff = vec![0.0; d];
    accumulate(measure, sk, x, 0..measure.len(), &mut upper, &mut diff);
    CovTensor::from_upper(d, &upper)
}

/// `Σ_α(x, σ)` by direct summation over the atoms.
pub fn ctf_at(measure: &WeightedMeasure, kernel: &RadialKernel, x: &[f64], sigma: f64) -> Result<CovTensor> {
    measure.check_point(x)?;
    let sk = kernel.at_scale(measure.dim(), sigma)?;
    Ok(ctf_scaled(measure, &sk, x))
}

fn frechet_scaled(measure: &WeightedMeasure, sk: &ScaledKernel<'_>, x: &[f64]) -> f64 {
    let w = measure.weights();
    let mut v = 0.0;
    for (i, y) in measure.atoms().enumerate() {
        let r2: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        let k = sk.value(r2);
        if k != 0.0 {
            v += w[i] * r2 * k;
        }
    }
    v
}

/// `V_α(x, σ)` by direct summation.
pub fn frechet_value(measure: &WeightedMeasure, kernel: &RadialKernel, x: &[f64], sigma: f64) -> Result<f64> {
    measure.check_point(x)?;
    let sk = kernel.at_scale(measure.dim(), sigma)?;
    Ok(frechet_scaled(measure, &sk, x))
}

/// `Q_σ(z) = z zᵀ K_σ(z)`, the integrand of the CTF as a function of `z = y - x`.
pub fn q_tensor(kernel: &RadialKernel, z: &[f64], sigma: f64) -> Result<CovTensor> {
    let d = z.len();
    let sk = kernel.at_scale(d, sigma)?;
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let k = sk.value(r2);
    let mut upper = Vec::with_capacity(d * (d + 1) / 2);
    for a in 0..d {
        for b in a..d {
            upper.push(k * z[a] * z[b]);
        }
    }
    Ok(CovTensor::from_upper(d, &upper))
}

/// A field evaluated on a list of query points.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub dim: usize,
    pub sigma: f64,
    pub query_points: Vec<Vec<f64>>,
    pub tensors: Vec<CovTensor>,
    /// `V = tr Σ` at each query point.
    pub frechet_values: Vec<f64>,
}

impl FieldGrid {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Writes `x_1..x_d, sigma, S_ij (upper triangle), V, lambda_1..lambda_d`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.dim;
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
        header.push("sigma".into());
        for i in 1..=d {
            for j in i..=d {
                header.push(format!("S_{i}{j}"));
            }
        }
        header.push("V".into());
        header.extend((1..=d).map(|i| format!("lambda_{i}")));
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(&header).map_err(io)?;
        for ((x, t), v) in self.query_points.iter().zip(&self.tensors).zip(&self.frechet_values) {
            let mut row: Vec<String> = x.iter().map(|c| format!("{c:.16e}")).collect();
            row.push(format!("{:.16e}", self.sigma));
            row.extend(t.upper_triangle().iter().map(|c| format!("{c:.16e}")));
            row.push(format!("{v:.16e}"));
            row.extend(t.spectrum().eigenvalues.iter().map(|c| format!("{c:.16e}")));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))
    }
}

/// Evaluates the CTF at every query point, in parallel. Results are in input
/// order and do not depend on the thread count.
///
/// In [`Acceleration::Indexed`] mode the contributing atoms are visited in
/// the same order as in exact mode, so both modes return bit-identical
/// tensors.
pub fn ctf_grid(
    measure: &WeightedMeasure,
    kernel: &RadialKernel,
    query_points: &[Vec<f64>],
    sigma: f64,
    acceleration: Acceleration,
) -> Result<FieldGrid> {
    let d = measure.dim();
    for q in query_points {
        measure.check_point(q)?;
    }
    let sk = kernel.at_scale(d, sigma)?;
    let tensors: Vec<CovTensor> = match acceleration {
        Acceleration::Exact => query_points.par_iter().map(|x| ctf_scaled(measure, &sk, x)).collect(),
        Acceleration::Indexed => {
            let s = kernel.support_radius_sq().ok_or_else(|| {
                Error::Unsupported(format!("indexed evaluation needs a compactly supported kernel, not '{}'", kernel.name()))
            })?;
            // Slightly enlarged cells so rounding in the support test can
            // never reach past the neighbouring cells.
            let grid = BucketGrid::new(measure, sigma * s.sqrt() * (1.0 + 1e-9));
            query_points
                .par_iter()
                .map_init(
                    || (Vec::new(), vec![0.0; d]),
                    |(cand, diff), x| {
                        grid.candidates(x, cand);
                        let mut upper = vec![0.0; d * (d + 1) / 2];
                        accumulate(measure, &sk, x, cand.iter().copied(), &mut upper, diff);
                        CovTensor::from_upper(d, &upper)
                    },
                )
                .collect()
        }
    };
    let frechet_values = tensors.iter().map(CovTensor::trace).collect();
    Ok(FieldGrid { dim: d, sigma, query_points: query_points.to_vec(), tensors, frechet_values })
}

/// `nx × ny` grid over `[x0, x1] × [y0, y1]`, endpoints included, x fastest.
pub fn regular_grid_2d(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Vec<Vec<f64>> {
    let lin = |a: f64, b: f64, n: usize, i: usize| if n == 1 { 0.5 * (a + b) } else { a + (b - a) * i as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(vec![lin(x0, x1, nx, i), lin(y0, y1, ny, j)]);
        }
    }
    out
}

/// Gradient evaluation strategy for the Fréchet function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Termwise derivative of the Gaussian form; Gaussian kernel only.
    AnalyticGaussian,
    /// Central differences with step `h`.
    CentralDifference(f64),
}

pub(crate) fn gaussian_gradient_scaled(measure: &WeightedMeasure, sk: &ScaledKernel<'_>, x: &[f64]) -> Vec<f64> {
    // ∇V(x) = Σ w (x - y)(2 - |x - y|^2 / σ^2) K(x, y, σ)
    let d = x.len();
    let s2 = sk.sigma() * sk.sigma();
    let mut g = vec![0.0; d];
    for (i, y) in measure.atoms().enumerate() {
        let r2: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        let c = measure.weights()[i] * sk.value(r2) * (2.0 - r2 / s2);
        for j in 0..d {
            g[j] += c * (x[j] - y[j]);
        }
    }
    g
}

/// `∇_x V_α(x, σ)`.
pub fn frechet_gradient(
    measure: &WeightedMeasure,
    kernel: &RadialKernel,
    x: &[f64],
    sigma: f64,
    mode: GradientMode,
) -> Result<Vec<f64>> {
    measure.check_point(x)?;
    let sk = kernel.at_scale(measure.dim(), sigma)?;
    match mode {
        GradientMode::AnalyticGaussian => {
            if !kernel.is_gaussian() {
                return Err(Error::Unsupported("analytic gradient requires the Gaussian kernel".into()));
            }
            Ok(gaussian_gradient_scaled(measure, &sk, x))
        }
        GradientMode::CentralDifference(h) => {
            if !(h > 0.0) {
                return Err(Error::invalid("difference step must be positive"));
            }
            let mut p = x.to_vec();
            let mut g = Vec::with_capacity(x.len());
            for j in 0..x.len() {
                p[j] = x[j] + h;
                let up = frechet_scaled(measure, &sk, &p);
                p[j] = x[j] - h;
                let dn = frechet_scaled(measure, &sk, &p);
                p[j] = x[j];
                g.push((up - dn) / (2.0 * h));
            }
            Ok(g)
        }
    }
}
