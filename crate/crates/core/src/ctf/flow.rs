//! Descent along `-∇V` of the Gaussian Fréchet function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{frechet_scaled, gaussian_gradient_scaled};
use crate::error::{Error, Result};
use crate::kernels::RadialKernel;
use crate::measures::WeightedMeasure;

/// Step control for [`flow_to_attractor`]. `None` fields scale with σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowParams {
    /// Initial step length; defaults to σ/10.
    pub initial_step: Option<f64>,
    pub backtrack: f64,
    pub growth: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Stop when `|∇V| < tol · max(1, V)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Attractors closer than this share a basin; defaults to σ/100.
    pub merge_radius: Option<f64>,
    pub record_path: bool,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            initial_step: None,
            backtrack: 0.5,
            growth: 1.5,
            armijo: 1e-4,
            tol: 1e-8,
            max_iter: 10_000,
            merge_radius: None,
            record_path: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResult {
    pub start: Vec<f64>,
    pub attractor: Vec<f64>,
    /// Accepted iterates, starting with `start`.
    pub path: Vec<Vec<f64>>,
    /// Fréchet value along the path.
    pub values: Vec<f64>,
    pub basin_id: usize,
    pub iterations: usize,
    /// The gradient tolerance was met.
    pub converged: bool,
    /// The line search could not decrease `V` any further before the
    /// tolerance was met (a numerical stationary point).
    pub stalled: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Normalized gradient descent with Armijo backtracking from `start`.
///
/// Non-convergence within `max_iter` is reported through the flags, not as
/// an error.
pub fn flow_to_attractor(
    measure: &WeightedMeasure,
    kernel: &RadialKernel,
    start: &[f64],
    sigma: f64,
    params: &FlowParams,
) -> Result<FlowResult> {
    if !kernel.is_gaussian() {
        return Err(Error::Unsupported("gradient flow requires the Gaussian kernel".into()));
    }
    measure.check_point(start)?;
    let sk = kernel.at_scale(measure.dim(), sigma)?;
    let mut x = start.to_vec();
    let mut v = frechet_scaled(measure, &sk, &x);
    let mut g = gaussian_gradient_scaled(measure, &sk, &x);
    let mut step = params.initial_step.unwrap_or(sigma / 10.0);
    let min_step = 1e-15 * sigma;
    let mut path = vec![x.clone()];
    let mut values = vec![v];
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;
    let mut trial = vec![0.0; x.len()];

    while iterations < params.max_iter {
        let gn = norm(&g);
        if gn < params.tol * v.max(1.0) {
            converged = true;
            break;
        }
        let mut accepted = false;
        while step >= min_step {
            for j in 0..x.len() {
                trial[j] = x[j] - step * g[j] / gn;
            }
            let vt = frechet_scaled(measure, &sk, &trial);
            if vt <= v - params.armijo * step * gn {
                x.copy_from_slice(&trial);
                v = vt;
                accepted = true;
                break;
            }
            step *= params.backtrack;
        }
        if !accepted {
            stalled = true;
            break;
        }
        iterations += 1;
        if params.record_path {
            path.push(x.clone());
            values.push(v);
        }
        step *= params.growth;
        g = gaussian_gradient_scaled(measure, &sk, &x);
    }
    if !params.record_path && path.last() != Some(&x) {
        path.push(x.clone());
        values.push(v);
    }
    Ok(FlowResult {
        start: start.to_vec(),
        attractor: x,
        path,
        values,
        basin_id: 0,
        iterations,
        converged,
        stalled,
    })
}

/// Flows every start point (in parallel) and groups the attractors into
/// basins. Basin ids are assigned in order of first appearance.
pub fn flow_basins(
    measure: &WeightedMeasure,
    kernel: &RadialKernel,
    starts: &[Vec<f64>],
    sigma: f64,
    params: &FlowParams,
) -> Result<Vec<FlowResult>> {
    let mut results: Vec<FlowResult> = starts
        .par_iter()
        .map(|s| flow_to_attractor(measure, kernel, s, sigma, params))
        .collect::<Result<_>>()?;
    let radius = params.merge_radius.unwrap_or(sigma / 100.0);
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for r in &mut results {
        let hit = reps.iter().position(|a| {
            let d2: f64 = a.iter().zip(&r.attractor).map(|(p, q)| (p - q) * (p - q)).sum();
            d2.sqrt() <= radius
        });
        r.basin_id = match hit {
            Some(id) => id,
            None => {
                reps.push(r.attractor.clone());
                reps.len() - 1
            }
        };
    }
    Ok(results)
}

/// Basin id of every start point; see [`flow_basins`].
pub fn basin_labels(
    measure: &WeightedMeasure,
    kernel: &RadialKernel,
    starts: &[Vec<f64>],
    sigma: f64,
    params: &FlowParams,
) -> Result<Vec<usize>> {
    Ok(flow_basins(measure, kernel, starts, sigma, params)?.into_iter().map(|r| r.basin_id).collect())
}
