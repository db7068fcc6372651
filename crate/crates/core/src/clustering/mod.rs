//! Tensorized-metric single-linkage clustering: the metric, the dendrogram
//! and its ultrametric, cuts, cutoff heuristics, scoring, and stability
//! diagnostics.

mod linkage;

pub use linkage::{
    cophenetic_matrix, cophenetic_std, cut, mean_cophenetic, single_linkage, ClusterAssignment, CutMode,
    Dendrogram, Merge,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::assignment::hungarian;
use crate::ctf::{ctf_grid, Acceleration};
use crate::error::{Error, Result};
use crate::kernels::{derive_constants, RadialKernel};
use crate::measures::WeightedMeasure;
use crate::metric::{euclid, DistanceMatrix};
use crate::transport::{correspondence_from_plan, distortion, winf_exact, Correspondence};

/// Parameters of the tensorized metric
/// `d((x, Σ), (x', Σ')) = (|Σ - Σ'|^2 + γ^2 |x - x'|^2)^{1/2}`.
#[derive(Debug, Clone)]
pub struct TensorizedMetricParams {
    pub gamma: f64,
    pub sigma: f64,
    pub kernel: RadialKernel,
}

impl TensorizedMetricParams {
    pub fn new(gamma: f64, sigma: f64, kernel: RadialKernel) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma must be non-negative"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma must be positive"));
        }
        Ok(Self { gamma, sigma, kernel })
    }

    /// `γ = 0` gives only a pseudo-metric.
    pub fn is_pseudo_metric(&self) -> bool {
        self.gamma == 0.0
    }
}

/// Packed upper-triangular CTF of `reference` at every atom of `points`.
fn point_tensors(points: &WeightedMeasure, reference: &WeightedMeasure, p: &TensorizedMetricParams) -> Result<Vec<Vec<f64>>> {
    let query: Vec<Vec<f64>> = points.atoms().map(<[f64]>::to_vec).collect();
    let mode = if p.kernel.is_compact() { Acceleration::Indexed } else { Acceleration::Exact };
    let grid = ctf_grid(reference, &p.kernel, &query, p.sigma, mode)?;
    Ok(grid.tensors.iter().map(|t| t.upper_triangle()).collect())
}

/// Frobenius distance of two packed symmetric tensors.
fn packed_frobenius_sq(a: &[f64], b: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            let v = (a[k] - b[k]).powi(2);
            s += if i == j { v } else { 2.0 * v };
            k += 1;
        }
    }
    s
}

/// Pairwise tensorized distances between the atoms of `points`. Tensors are
/// the CTF of `reference`, or of the uniform empirical measure on `points`
/// when `reference` is `None`.
pub fn tensorized_distances(
    points: &WeightedMeasure,
    params: &TensorizedMetricParams,
    reference: Option<&WeightedMeasure>,
) -> Result<DistanceMatrix> {
    let own;
    let reference = match reference {
        Some(r) => {
            if r.dim() != points.dim() {
                return Err(Error::dims(points.dim(), r.dim()));
            }
            r
        }
        None => {
            own = WeightedMeasure::uniform(points.dim(), points.coords().to_vec())?;
            &own
        }
    };
    let tensors = point_tensors(points, reference, params)?;
    Ok(tensorized_from_tensors(points, &tensors, params.gamma))
}

fn tensorized_from_tensors(points: &WeightedMeasure, tensors: &[Vec<f64>], gamma: f64) -> DistanceMatrix {
    let n = points.len();
    let d = points.dim();
    let g2 = gamma * gamma;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        return 0.0;
                    }
                    let x2: f64 = points.atom(i).iter().zip(points.atom(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    (packed_frobenius_sq(&tensors[i], &tensors[j], d) + g2 * x2).sqrt()
                })
                .collect()
        })
        .collect();
    DistanceMatrix::new(n, rows.concat()).expect("tensorized distances are symmetric by construction")
}

/// Keeps the `k` largest clusters (ties to the smaller label) and moves
/// every other point to the cluster of its nearest kept point.
pub fn topk_reassign(assignment: &ClusterAssignment, metric: &DistanceMatrix, k: usize) -> Result<ClusterAssignment> {
    let n = assignment.labels.len();
    if metric.len() != n {
        return Err(Error::dims(n, metric.len()));
    }
    if k == 0 || k > assignment.k {
        return Err(Error::invalid(format!("cannot keep {k} of {} clusters", assignment.k)));
    }
    let mut counts = vec![0usize; assignment.k];
    for &l in &assignment.labels {
        counts[l] += 1;
    }
    let mut order: Vec<usize> = (0..assignment.k).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut kept = vec![false; assignment.k];
    for &c in &order[..k] {
        kept[c] = true;
    }
    let anchors: Vec<usize> = (0..n).filter(|&i| kept[assignment.labels[i]]).collect();
    let mut labels = assignment.labels.clone();
    for i in 0..n {
        if !kept[assignment.labels[i]] {
            let row = metric.row(i);
            let nearest = anchors
                .iter()
                .copied()
                .min_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)))
                .expect("at least one kept point");
            labels[i] = assignment.labels[nearest];
        }
    }
    Ok(ClusterAssignment::from_raw_labels(&labels, assignment.cutoff_height, assignment.requested_k))
}

/// Misclassification rate under the best matching between predicted
/// clusters and true labels. Points in predicted clusters left unmatched
/// (more clusters than classes) count as errors.
pub fn score(predicted: &[usize], truth: &[u32]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid(format!("{} predictions for {} labels", predicted.len(), truth.len())));
    }
    if predicted.is_empty() {
        return Ok(0.0);
    }
    let compact = |v: Vec<u64>| -> (Vec<usize>, usize) {
        let mut uniq = v.clone();
        uniq.sort_unstable();
        uniq.dedup();
        (v.iter().map(|x| uniq.binary_search(x).unwrap()).collect(), uniq.len())
    };
    let (p, np) = compact(predicted.iter().map(|&x| x as u64).collect());
    let (t, nt) = compact(truth.iter().map(|&x| x as u64).collect());
    let mut confusion = vec![0.0; np * nt];
    for (a, b) in p.iter().zip(&t) {
        confusion[a * nt + b] += 1.0;
    }
    let neg: Vec<f64> = confusion.iter().map(|c| -c).collect();
    let (best, _) = hungarian(&neg, np, nt);
    Ok(1.0 - (-best) / predicted.len() as f64)
}

/// Result of comparing base and ultrametric distortions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionCheck {
    pub dis_base: f64,
    pub dis_ultra: f64,
    pub passed: bool,
}

/// Checks `dis(R; H(X), H(Y)) ≤ dis(R; X, Y)` for single linkage `H`.
pub fn dendrogram_distortion_check(dx: &DistanceMatrix, dy: &DistanceMatrix, r: &Correspondence) -> Result<DistortionCheck> {
    let ux = cophenetic_matrix(&single_linkage(dx)?);
    let uy = cophenetic_matrix(&single_linkage(dy)?);
    let dis_base = distortion(r, dx, dy)?;
    let dis_ultra = distortion(r, &ux, &uy)?;
    Ok(DistortionCheck { dis_base, dis_ultra, passed: dis_ultra <= dis_base + 1e-9 })
}

/// Gromov-Hausdorff certification of the tensorized metric spaces of two
/// finitely supported probability measures, through the support of an
/// optimal `W_∞` coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhCertificate {
    pub winf: f64,
    /// `½ dis(R_μ; A, B)`, an upper bound on the GH distance.
    pub gh_upper: f64,
    /// `(2 A_f σ / C_d(σ) + γ) W_∞`.
    pub gh_bound: f64,
    /// `sup_{R_μ} |Σ_α(a) - Σ_β(b)|`.
    pub tensor_gap: f64,
    /// `(2 A_f σ / C_d(σ)) sup_{R_μ} |a - b|`.
    pub tensor_bound: f64,
    pub passed_gh: bool,
    pub passed_tensor: bool,
}

pub fn gh_certificate(alpha: &WeightedMeasure, beta: &WeightedMeasure, params: &TensorizedMetricParams) -> Result<GhCertificate> {
    let consts = derive_constants(&params.kernel, alpha.dim())?;
    let lip = consts
        .lipschitz(params.sigma)
        .ok_or_else(|| Error::Unsupported("GH certification needs a kernel with a derivative bound".into()))?;
    let (winf, plan) = winf_exact(alpha, beta)?;
    let r = correspondence_from_plan(&plan, 0.0);
    let ta = point_tensors(alpha, alpha, params)?;
    let tb = point_tensors(beta, beta, params)?;
    let da = tensorized_from_tensors(alpha, &ta, params.gamma);
    let db = tensorized_from_tensors(beta, &tb, params.gamma);
    let gh_upper = 0.5 * distortion(&r, &da, &db)?;
    let d = alpha.dim();
    let mut tensor_gap = 0.0f64;
    let mut spread = 0.0f64;
    for &(i, j) in &r.pairs {
        tensor_gap = tensor_gap.max(packed_frobenius_sq(&ta[i], &tb[j], d).sqrt());
        spread = spread.max(euclid(alpha.atom(i), beta.atom(j)));
    }
    let gh_bound = (2.0 * lip + params.gamma) * winf;
    let tensor_bound = 2.0 * lip * spread;
    Ok(GhCertificate {
        winf,
        gh_upper,
        gh_bound,
        tensor_gap,
        tensor_bound,
        passed_gh: gh_upper <= gh_bound + 1e-9,
        passed_tensor: tensor_gap <= tensor_bound + 1e-9,
    })
}
