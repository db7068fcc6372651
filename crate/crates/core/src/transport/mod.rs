//! Exact Wasserstein distances between finite measures, couplings and
//! correspondences, and numerical certificates for the CTF stability bounds.

mod bottleneck;
mod simplex;

use serde::Serialize;

use crate::ctf::{ctf_grid, Acceleration};
use crate::error::{Error, Result};
use crate::kernels::{ball_volume, derive_constants, sphere_area, RadialKernel};
use crate::measures::{neumaier_sum, WeightedMeasure};
use crate::metric::{euclid, DistanceMatrix};

/// Default cap on the atom count of each measure passed to the exact solvers.
pub const DEFAULT_MAX_ATOMS: usize = 2000;

/// A coupling between two finite measures, stored densely.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    pub n: usize,
    pub m: usize,
    /// Row-major `n × m` coupling.
    pub coupling: Vec<f64>,
    /// `Σ π_ij |x_i - y_j|`.
    pub cost_w1: f64,
}

impl TransportPlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.m + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| neumaier_sum(self.coupling[i * self.m..(i + 1) * self.m].iter().copied())).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.m).map(|j| neumaier_sum((0..self.n).map(|i| self.get(i, j)))).collect()
    }

    /// Largest deviation of the marginals from the given weights.
    pub fn marginal_error(&self, a: &[f64], b: &[f64]) -> f64 {
        let r = self.row_sums().iter().zip(a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let c = self.col_sums().iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        r.max(c)
    }

    /// Independent (product) coupling.
    pub fn product(a: &[f64], b: &[f64], dist: &[f64]) -> Self {
        let coupling: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        let cost_w1 = neumaier_sum(coupling.iter().zip(dist).map(|(p, d)| p * d));
        Self { n: a.len(), m: b.len(), coupling, cost_w1 }
    }
}

fn check_pair(alpha: &WeightedMeasure, beta: &WeightedMeasure, max_atoms: usize) -> Result<()> {
    if alpha.dim() != beta.dim() {
        return Err(Error::dims(alpha.dim(), beta.dim()));
    }
    if !alpha.is_normalized() || !beta.is_normalized() {
        return Err(Error::invalid("exact transport requires probability measures (weights summing to 1)"));
    }
    if alpha.len() > max_atoms || beta.len() > max_atoms {
        return Err(Error::invalid(format!(
            "measures with {} and {} atoms exceed the cap of {max_atoms}; subsample the inputs",
            alpha.len(),
            beta.len()
        )));
    }
    Ok(())
}

/// Euclidean cross-distance matrix, row-major `n × m`.
pub fn cross_distances(alpha: &WeightedMeasure, beta: &WeightedMeasure) -> Vec<f64> {
    alpha.atoms().flat_map(|x| beta.atoms().map(move |y| euclid(x, y))).collect()
}

/// `W_1(α, β)` and an optimal plan, by the transportation simplex.
pub fn w1_exact(alpha: &WeightedMeasure, beta: &WeightedMeasure) -> Result<(f64, TransportPlan)> {
    w1_exact_capped(alpha, beta, DEFAULT_MAX_ATOMS)
}

pub fn w1_exact_capped(alpha: &WeightedMeasure, beta: &WeightedMeasure, max_atoms: usize) -> Result<(f64, TransportPlan)> {
    check_pair(alpha, beta, max_atoms)?;
    let dist = cross_distances(alpha, beta);
    let coupling = simplex::solve(alpha.weights(), beta.weights(), &dist)?;
    let cost = neumaier_sum(coupling.iter().zip(&dist).map(|(p, d)| p * d));
    Ok((cost, TransportPlan { n: alpha.len(), m: beta.len(), coupling, cost_w1: cost }))
}

/// `W_∞(α, β)` and a plan whose support realizes it.
pub fn winf_exact(alpha: &WeightedMeasure, beta: &WeightedMeasure) -> Result<(f64, TransportPlan)> {
    winf_exact_capped(alpha, beta, DEFAULT_MAX_ATOMS)
}

pub fn winf_exact_capped(alpha: &WeightedMeasure, beta: &WeightedMeasure, max_atoms: usize) -> Result<(f64, TransportPlan)> {
    check_pair(alpha, beta, max_atoms)?;
    let dist = cross_distances(alpha, beta);
    let (value, coupling) = bottleneck::solve(alpha.weights(), beta.weights(), &dist);
    let cost = neumaier_sum(coupling.iter().zip(&dist).map(|(p, d)| p * d));
    Ok((value, TransportPlan { n: alpha.len(), m: beta.len(), coupling, cost_w1: cost }))
}

/// A relation between `{0..n_x}` and `{0..n_y}` covering both sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correspondence {
    pub n_x: usize,
    pub n_y: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(n_x: usize, n_y: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut cx = vec![false; n_x];
        let mut cy = vec![false; n_y];
        for &(i, j) in &pairs {
            if i >= n_x || j >= n_y {
                return Err(Error::invalid(format!("pair ({i}, {j}) is out of range")));
            }
            cx[i] = true;
            cy[j] = true;
        }
        if let Some(i) = cx.iter().position(|c| !c) {
            return Err(Error::invalid(format!("not a correspondence: source index {i} is uncovered")));
        }
        if let Some(j) = cy.iter().position(|c| !c) {
            return Err(Error::invalid(format!("not a correspondence: target index {j} is uncovered")));
        }
        Ok(Self { n_x, n_y, pairs })
    }

    pub fn identity(n: usize) -> Self {
        Self { n_x: n, n_y: n, pairs: (0..n).map(|i| (i, i)).collect() }
    }

    /// The same relation read from `Y` to `X`.
    pub fn transposed(&self) -> Self {
        Self { n_x: self.n_y, n_y: self.n_x, pairs: self.pairs.iter().map(|&(i, j)| (j, i)).collect() }
    }
}

/// `dis(R; X, Y) = max |d_X(x, x') - d_Y(y, y')|` over pairs of related pairs.
pub fn distortion(r: &Correspondence, dx: &DistanceMatrix, dy: &DistanceMatrix) -> Result<f64> {
    if dx.len() != r.n_x || dy.len() != r.n_y {
        return Err(Error::invalid("correspondence does not match the metric spaces"));
    }
    // Re-validate coverage in case the relation was built by hand.
    Correspondence::new(r.n_x, r.n_y, r.pairs.clone())?;
    let mut worst = 0.0f64;
    for (a, &(x, y)) in r.pairs.iter().enumerate() {
        for &(x2, y2) in &r.pairs[a + 1..] {
            worst = worst.max((dx.get(x, x2) - dy.get(y, y2)).abs());
        }
    }
    Ok(worst)
}

/// Support of a plan as a correspondence: pairs with
/// `π_ij > support_tol · max π`. If that misses an index, the threshold
/// drops to zero.
pub fn correspondence_from_plan(plan: &TransportPlan, support_tol: f64) -> Correspondence {
    let top = plan.coupling.iter().copied().fold(0.0, f64::max);
    let collect = |thr: f64| -> Vec<(usize, usize)> {
        (0..plan.n)
            .flat_map(|i| (0..plan.m).map(move |j| (i, j)))
            .filter(|&(i, j)| plan.get(i, j) > thr)
            .collect()
    };
    let pairs = collect(support_tol * top);
    match Correspondence::new(plan.n, plan.m, pairs) {
        Ok(c) => c,
        Err(_) => Correspondence { n_x: plan.n, n_y: plan.m, pairs: collect(0.0) },
    }
}

/// Outcome of a stability certification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Which bound was checked: `"smooth"` or `"truncation"`.
    pub kind: String,
    /// `max_grid |Σ_α - Σ_β|` (Frobenius).
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    /// `W_1` (smooth) or `W_∞` (truncation).
    pub wasserstein: f64,
    /// Factor multiplying the Wasserstein distance in the bound.
    pub constant: f64,
    pub a_f: Option<f64>,
    pub a_trunc: Option<f64>,
    pub lambda: Option<f64>,
    pub c: Option<f64>,
    pub sigma: f64,
    /// The theorem's hypotheses are not certified (e.g. an atomic `α` with
    /// a density bound that is only nominal).
    pub heuristic: bool,
}

fn grid_sup_difference(
    alpha: &WeightedMeasure,
    beta: &WeightedMeasure,
    kernel: &RadialKernel,
    sigma: f64,
    grid: &[Vec<f64>],
) -> Result<f64> {
    let ga = ctf_grid(alpha, kernel, grid, sigma, Acceleration::Exact)?;
    let gb = ctf_grid(beta, kernel, grid, sigma, Acceleration::Exact)?;
    Ok(ga.tensors.iter().zip(&gb.tensors).map(|(a, b)| a.frobenius_distance(b)).fold(0.0, f64::max))
}

fn passes(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-9 * rhs
}

/// Checks `sup_grid |Σ_α - Σ_β| ≤ (σ A_f / C_d(σ)) W_1(α, β)`.
pub fn check_stability_smooth(
    alpha: &WeightedMeasure,
    beta: &WeightedMeasure,
    kernel: &RadialKernel,
    sigma: f64,
    grid: &[Vec<f64>],
) -> Result<StabilityReport> {
    let k = derive_constants(kernel, alpha.dim())?;
    let constant = k.lipschitz(sigma).ok_or_else(|| {
        Error::Unsupported(format!("kernel '{}' has no derivative bound; smooth stability does not apply", kernel.name()))
    })?;
    let (w1, _) = w1_exact(alpha, beta)?;
    let lhs = grid_sup_difference(alpha, beta, kernel, sigma, grid)?;
    let rhs = constant * w1;
    Ok(StabilityReport {
        kind: "smooth".into(),
        lhs,
        rhs,
        slack: rhs - lhs,
        passed: passes(lhs, rhs),
        wasserstein: w1,
        constant,
        a_f: k.a_f,
        a_trunc: None,
        lambda: None,
        c: None,
        sigma,
        heuristic: false,
    })
}

/// `A(σ, d, c)` of the truncation-kernel stability bound:
/// `[d/(d+2)] (σ+c)^{d+2} / (c σ^d) + (2σ+c)(σ+c)^d / σ^d + [2d/(d+2)] (σ+c)^{d+2} / (c σ^d)`.
pub fn truncation_stability_constant(sigma: f64, d: usize, c: f64) -> f64 {
    let df = d as f64;
    let sd = sigma.powi(d as i32);
    let big = (sigma + c).powi(d as i32 + 2) / (c * sd);
    df / (df + 2.0) * big + (2.0 * sigma + c) * (sigma + c).powi(d as i32) / sd + 2.0 * df / (df + 2.0) * big
}

/// Density bound `λ` certifying `α ≤ λ · Lebesgue` for a quadrature measure:
/// the largest weight divided by the smallest quadrature cell volume.
pub fn density_certificate(measure: &WeightedMeasure, min_cell_volume: f64) -> Result<f64> {
    if !(min_cell_volume > 0.0) {
        return Err(Error::invalid("cell volume must be positive"));
    }
    Ok(measure.weights().iter().copied().fold(0.0, f64::max) / min_cell_volume)
}

/// Checks `sup_grid |Σ_α - Σ_β| ≤ λ A(σ, d, c) W_∞(α, β)` for the
/// truncation kernel. `lambda` is the caller's density certificate for `α`;
/// set `heuristic` when it does not actually bound a density (atomic `α`).
pub fn check_stability_trunc(
    alpha: &WeightedMeasure,
    beta: &WeightedMeasure,
    lambda: Option<f64>,
    sigma: f64,
    c: f64,
    grid: &[Vec<f64>],
    heuristic: bool,
) -> Result<StabilityReport> {
    let lambda = lambda.ok_or_else(|| Error::invalid("truncation stability needs a density bound lambda"))?;
    if !(lambda > 0.0 && c > 0.0 && sigma > 0.0) {
        return Err(Error::invalid("lambda, c and sigma must be positive"));
    }
    let a = truncation_stability_constant(sigma, alpha.dim(), c);
    let (winf, _) = winf_exact(alpha, beta)?;
    let lhs = grid_sup_difference(alpha, beta, &RadialKernel::truncation(), sigma, grid)?;
    let rhs = lambda * a * winf;
    Ok(StabilityReport {
        kind: "truncation".into(),
        lhs,
        rhs,
        slack: rhs - lhs,
        passed: passes(lhs, rhs),
        wasserstein: winf,
        constant: lambda * a,
        a_f: None,
        a_trunc: Some(a),
        lambda: Some(lambda),
        c: Some(c),
        sigma,
        heuristic,
    })
}

/// `s_d(a, b) = ∫_{a < |y| ≤ b} |y|^2 dy = ω_{d-1} (b^{d+2} - a^{d+2}) / (d + 2)`.
pub fn radial_moment(a: f64, b: f64, d: usize) -> Result<f64> {
    if !(0.0 <= a && a < b) {
        return Err(Error::invalid("radial moment needs 0 <= a < b"));
    }
    let p = d as i32 + 2;
    Ok(sphere_area(d) / (d as f64 + 2.0) * (b.powi(p) - a.powi(p)))
}

/// `(b - a) ω_{d-1} B^{d+2} / ((d + 2)(B - a))`, an upper bound on
/// `s_d(a, b)` for `B ≥ b`.
pub fn radial_moment_bound(a: f64, b: f64, big_b: f64, d: usize) -> Result<f64> {
    if !(0.0 <= a && a < b && b <= big_b) {
        return Err(Error::invalid("radial moment bound needs 0 <= a < b <= B"));
    }
    Ok((b - a) * sphere_area(d) / (d as f64 + 2.0) * big_b.powi(d as i32 + 2) / (big_b - a))
}

/// Volume of the ball of radius `r` in R^d.
pub fn ball_measure(r: f64, d: usize) -> f64 {
    ball_volume(d) * r.powi(d as i32)
}
