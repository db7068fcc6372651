//! Experiment drivers: the convergence study, the clustering benchmark on
//! arrangement suites, and the three-line examples.

use std::f64::consts::TAU;

use ctfield::assignment::hungarian;
use ctfield::clustering::{
    cophenetic_std, cut, mean_cophenetic, score, single_linkage, tensorized_distances, topk_reassign, CutMode,
};
use ctfield::ctf::ctf_grid;
use ctfield::geometry::circle_ctf_exact;
use ctfield::measures::{
    gen_arrangement_suite, gen_line_arrangement, BoundingBox, LabeledDataset, LineSpec, OUTLIER_LABEL,
};
use ctfield::{Acceleration, ClusterAssignment, CovTensor, TensorizedMetricParams, WeightedMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BenchConfig, ConvergeConfig, NoisyLinesConfig, ThreeLinesConfig, TriangleLayout};
use crate::error::{config_err, CliError, CliResult};

/// Least-squares fit of `ln y = ln C + p ln x + extra(x)` for a fixed
/// offset term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLogFit {
    pub exponent: f64,
    pub constant: f64,
    /// RMS residual in `ln y`.
    pub rms_residual: f64,
}

/// Fits `y ≈ C x^p g(x)` where `g` is a known factor, by linear least
/// squares on `ln(y / g) = ln C + p ln x`.
pub fn fit_power_law(x: &[f64], y: &[f64], g: impl Fn(f64) -> f64) -> CliResult<LogLogFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(config_err("a power-law fit needs at least two points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(CliError::Numerical("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = x.iter().zip(y).map(|(a, b)| (b / g(*a)).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(config_err("a power-law fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = sxy / sxx;
    let c = my - p * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - c - p * a).powi(2)).sum();
    Ok(LogLogFit { exponent: p, constant: c.exp(), rms_residual: (rss / n).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n_values: Vec<usize>,
    /// `ε_n`: mean over replicates of the grid maximum of `|Σ_n - Σ|`.
    pub mean_errors: Vec<f64>,
    /// Standard error of each `ε_n`.
    pub std_errors: Vec<f64>,
    /// `errors[i][r]`: replicate `r` at `n_values[i]`.
    pub errors: Vec<Vec<f64>>,
    /// `ε_n ≈ C n^p`.
    pub power_fit: LogLogFit,
    /// `ε_n ≈ C ln(n)^{3/4} n^p`.
    pub log_power_fit: LogLogFit,
    pub monotone_decreasing: bool,
}

/// Samples `n` i.i.d. points of the uniform law on the circle of radius
/// `radius`, each with weight `1/n`.
pub fn sample_circle(radius: f64, n: usize, rng: &mut ChaCha20Rng) -> CliResult<WeightedMeasure> {
    let mut coords = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let t = rng.random_range(0.0..TAU);
        coords.push(radius * t.cos());
        coords.push(radius * t.sin());
    }
    Ok(WeightedMeasure::uniform(2, coords)?)
}

/// Random stream of replicate `r` at ladder position `i`: `seed ⊕ (i·2^32 + r)`.
fn replicate_seed(seed: u64, i: usize, r: usize) -> u64 {
    seed ^ (((i as u64) << 32) | r as u64)
}

/// Grid-sup error of the empirical CTF of the uniform circle law, averaged
/// over replicates, for each sample size of the ladder.
pub fn run_converge(cfg: &ConvergeConfig, seed: u64) -> CliResult<ConvergenceReport> {
    if cfg.n_ladder.is_empty() {
        return Err(config_err("n ladder is empty"));
    }
    if cfg.replicates == 0 || cfg.n_ladder.contains(&0) {
        return Err(config_err("replicates and sample sizes must be positive"));
    }
    let kernel = cfg.kernel.build()?;
    if !matches!(kernel.profile_kind(), ctfield::Profile::Truncation) {
        return Err(config_err("the circle oracle is available for the truncation kernel only"));
    }
    let grid = cfg.grid.points()?;
    let truth: Vec<CovTensor> =
        grid.iter().map(|x| circle_ctf_exact(cfg.radius, x, cfg.sigma, true)).collect::<Result<_, _>>()?;
    let mode = Acceleration::Indexed;
    let mut errors = Vec::with_capacity(cfg.n_ladder.len());
    for (i, &n) in cfg.n_ladder.iter().enumerate() {
        let reps: Vec<f64> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| -> CliResult<f64> {
                let mut rng = ChaCha20Rng::seed_from_u64(replicate_seed(seed, i, r));
                let m = sample_circle(cfg.radius, n, &mut rng)?;
                let field = ctf_grid(&m, &kernel, &grid, cfg.sigma, mode)?;
                Ok(field.tensors.iter().zip(&truth).map(|(a, b)| a.frobenius_distance(b)).fold(0.0, f64::max))
            })
            .collect::<CliResult<_>>()?;
        errors.push(reps);
    }
    let mean_errors: Vec<f64> = errors.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    let std_errors: Vec<f64> = errors
        .iter()
        .zip(&mean_errors)
        .map(|(v, m)| {
            if v.len() < 2 {
                return 0.0;
            }
            let var = v.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (var / v.len() as f64).sqrt()
        })
        .collect();
    let xs: Vec<f64> = cfg.n_ladder.iter().map(|&n| n as f64).collect();
    let power_fit = fit_power_law(&xs, &mean_errors, |_| 1.0)?;
    let log_power_fit = fit_power_law(&xs, &mean_errors, |n| n.ln().max(f64::MIN_POSITIVE).powf(0.75))?;
    let monotone_decreasing = mean_errors.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceReport {
        n_values: cfg.n_ladder.clone(),
        mean_errors,
        std_errors,
        errors,
        power_fit,
        log_power_fit,
        monotone_decreasing,
    })
}

/// Number of distinct non-outlier labels.
fn n_true_components(ds: &LabeledDataset) -> usize {
    let mut l: Vec<u32> = ds.labels.iter().copied().filter(|&x| x != OUTLIER_LABEL).collect();
    l.sort_unstable();
    l.dedup();
    l.len()
}

/// Per-dataset artefacts reused across cutoffs.
struct Prepared {
    metric: ctfield::DistanceMatrix,
    dendrogram: ctfield::Dendrogram,
    h0: f64,
    sd: f64,
    k: usize,
}

fn prepare(ds: &LabeledDataset, params: &TensorizedMetricParams) -> CliResult<Prepared> {
    let metric = tensorized_distances(&ds.measure, params, None)?;
    let dendrogram = single_linkage(&metric)?;
    let (h0, sd) = if ds.measure.len() >= 2 {
        (mean_cophenetic(&dendrogram)?, cophenetic_std(&dendrogram)?)
    } else {
        (0.0, 0.0)
    };
    Ok(Prepared { metric, dendrogram, h0, sd, k: n_true_components(ds).max(1) })
}

/// Cutoff offsets `t` for `h = h0 + t · sd`.
fn cut_offsets(steps: usize, width: f64) -> Vec<f64> {
    if steps <= 1 {
        return vec![0.0];
    }
    (0..steps).map(|i| -width + 2.0 * width * i as f64 / (steps - 1) as f64).collect()
}

/// Cuts at `h0 + t · sd` and folds small clusters into the `k` largest.
fn cluster_at(p: &Prepared, t: f64) -> CliResult<ClusterAssignment> {
    let h = (p.h0 + t * p.sd).max(0.0);
    let c = cut(&p.dendrogram, CutMode::AtHeight(h))?;
    if c.k > p.k {
        Ok(topk_reassign(&c, &p.metric, p.k)?)
    } else {
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub kind: String,
    pub n_train: usize,
    pub n_test: usize,
    pub sigma: f64,
    pub gamma: f64,
    /// Learned cutoff offset `t` in `h = h0 + t · sd`.
    pub cut_offset: f64,
    pub train_error: f64,
    /// Average error over test samples.
    pub ae: f64,
    /// Median error over test samples.
    pub me_median: f64,
    /// Mean error over test samples (equal to `ae`; reported for clarity).
    pub me_mean: f64,
    pub test_errors: Vec<f64>,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Learns `(σ, γ, t)` on the first `n_train` datasets by grid search and
/// evaluates on the rest. A suite too small to split is used for both.
pub fn run_cluster_suite(name: &str, suite: &[LabeledDataset], cfg: &BenchConfig) -> CliResult<SuiteSummary> {
    if suite.is_empty() {
        return Err(config_err("empty suite"));
    }
    if cfg.sigmas.is_empty() || cfg.gammas.is_empty() {
        return Err(config_err("benchmark grid needs at least one sigma and one gamma"));
    }
    let kernel = cfg.kernel.build()?;
    let (train, test) = if suite.len() > cfg.n_train && cfg.n_train > 0 {
        suite.split_at(cfg.n_train)
    } else {
        (suite, suite)
    };
    let offsets = cut_offsets(cfg.cut_steps, cfg.cut_width);

    // (mean training error, sigma index, gamma index, offset index); ties
    // resolve to the earliest grid entry.
    let mut best: Option<(f64, usize, usize, usize)> = None;
    for (si, &sigma) in cfg.sigmas.iter().enumerate() {
        for (gi, &gamma) in cfg.gammas.iter().enumerate() {
            let params = TensorizedMetricParams::new(gamma, sigma, kernel.clone())?;
            let per_sample: Vec<Vec<f64>> = train
                .par_iter()
                .map(|ds| -> CliResult<Vec<f64>> {
                    let p = prepare(ds, &params)?;
                    offsets.iter().map(|&t| Ok(score(&cluster_at(&p, t)?.labels, &ds.labels)?)).collect()
                })
                .collect::<CliResult<_>>()?;
            for ti in 0..offsets.len() {
                let e = per_sample.iter().map(|v| v[ti]).sum::<f64>() / per_sample.len() as f64;
                if best.is_none_or(|b| e < b.0) {
                    best = Some((e, si, gi, ti));
                }
            }
        }
    }
    let (train_error, si, gi, ti) = best.expect("non-empty grid");
    let (sigma, gamma, t) = (cfg.sigmas[si], cfg.gammas[gi], offsets[ti]);
    let params = TensorizedMetricParams::new(gamma, sigma, kernel)?;
    let test_errors: Vec<f64> = test
        .par_iter()
        .map(|ds| -> CliResult<f64> {
            let p = prepare(ds, &params)?;
            Ok(score(&cluster_at(&p, t)?.labels, &ds.labels)?)
        })
        .collect::<CliResult<_>>()?;
    let ae = test_errors.iter().sum::<f64>() / test_errors.len() as f64;
    Ok(SuiteSummary {
        kind: name.to_string(),
        n_train: train.len(),
        n_test: test.len(),
        sigma,
        gamma,
        cut_offset: t,
        train_error,
        ae,
        me_median: median(&test_errors),
        me_mean: ae,
        test_errors,
    })
}

/// Generates every configured suite (suite `j` uses seed `seed ⊕ (j << 40)`)
/// and benchmarks it.
pub fn run_cluster_benchmark(cfg: &BenchConfig, seed: u64) -> CliResult<Vec<SuiteSummary>> {
    if cfg.kinds.is_empty() {
        return Err(config_err("no arrangement kinds configured"));
    }
    cfg.kinds
        .iter()
        .enumerate()
        .map(|(j, &kind)| {
            let suite = gen_arrangement_suite(kind, cfg.n_samples, seed ^ ((j as u64) << 40), &cfg.arrangement)?;
            run_cluster_suite(kind.name(), &suite, cfg)
        })
        .collect()
}

/// The three triangle sides as segments extended past the vertices.
pub fn triangle_lines(layout: &TriangleLayout) -> CliResult<Vec<LineSpec>> {
    (0..3)
        .map(|k| {
            let p = layout.vertices[k];
            let q = layout.vertices[(k + 1) % 3];
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            if len == 0.0 {
                return Err(config_err("triangle vertices must be distinct"));
            }
            let d = [(q[0] - p[0]) / len, (q[1] - p[1]) / len];
            let e = layout.extension;
            Ok(LineSpec {
                a: vec![p[0] - e * d[0], p[1] - e * d[1]],
                b: vec![q[0] + e * d[0], q[1] + e * d[1]],
                n_points: layout.points_per_line,
            })
        })
        .collect()
}

fn lines_bbox(lines: &[LineSpec], margin: f64) -> BoundingBox {
    let mut min = vec![f64::INFINITY; 2];
    let mut max = vec![f64::NEG_INFINITY; 2];
    for l in lines {
        for p in [&l.a, &l.b] {
            for j in 0..2 {
                min[j] = min[j].min(p[j] - margin);
                max[j] = max[j].max(p[j] + margin);
            }
        }
    }
    BoundingBox { min, max }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreeLinesReport {
    pub n_points: usize,
    pub k: usize,
    pub cluster_sizes: Vec<usize>,
    pub accuracy: f64,
    pub labels: Vec<usize>,
}

pub fn three_lines_dataset(cfg: &ThreeLinesConfig) -> CliResult<LabeledDataset> {
    let lines = triangle_lines(&cfg.layout)?;
    Ok(gen_line_arrangement(&lines, 0.0, 0, &lines_bbox(&lines, 0.0), 0)?)
}

/// Clusters the clean arrangement into a fixed number of clusters.
pub fn run_three_lines(cfg: &ThreeLinesConfig) -> CliResult<ThreeLinesReport> {
    let ds = three_lines_dataset(cfg)?;
    let params = TensorizedMetricParams::new(cfg.gamma, cfg.sigma, cfg.kernel.build()?)?;
    let metric = tensorized_distances(&ds.measure, &params, None)?;
    let c = cut(&single_linkage(&metric)?, CutMode::AtK(cfg.n_clusters))?;
    let accuracy = 1.0 - score(&c.labels, &ds.labels)?;
    Ok(ThreeLinesReport { n_points: ds.measure.len(), k: c.k, cluster_sizes: c.sizes(), accuracy, labels: c.labels })
}

/// Centroid and unit principal direction of a planar point set.
pub fn fit_line_pca(points: &[&[f64]]) -> CliResult<([f64; 2], [f64; 2])> {
    if points.len() < 2 {
        return Err(CliError::Numerical("a line fit needs at least two points".into()));
    }
    let n = points.len() as f64;
    let c = [points.iter().map(|p| p[0]).sum::<f64>() / n, points.iter().map(|p| p[1]).sum::<f64>() / n];
    let mut cov = [0.0; 4];
    for p in points {
        let v = [p[0] - c[0], p[1] - c[1]];
        cov[0] += v[0] * v[0] / n;
        cov[1] += v[0] * v[1] / n;
        cov[2] += v[1] * v[0] / n;
        cov[3] += v[1] * v[1] / n;
    }
    let spec = CovTensor::from_row_major(2, &cov)?.spectrum();
    let top = spec.eigenvectors.last().expect("two eigenvectors");
    Ok((c, [top[0], top[1]]))
}

/// Acute angle between two lines with the given directions, in degrees.
pub fn line_angle_deg(u: [f64; 2], v: [f64; 2]) -> f64 {
    let c = (u[0] * v[0] + u[1] * v[1]).abs() / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
    c.min(1.0).acos().to_degrees()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisyLinesReport {
    pub gamma: f64,
    /// Mean training error of every candidate γ, in config order.
    pub gamma_train_errors: Vec<f64>,
    pub n_clusters: usize,
    /// Sizes of the `top_k` largest clusters before reassignment.
    pub top_sizes: Vec<usize>,
    /// Angle between each generator line and its matched fitted line.
    pub angle_errors_deg: Vec<f64>,
    pub max_angle_deg: f64,
    /// Fitted `(centroid, direction)` per generator line.
    pub fitted: Vec<([f64; 2], [f64; 2])>,
    /// Error of the reassigned labelling on the non-outlier points.
    pub test_error: f64,
    pub labels: Vec<usize>,
}

pub fn noisy_lines_dataset(cfg: &NoisyLinesConfig, seed: u64) -> CliResult<LabeledDataset> {
    let lines = triangle_lines(&cfg.layout)?;
    Ok(gen_line_arrangement(&lines, cfg.noise_sd, cfg.n_outliers, &lines_bbox(&lines, cfg.margin), seed)?)
}

/// Over-segments, keeps the `top_k` largest clusters, and scores the
/// reassigned labels on the points that are not outliers.
fn noisy_cluster(ds: &LabeledDataset, cfg: &NoisyLinesConfig, gamma: f64) -> CliResult<(ClusterAssignment, ClusterAssignment, f64)> {
    let params = TensorizedMetricParams::new(gamma, cfg.sigma, cfg.kernel.build()?)?;
    let metric = tensorized_distances(&ds.measure, &params, None)?;
    let raw = cut(&single_linkage(&metric)?, CutMode::AtK(cfg.n_clusters))?;
    let kept = topk_reassign(&raw, &metric, cfg.top_k)?;
    let inliers: Vec<usize> = (0..ds.labels.len()).filter(|&i| ds.labels[i] != OUTLIER_LABEL).collect();
    let pred: Vec<usize> = inliers.iter().map(|&i| kept.labels[i]).collect();
    let truth: Vec<u32> = inliers.iter().map(|&i| ds.labels[i]).collect();
    let err = score(&pred, &truth)?;
    Ok((raw, kept, err))
}

/// Learns γ on `train_replicates` datasets (seeds `seed ⊕ (r + 1)`), then
/// fits a line by PCA to each of the `top_k` largest clusters of the
/// dataset drawn with `seed`.
pub fn run_noisy_lines(cfg: &NoisyLinesConfig, seed: u64) -> CliResult<NoisyLinesReport> {
    if cfg.gammas.is_empty() {
        return Err(config_err("no candidate gamma values"));
    }
    let train: Vec<LabeledDataset> = (0..cfg.train_replicates.max(1))
        .map(|r| noisy_lines_dataset(cfg, seed ^ (r as u64 + 1)))
        .collect::<CliResult<_>>()?;
    let gamma_train_errors: Vec<f64> = cfg
        .gammas
        .iter()
        .map(|&g| {
            let errs: Vec<f64> = train.par_iter().map(|ds| Ok(noisy_cluster(ds, cfg, g)?.2)).collect::<CliResult<_>>()?;
            Ok(errs.iter().sum::<f64>() / errs.len() as f64)
        })
        .collect::<CliResult<_>>()?;
    let gi = (0..cfg.gammas.len())
        .min_by(|&a, &b| gamma_train_errors[a].total_cmp(&gamma_train_errors[b]).then(a.cmp(&b)))
        .expect("non-empty");
    let gamma = cfg.gammas[gi];

    let ds = noisy_lines_dataset(cfg, seed)?;
    let (raw, kept, test_error) = noisy_cluster(&ds, cfg, gamma)?;
    let sizes = raw.sizes();
    let mut order: Vec<usize> = (0..raw.k).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let order = &order[..cfg.top_k];
    let fits: Vec<([f64; 2], [f64; 2])> = order
        .iter()
        .map(|&c| {
            let pts: Vec<&[f64]> = (0..ds.labels.len()).filter(|&i| raw.labels[i] == c).map(|i| ds.measure.atom(i)).collect();
            fit_line_pca(&pts)
        })
        .collect::<CliResult<_>>()?;

    let generators: Vec<[f64; 2]> =
        triangle_lines(&cfg.layout)?.iter().map(|l| [l.b[0] - l.a[0], l.b[1] - l.a[1]]).collect();
    let cost: Vec<f64> =
        generators.iter().flat_map(|g| fits.iter().map(move |f| line_angle_deg(*g, f.1))).collect();
    let (_, matching) = hungarian(&cost, generators.len(), fits.len());
    let mut angle_errors_deg = Vec::new();
    let mut fitted = Vec::new();
    for (gi, m) in matching.iter().enumerate() {
        let j = m.ok_or_else(|| CliError::Numerical("fewer fitted lines than generators".into()))?;
        angle_errors_deg.push(cost[gi * fits.len() + j]);
        fitted.push(fits[j]);
    }
    let max_angle_deg = angle_errors_deg.iter().copied().fold(0.0, f64::max);
    Ok(NoisyLinesReport {
        gamma,
        gamma_train_errors,
        n_clusters: raw.k,
        top_sizes: order.iter().map(|&c| sizes[c]).collect(),
        angle_errors_deg,
        max_angle_deg,
        fitted,
        test_error,
        labels: kept.labels,
    })
}
