//! Experiment configuration. Every field has a default; a JSON file may set
//! any subset, and command-line flags override both.

use std::fs;
use std::path::{Path, PathBuf};

use ctfield::ctf::{regular_grid_2d, FlowParams};
use ctfield::measures::{ArrangementKind, ArrangementParams};
use ctfield::RadialKernel;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliResult};

/// A regular `nx × ny` grid on `[x0, x1] × [y0, y1]`, x varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        Self { x0: lo, x1: hi, y0: lo, y1: hi, nx: n, ny: n }
    }

    pub fn points(&self) -> CliResult<Vec<Vec<f64>>> {
        if self.nx == 0 || self.ny == 0 {
            return Err(config_err("grid needs at least one point per axis"));
        }
        Ok(regular_grid_2d(self.x0, self.x1, self.y0, self.y1, self.nx, self.ny))
    }

    /// Parses `x0,x1,y0,y1,nx,ny`.
    pub fn parse(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(config_err(format!("grid '{s}' must be x0,x1,y0,y1,nx,ny")));
        }
        let f = |i: usize| parts[i].parse::<f64>().map_err(|_| config_err(format!("bad grid value '{}'", parts[i])));
        let u = |i: usize| parts[i].parse::<usize>().map_err(|_| config_err(format!("bad grid count '{}'", parts[i])));
        Ok(Self { x0: f(0)?, x1: f(1)?, y0: f(2)?, y1: f(3)?, nx: u(4)?, ny: u(5)? })
    }
}

/// Kernel choice: a builtin name, or a tabulated profile read from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelSpec {
    pub name: String,
    pub table: Option<PathBuf>,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::named("gaussian")
    }
}

impl KernelSpec {
    pub fn named(name: &str) -> Self {
        Self { name: name.to_string(), table: None }
    }

    pub fn build(&self) -> CliResult<RadialKernel> {
        match &self.table {
            Some(path) => Ok(RadialKernel::load_tabulated_csv(path)?),
            None => Ok(RadialKernel::from_name(&self.name)?),
        }
    }
}

/// Convergence study of the empirical CTF of the uniform circle law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergeConfig {
    pub radius: f64,
    pub sigma: f64,
    pub kernel: KernelSpec,
    pub grid: GridSpec,
    pub replicates: usize,
    pub n_ladder: Vec<usize>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            sigma: 0.6,
            kernel: KernelSpec::named("truncation"),
            grid: GridSpec::square(-1.5, 1.5, 24),
            replicates: 30,
            n_ladder: vec![10, 100, 1_000, 10_000, 100_000],
        }
    }
}

/// Clustering benchmark on random arrangement suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub kinds: Vec<ArrangementKind>,
    pub n_samples: usize,
    pub n_train: usize,
    pub kernel: KernelSpec,
    pub sigmas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Number of cutoffs scanned in `h0 ± cut_width · sd`.
    pub cut_steps: usize,
    pub cut_width: f64,
    pub arrangement: ArrangementParams,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            kinds: vec![ArrangementKind::Lines2d, ArrangementKind::MixedCurves2d, ArrangementKind::Planes3d],
            n_samples: 250,
            n_train: 50,
            kernel: KernelSpec::named("truncation"),
            sigmas: vec![0.02, 0.03, 0.05, 0.1, 0.15, 0.2],
            gammas: vec![0.0, 0.001, 0.003, 0.01],
            cut_steps: 50,
            cut_width: 2.0,
            arrangement: ArrangementParams::default(),
        }
    }
}

/// Layout of the three-segment test arrangement: the sides of a triangle,
/// each extended past both vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriangleLayout {
    pub vertices: [[f64; 2]; 3],
    pub extension: f64,
    pub points_per_line: usize,
}

impl Default for TriangleLayout {
    fn default() -> Self {
        Self { vertices: [[0.5, 10.24], [-8.0, -4.62], [8.0, -4.62]], extension: 0.2, points_per_line: 200 }
    }
}

/// Clean three-line clustering at a fixed number of clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThreeLinesConfig {
    pub layout: TriangleLayout,
    pub kernel: KernelSpec,
    pub sigma: f64,
    pub gamma: f64,
    pub n_clusters: usize,
}

impl Default for ThreeLinesConfig {
    fn default() -> Self {
        Self {
            layout: TriangleLayout::default(),
            kernel: KernelSpec::named("gaussian"),
            sigma: 0.4,
            gamma: 0.0,
            n_clusters: 6,
        }
    }
}

/// Noisy three-line clustering with uniform outliers, over-segmentation,
/// and line fits to the largest clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoisyLinesConfig {
    pub layout: TriangleLayout,
    pub kernel: KernelSpec,
    pub noise_sd: f64,
    pub n_outliers: usize,
    /// Outliers are uniform on the bounding box of the segments grown by this margin.
    pub margin: f64,
    pub sigma: f64,
    /// Candidate values of γ; the one with the lowest training error is used.
    pub gammas: Vec<f64>,
    pub n_clusters: usize,
    pub top_k: usize,
    pub train_replicates: usize,
}

impl Default for NoisyLinesConfig {
    fn default() -> Self {
        Self {
            layout: TriangleLayout::default(),
            kernel: KernelSpec::named("gaussian"),
            noise_sd: 0.015,
            n_outliers: 180,
            margin: 0.5,
            sigma: 0.51,
            gammas: vec![0.0, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3],
            n_clusters: 80,
            top_k: 3,
            train_replicates: 4,
        }
    }
}

/// Settings shared by the single-run subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldConfig {
    pub kernel: KernelSpec,
    pub sigma: f64,
    pub grid: GridSpec,
    /// Relative eigenvalue threshold for dimension estimates.
    pub dim_threshold: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { kernel: KernelSpec::default(), sigma: 0.5, grid: GridSpec::square(-1.5, 1.5, 24), dim_threshold: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurvatureConfig {
    pub sigma_ladder: Vec<f64>,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self { sigma_ladder: vec![0.05, 0.04, 0.03] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub gamma: f64,
    pub n_clusters: Option<usize>,
    pub height: Option<f64>,
    pub top_k: Option<usize>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { gamma: 0.0, n_clusters: Some(2), height: None, top_k: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityConfig {
    /// Density bound of `α` for the truncation bound.
    pub lambda: Option<f64>,
    /// Radius parameter `c` of the truncation bound; defaults to σ.
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub field: FieldConfig,
    pub flow: FlowParams,
    pub curvature: CurvatureConfig,
    pub cluster: ClusterConfig,
    pub stability: StabilityConfig,
    pub converge: ConvergeConfig,
    pub bench: BenchConfig,
    pub three_lines: ThreeLinesConfig,
    pub noisy_lines: NoisyLinesConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            threads: None,
            field: FieldConfig::default(),
            flow: FlowParams::default(),
            curvature: CurvatureConfig::default(),
            cluster: ClusterConfig::default(),
            stability: StabilityConfig::default(),
            converge: ConvergeConfig::default(),
            bench: BenchConfig::default(),
            three_lines: ThreeLinesConfig::default(),
            noisy_lines: NoisyLinesConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
