//! Command-line definition and subcommand implementations.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctfield::clustering::{cophenetic_std, cut, mean_cophenetic, score, single_linkage, tensorized_distances, topk_reassign};
use ctfield::ctf::{ctf_grid, flow_basins};
use ctfield::geometry::{curve_curvature, surface_curvatures, SurfaceFitTolerance};
use ctfield::measures::{
    gen_arrangement_suite, load_dataset_csv, load_dataset_json, load_measure_csv, quadrature_arc, quadrature_circle, quadrature_sphere,
    save_dataset_csv, save_dataset_json, save_measure_csv, ArrangementKind, LabeledDataset,
};
use ctfield::tensor::dimension_estimate;
use ctfield::transport::{check_stability_smooth, check_stability_trunc};
use ctfield::{Acceleration, CutMode, Profile, TensorizedMetricParams, WeightedMeasure};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, GridSpec, KernelSpec};
use crate::error::{config_err, CliError, CliResult};
use crate::experiments::{
    noisy_lines_dataset, run_cluster_benchmark, run_converge, run_noisy_lines, run_three_lines, three_lines_dataset,
};
use crate::plot::{emit_plot, PlotData, Series};

#[derive(Debug, Parser)]
#[command(name = "ctfield", version, about = "Multiscale covariance tensor fields of point measures")]
pub struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate datasets and quadrature measures.
    Gen(GenArgs),
    /// Covariance tensor field on a grid.
    Ctf(FieldArgs),
    /// Eigen-decomposition and dimension estimate of the field.
    Spectrum(FieldArgs),
    /// Fréchet function on a grid.
    Frechet(FieldArgs),
    /// Gradient flow of the Gaussian Fréchet function from grid starts.
    Flow(FieldArgs),
    /// Curvature from the CTF trace over a scale ladder.
    Curvature(CurvatureArgs),
    /// Tensorized-metric single-linkage clustering of a dataset.
    Cluster(ClusterArgs),
    /// Wasserstein stability check for two measures.
    Stability(StabilityArgs),
    /// Convergence-rate study on the circle.
    Converge(ConvergeArgs),
    /// Clustering benchmarks.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    ThreeLines,
    NoisyLines,
    Lines2d,
    MixedCurves2d,
    Planes3d,
    Circle,
    Sphere,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Suite size, or atom count for the circle.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Also write the JSON mirror of each dataset.
    #[arg(long)]
    pub json: bool,
    /// Circle only: align the quadrature at angle 0 with these scales (comma-separated).
    #[arg(long)]
    pub ladder: Option<String>,
    /// Arc-length spacing of the aligned circle quadrature.
    #[arg(long, default_value_t = 1e-4)]
    pub spacing: f64,
}

#[derive(Debug, Args, Clone)]
pub struct KernelArgs {
    /// Builtin kernel: gaussian or truncation.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Tabulated profile CSV with header r,f.
    #[arg(long)]
    pub kernel_table: Option<PathBuf>,
}

impl KernelArgs {
    fn apply(&self, spec: &mut KernelSpec) {
        if let Some(k) = &self.kernel {
            spec.name = k.clone();
            spec.table = None;
        }
        if let Some(t) = &self.kernel_table {
            spec.table = Some(t.clone());
        }
    }
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Measure CSV (x1..xd,weight).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Planar grid x0,x1,y0,y1,nx,ny.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Query points CSV (header x1..xd); replaces the grid.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Use the bucket-grid index (compact kernels).
    #[arg(long)]
    pub indexed: bool,
    /// Also emit an SVG plot.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated coordinates of the point.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Comma-separated scale ladder.
    #[arg(long)]
    pub ladder: Option<String>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Dataset CSV (x1..xd,weight[,label]) or JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cut into this many clusters.
    #[arg(long, conflicts_with = "height")]
    pub k: Option<usize>,
    /// Cut at this height.
    #[arg(long)]
    pub height: Option<f64>,
    /// Keep the largest clusters and reassign the rest.
    #[arg(long)]
    pub topk: Option<usize>,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long)]
    pub alpha: PathBuf,
    #[arg(long)]
    pub beta: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Density bound of alpha (truncation kernel).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Radius parameter c of the truncation bound.
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Comma-separated sample sizes.
    #[arg(long)]
    pub n_ladder: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Suites,
    ThreeLines,
    NoisyLines,
    All,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Experiment::All)]
    pub experiment: Experiment,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub n_train: Option<usize>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| config_err(format!("bad {what} value '{p}'"))))
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), value)?;
    Ok(())
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::Io(e.into()))
}

fn csv_io(e: csv::Error) -> CliError {
    CliError::Io(e.into())
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn load_points(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_io)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let row: Vec<f64> = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|_| config_err(format!("{} line {}: bad number", path.display(), i + 2))))
            .collect::<CliResult<_>>()?;
        out.push(row);
    }
    Ok(out)
}

fn load_dataset(path: &Path) -> CliResult<LabeledDataset> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(load_dataset_json(path)?)
    } else {
        Ok(load_dataset_csv(path)?)
    }
}

/// Resolves the configuration, prepares the output directory, and runs the
/// subcommand. Returns the JSON summary printed on standard output.
pub fn run(cli: Cli) -> CliResult<serde_json::Value> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(config_err("threads must be positive"));
        }
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    fs::create_dir_all(&cfg.out)?;
    match cli.command {
        Command::Gen(a) => gen(&cfg, a),
        Command::Ctf(a) => field(&mut cfg, a, FieldOutput::Ctf),
        Command::Spectrum(a) => field(&mut cfg, a, FieldOutput::Spectrum),
        Command::Frechet(a) => field(&mut cfg, a, FieldOutput::Frechet),
        Command::Flow(a) => flow(&mut cfg, a),
        Command::Curvature(a) => curvature(&mut cfg, a),
        Command::Cluster(a) => cluster(&mut cfg, a),
        Command::Stability(a) => stability(&mut cfg, a),
        Command::Converge(a) => converge(&mut cfg, a),
        Command::Bench(a) => bench(&mut cfg, a),
    }
}

fn save(ds: &LabeledDataset, dir: &Path, stem: &str, json: bool) -> CliResult<Vec<String>> {
    let csv = dir.join(format!("{stem}.csv"));
    save_dataset_csv(ds, &csv)?;
    let mut files = vec![csv.display().to_string()];
    if json {
        let p = dir.join(format!("{stem}.json"));
        save_dataset_json(ds, &p)?;
        files.push(p.display().to_string());
    }
    Ok(files)
}

fn gen(cfg: &ExperimentConfig, a: GenArgs) -> CliResult<serde_json::Value> {
    let out = &cfg.out;
    let files = match a.kind {
        GenKind::ThreeLines => save(&three_lines_dataset(&cfg.three_lines)?, out, "three_lines", a.json)?,
        GenKind::NoisyLines => save(&noisy_lines_dataset(&cfg.noisy_lines, cfg.seed)?, out, "noisy_lines", a.json)?,
        GenKind::Lines2d | GenKind::MixedCurves2d | GenKind::Planes3d => {
            let kind = match a.kind {
                GenKind::Lines2d => ArrangementKind::Lines2d,
                GenKind::MixedCurves2d => ArrangementKind::MixedCurves2d,
                _ => ArrangementKind::Planes3d,
            };
            let suite = gen_arrangement_suite(kind, a.n.unwrap_or(cfg.bench.n_samples), cfg.seed, &cfg.bench.arrangement)?;
            let mut files = Vec::new();
            for (i, ds) in suite.iter().enumerate() {
                files.extend(save(ds, out, &format!("{}_{i:03}", kind.name()), a.json)?);
            }
            files
        }
        GenKind::Circle => {
            let m = match &a.ladder {
                Some(l) => {
                    // Atoms never straddle the ball boundaries seen from the point (R, 0).
                    let breaks: Vec<f64> = parse_list::<f64>(l, "ladder")?
                        .iter()
                        .map(|s| 2.0 * (s / (2.0 * a.radius)).min(1.0).asin())
                        .collect();
                    quadrature_arc(a.radius, 0.0, &breaks, a.spacing)?
                }
                None => quadrature_circle(a.radius, a.n.unwrap_or(100_000))?,
            };
            let p = out.join("circle.csv");
            save_measure_csv(&m, &p)?;
            vec![p.display().to_string()]
        }
        GenKind::Sphere => {
            let n = a.n.unwrap_or(200);
            let m = quadrature_sphere(a.radius, n, 2 * n)?;
            let p = out.join("sphere.csv");
            save_measure_csv(&m, &p)?;
            vec![p.display().to_string()]
        }
    };
    Ok(json!({ "command": "gen", "files": files }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FieldOutput {
    Ctf,
    Spectrum,
    Frechet,
}

struct FieldInputs {
    measure: WeightedMeasure,
    kernel: ctfield::RadialKernel,
    query: Vec<Vec<f64>>,
    grid: Option<GridSpec>,
}

fn field_inputs(cfg: &mut ExperimentConfig, a: &FieldArgs) -> CliResult<FieldInputs> {
    a.kernel.apply(&mut cfg.field.kernel);
    if let Some(s) = a.sigma {
        cfg.field.sigma = s;
    }
    if let Some(g) = &a.grid {
        cfg.field.grid = GridSpec::parse(g)?;
    }
    let measure = load_measure_csv(&a.input)?;
    let kernel = cfg.field.kernel.build()?;
    let (query, grid) = match &a.points {
        Some(p) => (load_points(p)?, None),
        None => {
            if measure.dim() != 2 {
                return Err(config_err("grids are planar; pass --points for other dimensions"));
            }
            (cfg.field.grid.points()?, Some(cfg.field.grid.clone()))
        }
    };
    Ok(FieldInputs { measure, kernel, query, grid })
}

fn field(cfg: &mut ExperimentConfig, a: FieldArgs, what: FieldOutput) -> CliResult<serde_json::Value> {
    let inp = field_inputs(cfg, &a)?;
    let mode = if a.indexed { Acceleration::Indexed } else { Acceleration::Exact };
    let f = ctf_grid(&inp.measure, &inp.kernel, &inp.query, cfg.field.sigma, mode)?;
    let out = &cfg.out;
    let d = f.dim;
    match what {
        FieldOutput::Ctf => {
            f.save_csv(out.join("ctf.csv"))?;
            if a.svg && d == 2 {
                emit_plot(&PlotData::TensorGlyphs { points: &f.query_points, tensors: &f.tensors }, out.join("ctf.svg"))?;
            }
            let max_trace = f.tensors.iter().map(|t| t.trace()).fold(0.0, f64::max);
            let summary = json!({ "command": "ctf", "points": f.len(), "sigma": f.sigma, "max_trace": max_trace });
            write_json(&out.join("ctf.json"), &summary)?;
            Ok(summary)
        }
        FieldOutput::Spectrum => {
            let mut w = csv_writer(&out.join("spectrum.csv"))?;
            let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
            header.extend((1..=d).map(|i| format!("lambda_{i}")));
            for i in 1..=d {
                header.extend((1..=d).map(|j| format!("v{i}_{j}")));
            }
            header.extend(["trace".into(), "dimension".into()]);
            w.write_record(&header).map_err(csv_io)?;
            let mut dims = vec![0usize; d + 1];
            for (x, t) in f.query_points.iter().zip(&f.tensors) {
                let s = t.spectrum();
                let k = dimension_estimate(&s, cfg.field.dim_threshold);
                dims[k] += 1;
                let mut row: Vec<String> = x.iter().map(|v| fmt(*v)).collect();
                row.extend(s.eigenvalues.iter().map(|v| fmt(*v)));
                for v in &s.eigenvectors {
                    row.extend(v.iter().map(|c| fmt(*c)));
                }
                row.push(fmt(s.trace));
                row.push(k.to_string());
                w.write_record(&row).map_err(csv_io)?;
            }
            w.flush()?;
            let summary = json!({ "command": "spectrum", "points": f.len(), "dimension_counts": dims });
            write_json(&out.join("spectrum.json"), &summary)?;
            Ok(summary)
        }
        FieldOutput::Frechet => {
            let mut w = csv_writer(&out.join("frechet.csv"))?;
            let mut header: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
            header.extend(["sigma".into(), "V".into()]);
            w.write_record(&header).map_err(csv_io)?;
            for (x, v) in f.query_points.iter().zip(&f.frechet_values) {
                let mut row: Vec<String> = x.iter().map(|c| fmt(*c)).collect();
                row.push(fmt(f.sigma));
                row.push(fmt(*v));
                w.write_record(&row).map_err(csv_io)?;
            }
            w.flush()?;
            if let (true, Some(g)) = (a.svg, &inp.grid) {
                emit_plot(&PlotData::FieldHeatmap { grid: g, values: &f.frechet_values }, out.join("frechet.svg"))?;
            }
            let (imin, vmin) = f
                .frechet_values
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
            let summary = json!({ "command": "frechet", "points": f.len(), "min_value": vmin, "argmin": f.query_points[imin] });
            write_json(&out.join("frechet.json"), &summary)?;
            Ok(summary)
        }
    }
}

fn flow(cfg: &mut ExperimentConfig, a: FieldArgs) -> CliResult<serde_json::Value> {
    let inp = field_inputs(cfg, &a)?;
    let mut params = cfg.flow.clone();
    params.record_path = false;
    let res = flow_basins(&inp.measure, &inp.kernel, &inp.query, cfg.field.sigma, &params)?;
    let d = inp.measure.dim();
    let mut w = csv_writer(&cfg.out.join("flow.csv"))?;
    let mut header: Vec<String> = (1..=d).map(|i| format!("start_{i}")).collect();
    header.extend((1..=d).map(|i| format!("attractor_{i}")));
    header.extend(["basin".into(), "iterations".into(), "converged".into(), "stalled".into()]);
    w.write_record(&header).map_err(csv_io)?;
    let mut attractors: Vec<Vec<f64>> = Vec::new();
    for r in &res {
        let mut row: Vec<String> = r.start.iter().map(|v| fmt(*v)).collect();
        row.extend(r.attractor.iter().map(|v| fmt(*v)));
        row.extend([r.basin_id.to_string(), r.iterations.to_string(), r.converged.to_string(), r.stalled.to_string()]);
        w.write_record(&row).map_err(csv_io)?;
        if r.basin_id == attractors.len() {
            attractors.push(r.attractor.clone());
        }
    }
    w.flush()?;
    let summary = json!({
        "command": "flow",
        "starts": res.len(),
        "basins": attractors.len(),
        "attractors": attractors,
        "unconverged": res.iter().filter(|r| !r.converged).count(),
    });
    write_json(&cfg.out.join("flow.json"), &summary)?;
    Ok(summary)
}

fn curvature(cfg: &mut ExperimentConfig, a: CurvatureArgs) -> CliResult<serde_json::Value> {
    if let Some(l) = &a.ladder {
        cfg.curvature.sigma_ladder = parse_list(l, "ladder")?;
    }
    let point: Vec<f64> = parse_list(&a.point, "point")?;
    let measure = load_measure_csv(&a.input)?;
    let kernel = ctfield::RadialKernel::truncation();
    let ladder = &cfg.curvature.sigma_ladder;
    let ladder_txt = ladder.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
    let coords: Vec<String> = point.iter().map(|v| fmt(*v)).collect();
    let mut w = csv_writer(&cfg.out.join("curvature.csv"))?;
    let summary = match measure.dim() {
        2 => {
            let e = curve_curvature(&measure, &kernel, &point, ladder)?;
            w.write_record(["x_1", "x_2", "sigma_ladder", "kappa", "residual", "reliable", "clamped"]).map_err(csv_io)?;
            let mut row = coords.clone();
            row.extend([ladder_txt, fmt(e.kappa_abs), fmt(e.residual), e.reliable.to_string(), e.clamped.to_string()]);
            w.write_record(&row).map_err(csv_io)?;
            serde_json::to_value(&e)?
        }
        3 => {
            let e = surface_curvatures(&measure, &kernel, &point, ladder, SurfaceFitTolerance::default())?;
            w.write_record([
                "x_1",
                "x_2",
                "x_3",
                "sigma_ladder",
                "kappa_1",
                "kappa_2",
                "trace_residual",
                "det_residual",
                "sign_ambiguity",
                "umbilic",
            ])
            .map_err(csv_io)?;
            let mut row = coords.clone();
            row.extend([
                ladder_txt,
                fmt(e.kappa1),
                fmt(e.kappa2),
                fmt(e.trace_residual),
                fmt(e.det_residual),
                e.sign_ambiguity.to_string(),
                e.umbilic.to_string(),
            ]);
            w.write_record(&row).map_err(csv_io)?;
            serde_json::to_value(&e)?
        }
        d => return Err(config_err(format!("curvature needs a planar curve or a surface in R^3, got dimension {d}"))),
    };
    w.flush()?;
    write_json(&cfg.out.join("curvature.json"), &summary)?;
    Ok(summary)
}

#[derive(Serialize)]
struct ClusterReport {
    command: &'static str,
    n_points: usize,
    k: usize,
    cluster_sizes: Vec<usize>,
    cutoff_height: f64,
    tie_inflated: bool,
    mean_cophenetic: Option<f64>,
    cophenetic_std: Option<f64>,
    pseudo_metric: bool,
    /// Error against the dataset's labels when it carries more than one.
    error_rate: Option<f64>,
}

fn cluster(cfg: &mut ExperimentConfig, a: ClusterArgs) -> CliResult<serde_json::Value> {
    a.kernel.apply(&mut cfg.field.kernel);
    if let Some(s) = a.sigma {
        cfg.field.sigma = s;
    }
    if let Some(g) = a.gamma {
        cfg.cluster.gamma = g;
    }
    if a.k.is_some() || a.height.is_some() {
        cfg.cluster.n_clusters = a.k;
        cfg.cluster.height = a.height;
    }
    if a.topk.is_some() {
        cfg.cluster.top_k = a.topk;
    }
    let ds = load_dataset(&a.input)?;
    let params = TensorizedMetricParams::new(cfg.cluster.gamma, cfg.field.sigma, cfg.field.kernel.build()?)?;
    let metric = tensorized_distances(&ds.measure, &params, None)?;
    let den = single_linkage(&metric)?;
    let mode = match (cfg.cluster.n_clusters, cfg.cluster.height) {
        (_, Some(h)) => CutMode::AtHeight(h),
        (Some(k), None) => CutMode::AtK(k),
        (None, None) => return Err(config_err("choose a cut: --k or --height")),
    };
    let mut assignment = cut(&den, mode)?;
    if let Some(k) = cfg.cluster.top_k {
        assignment = topk_reassign(&assignment, &metric, k)?;
    }
    let out = &cfg.out;
    let d = ds.measure.dim();
    let mut w = csv_writer(&out.join("labels.csv"))?;
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.extend(["cluster".into(), "truth".into()]);
    w.write_record(&header).map_err(csv_io)?;
    for (i, x) in ds.measure.atoms().enumerate() {
        let mut row: Vec<String> = x.iter().map(|v| fmt(*v)).collect();
        let truth = if ds.labels[i] == ctfield::measures::OUTLIER_LABEL { "-1".to_string() } else { ds.labels[i].to_string() };
        row.extend([assignment.labels[i].to_string(), truth]);
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    let mut w = csv_writer(&out.join("dendrogram.csv"))?;
    w.write_record(["a", "b", "height", "size"]).map_err(csv_io)?;
    for m in &den.merges {
        w.write_record([m.a.to_string(), m.b.to_string(), fmt(m.height), m.size.to_string()]).map_err(csv_io)?;
    }
    w.flush()?;
    if a.svg {
        emit_plot(&PlotData::Dendrogram(&den), out.join("dendrogram.svg"))?;
    }
    let informative = ds.n_components() > 1;
    let report = ClusterReport {
        command: "cluster",
        n_points: ds.measure.len(),
        k: assignment.k,
        cluster_sizes: assignment.sizes(),
        cutoff_height: assignment.cutoff_height,
        tie_inflated: assignment.tie_inflated(),
        mean_cophenetic: mean_cophenetic(&den).ok(),
        cophenetic_std: cophenetic_std(&den).ok(),
        pseudo_metric: params.is_pseudo_metric(),
        error_rate: if informative { Some(score(&assignment.labels, &ds.labels)?) } else { None },
    };
    write_json(&out.join("cluster.json"), &report)?;
    Ok(serde_json::to_value(&report)?)
}

fn stability(cfg: &mut ExperimentConfig, a: StabilityArgs) -> CliResult<serde_json::Value> {
    a.kernel.apply(&mut cfg.field.kernel);
    if let Some(s) = a.sigma {
        cfg.field.sigma = s;
    }
    if let Some(g) = &a.grid {
        cfg.field.grid = GridSpec::parse(g)?;
    }
    if a.lambda.is_some() {
        cfg.stability.lambda = a.lambda;
    }
    if a.c.is_some() {
        cfg.stability.c = a.c;
    }
    let alpha = load_measure_csv(&a.alpha)?;
    let beta = load_measure_csv(&a.beta)?;
    if alpha.dim() != 2 {
        return Err(config_err("the stability grid is planar; measures must be in R^2"));
    }
    let grid = cfg.field.grid.points()?;
    let kernel = cfg.field.kernel.build()?;
    let sigma = cfg.field.sigma;
    let report = match kernel.profile_kind() {
        Profile::Truncation => {
            let c = cfg.stability.c.unwrap_or(sigma);
            // An atomic alpha has no Lebesgue density; the check is then heuristic.
            check_stability_trunc(&alpha, &beta, cfg.stability.lambda, sigma, c, &grid, true)?
        }
        _ => check_stability_smooth(&alpha, &beta, &kernel, sigma, &grid)?,
    };
    write_json(&cfg.out.join("stability.json"), &report)?;
    Ok(serde_json::to_value(&report)?)
}

fn converge(cfg: &mut ExperimentConfig, a: ConvergeArgs) -> CliResult<serde_json::Value> {
    if let Some(r) = a.replicates {
        cfg.converge.replicates = r;
    }
    if let Some(l) = &a.n_ladder {
        cfg.converge.n_ladder = parse_list(l, "n ladder")?;
    }
    if let Some(s) = a.sigma {
        cfg.converge.sigma = s;
    }
    let rep = run_converge(&cfg.converge, cfg.seed)?;
    let out = &cfg.out;
    let mut w = csv_writer(&out.join("converge.csv"))?;
    w.write_record(["n", "mean_error", "std_error"]).map_err(csv_io)?;
    for i in 0..rep.n_values.len() {
        w.write_record([rep.n_values[i].to_string(), fmt(rep.mean_errors[i]), fmt(rep.std_errors[i])]).map_err(csv_io)?;
    }
    w.flush()?;
    let xs: Vec<f64> = rep.n_values.iter().map(|&n| n as f64).collect();
    let series = [
        Series { name: "mean error".into(), x: xs.clone(), y: rep.mean_errors.clone() },
        Series {
            name: format!("C n^{:.3}", rep.power_fit.exponent),
            x: xs.clone(),
            y: xs.iter().map(|n| rep.power_fit.constant * n.powf(rep.power_fit.exponent)).collect(),
        },
        Series {
            name: format!("C ln(n)^0.75 n^{:.3}", rep.log_power_fit.exponent),
            x: xs.clone(),
            y: xs.iter().map(|n| rep.log_power_fit.constant * n.ln().powf(0.75) * n.powf(rep.log_power_fit.exponent)).collect(),
        },
    ];
    emit_plot(&PlotData::LogLog { title: "CTF sampling error", series: &series }, out.join("converge.svg"))?;
    write_json(&out.join("converge.json"), &rep)?;
    Ok(json!({
        "command": "converge",
        "n_values": rep.n_values,
        "mean_errors": rep.mean_errors,
        "power_exponent": rep.power_fit.exponent,
        "log_power_exponent": rep.log_power_fit.exponent,
        "monotone_decreasing": rep.monotone_decreasing,
    }))
}

fn bench(cfg: &mut ExperimentConfig, a: BenchArgs) -> CliResult<serde_json::Value> {
    if let Some(n) = a.n_samples {
        cfg.bench.n_samples = n;
    }
    if let Some(n) = a.n_train {
        cfg.bench.n_train = n;
    }
    let out = cfg.out.clone();
    let mut summary = serde_json::Map::new();
    summary.insert("command".into(), json!("bench"));
    if matches!(a.experiment, Experiment::Suites | Experiment::All) {
        let rows = run_cluster_benchmark(&cfg.bench, cfg.seed)?;
        let mut w = csv_writer(&out.join("bench_summary.csv"))?;
        w.write_record(["kind", "n_train", "n_test", "sigma", "gamma", "cut_offset", "train_error", "ae", "me_median", "me_mean"])
            .map_err(csv_io)?;
        for r in &rows {
            w.write_record([
                r.kind.clone(),
                r.n_train.to_string(),
                r.n_test.to_string(),
                fmt(r.sigma),
                fmt(r.gamma),
                fmt(r.cut_offset),
                fmt(r.train_error),
                fmt(r.ae),
                fmt(r.me_median),
                fmt(r.me_mean),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        let mut w = csv_writer(&out.join("bench_errors.csv"))?;
        w.write_record(["kind", "test_sample", "error"]).map_err(csv_io)?;
        for r in &rows {
            for (i, e) in r.test_errors.iter().enumerate() {
                w.write_record([r.kind.clone(), i.to_string(), fmt(*e)]).map_err(csv_io)?;
            }
        }
        w.flush()?;
        write_json(&out.join("bench.json"), &rows)?;
        let brief: Vec<_> = rows
            .iter()
            .map(|r| json!({ "kind": r.kind, "ae": r.ae, "me_median": r.me_median, "sigma": r.sigma, "gamma": r.gamma }))
            .collect();
        summary.insert("suites".into(), json!(brief));
    }
    if matches!(a.experiment, Experiment::ThreeLines | Experiment::All) {
        let r = run_three_lines(&cfg.three_lines)?;
        write_json(&out.join("three_lines.json"), &r)?;
        summary.insert("three_lines".into(), json!({ "accuracy": r.accuracy, "k": r.k, "sizes": r.cluster_sizes }));
    }
    if matches!(a.experiment, Experiment::NoisyLines | Experiment::All) {
        let r = run_noisy_lines(&cfg.noisy_lines, cfg.seed)?;
        write_json(&out.join("noisy_lines.json"), &r)?;
        summary.insert(
            "noisy_lines".into(),
            json!({ "gamma": r.gamma, "max_angle_deg": r.max_angle_deg, "angles_deg": r.angle_errors_deg }),
        );
    }
    Ok(serde_json::Value::Object(summary))
}
