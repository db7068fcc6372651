//! Synthetic labeled datasets: line arrangements with noise and outliers, and
//! random suites of arrangements for the clustering benchmark.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, WeightedMeasure, OUTLIER_LABEL};
use crate::error::{Error, Result};

/// A segment from `a` to `b` sampled at `n_points` equally spaced points
/// (both endpoints included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub n_points: usize,
}

/// Axis-aligned box used for uniform outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn square(lo: f64, hi: f64, dim: usize) -> Self {
        Self { min: vec![lo; dim], max: vec![hi; dim] }
    }
}

/// Samples each segment, perturbs every sample by isotropic Gaussian noise of
/// standard deviation `noise_sd`, and appends `n_outliers` uniform points of
/// `bbox` labelled [`OUTLIER_LABEL`]. Weights are uniform.
pub fn gen_line_arrangement(
    lines: &[LineSpec],
    noise_sd: f64,
    n_outliers: usize,
    bbox: &BoundingBox,
    seed: u64,
) -> Result<LabeledDataset> {
    let first = lines.first().ok_or_else(|| Error::invalid("empty line specification"))?;
    let dim = first.a.len();
    if dim == 0 {
        return Err(Error::invalid("line endpoints must have positive dimension"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::invalid("noise_sd must be non-negative"));
    }
    if n_outliers > 0 && (bbox.min.len() != dim || bbox.max.len() != dim) {
        return Err(Error::dims(dim, bbox.min.len()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::invalid(e.to_string()))?;

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (k, line) in lines.iter().enumerate() {
        if line.a.len() != dim || line.b.len() != dim {
            return Err(Error::dims(dim, line.b.len().min(line.a.len())));
        }
        if line.n_points < 2 {
            return Err(Error::invalid(format!("line {k} needs at least 2 points")));
        }
        let seg: Vec<f64> = (0..dim).map(|j| line.b[j] - line.a[j]).collect();
        for i in 0..line.n_points {
            let t = i as f64 / (line.n_points - 1) as f64;
            for j in 0..dim {
                let e = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                coords.push(line.a[j] + t * seg[j] + e);
            }
            labels.push(k as u32);
        }
    }
    for _ in 0..n_outliers {
        for j in 0..dim {
            coords.push(rng.random_range(bbox.min[j]..=bbox.max[j]));
        }
        labels.push(OUTLIER_LABEL);
    }
    let measure = WeightedMeasure::uniform(dim, coords)?;
    LabeledDataset::new(
        measure,
        labels,
        format!("{} lines, noise {noise_sd}, {n_outliers} outliers, seed {seed}", lines.len()),
    )
}

/// Families of random arrangements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrangementKind {
    /// Three segments in the plane.
    Lines2d,
    /// Two segments and two parabolic arcs in the plane.
    MixedCurves2d,
    /// Three square plane patches in R^3.
    Planes3d,
}

impl ArrangementKind {
    pub fn name(self) -> &'static str {
        match self {
            ArrangementKind::Lines2d => "lines2d",
            ArrangementKind::MixedCurves2d => "mixed_curves2d",
            ArrangementKind::Planes3d => "planes3d",
        }
    }

    pub fn n_components(self) -> usize {
        match self {
            ArrangementKind::Lines2d | ArrangementKind::Planes3d => 3,
            ArrangementKind::MixedCurves2d => 4,
        }
    }
}

impl FromStr for ArrangementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lines2d" => Ok(ArrangementKind::Lines2d),
            "mixed_curves2d" | "mixed" => Ok(ArrangementKind::MixedCurves2d),
            "planes3d" => Ok(ArrangementKind::Planes3d),
            other => Err(Error::invalid(format!("unknown arrangement kind '{other}'"))),
        }
    }
}

/// Distribution of the random arrangements. The defaults are this crate's
/// own choice; no reference distribution is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArrangementParams {
    /// Samples per curve component.
    pub points_per_curve: usize,
    /// Samples per side of the square grid on each plane patch.
    pub plane_grid: usize,
    /// Side length of each plane patch.
    pub plane_side: f64,
    /// Component centres are uniform in `[-center_extent, center_extent]^d`.
    pub center_extent: f64,
    /// Curve lengths are uniform in this range.
    pub length_range: (f64, f64),
    /// Magnitude of the quadratic coefficient `a` of the parabolic arcs
    /// `s -> s t + a s^2 n` in the mixed family (vertex curvature `2a`).
    pub parabola_coef_range: (f64, f64),
    /// Minimum angle between component directions (normals for planes), degrees.
    pub min_angle_deg: f64,
    /// Isotropic Gaussian noise added to each sample.
    pub noise_sd: f64,
}

impl Default for ArrangementParams {
    fn default() -> Self {
        Self {
            points_per_curve: 100,
            plane_grid: 15,
            plane_side: 1.6,
            center_extent: 0.25,
            length_range: (1.6, 2.0),
            parabola_coef_range: (0.15, 0.3),
            min_angle_deg: 30.0,
            noise_sd: 0.0,
        }
    }
}

/// Generates `n_samples` random arrangements. Sample `i` is drawn from its
/// own ChaCha20 stream seeded with `seed ^ i`, so any sample can be
/// regenerated on its own.
pub fn gen_arrangement_suite(
    kind: ArrangementKind,
    n_samples: usize,
    seed: u64,
    params: &ArrangementParams,
) -> Result<Vec<LabeledDataset>> {
    if n_samples == 0 {
        return Err(Error::invalid("suite needs at least one sample"));
    }
    if params.points_per_curve < 2 || params.plane_grid < 2 {
        return Err(Error::invalid("each component needs at least 2 samples per direction"));
    }
    (0..n_samples)
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ i as u64);
            let (coords, labels, dim) = match kind {
                ArrangementKind::Lines2d => curves_2d(&mut rng, params, 3, 0)?,
                ArrangementKind::MixedCurves2d => curves_2d(&mut rng, params, 2, 2)?,
                ArrangementKind::Planes3d => planes_3d(&mut rng, params)?,
            };
            let measure = WeightedMeasure::uniform(dim, coords)?;
            LabeledDataset::new(measure, labels, format!("{} sample {i}, seed {seed}", kind.name()))
        })
        .collect()
}

fn draw_separated_angles(rng: &mut ChaCha20Rng, n: usize, min_sep: f64) -> Vec<f64> {
    // Directions are taken modulo pi. Rejection sampling always terminates
    // for the separations we allow (n * min_sep < pi is checked by callers).
    loop {
        let angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..PI)).collect();
        let ok = (0..n).all(|i| {
            (0..i).all(|j| {
                let d = (angles[i] - angles[j]).rem_euclid(PI);
                d.min(PI - d) >= min_sep
            })
        });
        if ok {
            return angles;
        }
    }
}

fn curves_2d(
    rng: &mut ChaCha20Rng,
    p: &ArrangementParams,
    n_lines: usize,
    n_parabolas: usize,
) -> Result<(Vec<f64>, Vec<u32>, usize)> {
    let n = n_lines + n_parabolas;
    let min_sep = p.min_angle_deg.to_radians();
    if min_sep * n as f64 >= PI {
        return Err(Error::invalid("min_angle_deg too large for the number of components"));
    }
    let noise = Normal::new(0.0, p.noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let angles = draw_separated_angles(rng, n, min_sep);
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (k, &theta) in angles.iter().enumerate() {
        let c = [
            rng.random_range(-p.center_extent..=p.center_extent),
            rng.random_range(-p.center_extent..=p.center_extent),
        ];
        let len = rng.random_range(p.length_range.0..=p.length_range.1);
        let t = [theta.cos(), theta.sin()];
        let nrm = [-t[1], t[0]];
        // Parabolas open to a random side, with the axis along `nrm` and
        // the vertex at `c`.
        let coef = if k < n_lines {
            0.0
        } else {
            let a = rng.random_range(p.parabola_coef_range.0..=p.parabola_coef_range.1);
            if rng.random_bool(0.5) { a } else { -a }
        };
        let m = p.points_per_curve;
        for i in 0..m {
            let s = len * (i as f64 / (m - 1) as f64 - 0.5);
            let (along, across) = (s, coef * s * s);
            for j in 0..2 {
                let e = if p.noise_sd > 0.0 { noise.sample(rng) } else { 0.0 };
                coords.push(c[j] + along * t[j] + across * nrm[j] + e);
            }
            labels.push(k as u32);
        }
    }
    Ok((coords, labels, 2))
}

fn random_unit3(rng: &mut ChaCha20Rng) -> [f64; 3] {
    let g = Normal::new(0.0, 1.0).unwrap();
    loop {
        let v: [f64; 3] = [g.sample(rng), g.sample(rng), g.sample(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn planes_3d(rng: &mut ChaCha20Rng, p: &ArrangementParams) -> Result<(Vec<f64>, Vec<u32>, usize)> {
    let min_sep = p.min_angle_deg.to_radians();
    if min_sep >= PI / 2.0 {
        return Err(Error::invalid("min_angle_deg must be below 90 for planes"));
    }
    let noise = Normal::new(0.0, p.noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let normals = loop {
        let ns: Vec<[f64; 3]> = (0..3).map(|_| random_unit3(rng)).collect();
        let ok = (0..3).all(|i| {
            (0..i).all(|j| {
                let c = (ns[i][0] * ns[j][0] + ns[i][1] * ns[j][1] + ns[i][2] * ns[j][2]).abs();
                c.min(1.0).acos() >= min_sep
            })
        });
        if ok {
            break ns;
        }
    };
    let g = p.plane_grid;
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (k, n) in normals.iter().enumerate() {
        let c: Vec<f64> = (0..3).map(|_| rng.random_range(-p.center_extent..=p.center_extent)).collect();
        let e1 = loop {
            let r = random_unit3(rng);
            let v = cross(*n, r);
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if len > 1e-3 {
                break [v[0] / len, v[1] / len, v[2] / len];
            }
        };
        let e2 = cross(*n, e1);
        for a in 0..g {
            for b in 0..g {
                let u = p.plane_side * (a as f64 / (g - 1) as f64 - 0.5);
                let v = p.plane_side * (b as f64 / (g - 1) as f64 - 0.5);
                for j in 0..3 {
                    let e = if p.noise_sd > 0.0 { noise.sample(rng) } else { 0.0 };
                    coords.push(c[j] + u * e1[j] + v * e2[j] + e);
                }
                labels.push(k as u32);
            }
        }
    }
    Ok((coords, labels, 3))
}
