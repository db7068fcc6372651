//! Curvature from the small-scale behaviour of truncation-kernel CTFs.
//!
//! Plane curves: `tr Σ = 2σ/3π + κ^2 σ^3 / 20π + O(σ^5)`.
//! Surfaces in R^3: `tr Σ = 3σ/8 + s σ^3 / 64` and `det Σ = (9 q / 32768) σ^5`
//! to leading order, with `s = (κ1 - κ2)^2` and `q = 3κ1^2 + 2κ1κ2 + 3κ2^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ctf::ctf_at;
use crate::error::{Error, Result};
use crate::kernels::{Profile, RadialKernel};
use crate::measures::WeightedMeasure;

/// Relative RMS trace residual above which a fit is not declared reliable.
const FIT_RESIDUAL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveCurvatureEstimate {
    pub point: Vec<f64>,
    pub sigma_ladder: Vec<f64>,
    pub traces: Vec<f64>,
    /// `|κ|`; the sign cannot be recovered.
    pub kappa_abs: f64,
    /// Fitted `κ^2` before clamping at zero.
    pub kappa_sq_raw: f64,
    /// Relative RMS residual of the trace model.
    pub residual: f64,
    /// The fitted `κ^2` was negative and has been clamped to 0.
    pub clamped: bool,
    /// The residual is below tolerance.
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceCurvatureEstimate {
    pub point: Vec<f64>,
    pub sigma_ladder: Vec<f64>,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Fitted `(κ1 - κ2)^2`.
    pub s: f64,
    /// Fitted `3κ1^2 + 2κ1κ2 + 3κ2^2`.
    pub q: f64,
    pub trace_residual: f64,
    pub det_residual: f64,
    /// The global sign of `(κ1, κ2)` is undetermined.
    pub sign_ambiguity: bool,
    /// `s ≈ 0`: the tangent frame is undefined and `κ1 = κ2 = √(q/8)`.
    pub umbilic: bool,
}

/// Tolerance for the consistency condition `q ≥ s` of a surface fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFitTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for SurfaceFitTolerance {
    fn default() -> Self {
        Self { abs: 0.05, rel: 0.25 }
    }
}

fn check_ladder(sigmas: &[f64]) -> Result<()> {
    if sigmas.len() < 3 {
        return Err(Error::invalid("curvature fits need at least 3 scales"));
    }
    if sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::invalid("scales must be positive"));
    }
    Ok(())
}

/// One-parameter least squares `y ≈ c b`; returns `(c, rms residual)`.
fn ls_one(y: &[f64], b: &[f64]) -> (f64, f64) {
    let num: f64 = y.iter().zip(b).map(|(a, c)| a * c).sum();
    let den: f64 = b.iter().map(|c| c * c).sum();
    let c = num / den;
    let rss: f64 = y.iter().zip(b).map(|(a, v)| (a - c * v).powi(2)).sum();
    (c, (rss / y.len() as f64).sqrt())
}

fn mean_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64
}

/// Fits `κ^2` in `tr = 2σ/3π + κ^2 σ^3 / 20π`.
pub fn fit_curve_curvature(sigmas: &[f64], traces: &[f64]) -> Result<CurveCurvatureEstimate> {
    check_ladder(sigmas)?;
    if traces.len() != sigmas.len() {
        return Err(Error::invalid("one trace per scale"));
    }
    let y: Vec<f64> = sigmas.iter().zip(traces).map(|(s, t)| t - 2.0 * s / (3.0 * PI)).collect();
    let b: Vec<f64> = sigmas.iter().map(|s| s.powi(3) / (20.0 * PI)).collect();
    let (k2, rms) = ls_one(&y, &b);
    let residual = rms / mean_abs(traces);
    Ok(CurveCurvatureEstimate {
        point: Vec::new(),
        sigma_ladder: sigmas.to_vec(),
        traces: traces.to_vec(),
        kappa_abs: k2.max(0.0).sqrt(),
        kappa_sq_raw: k2,
        residual,
        clamped: k2 < 0.0,
        reliable: residual < FIT_RESIDUAL_TOL,
    })
}

fn require_truncation(kernel: &RadialKernel) -> Result<()> {
    match kernel.profile_kind() {
        Profile::Truncation => Ok(()),
        _ => Err(Error::Unsupported("curvature recovery is calibrated for the truncation kernel".into())),
    }
}

/// `|κ|` of a plane curve at `x` from CTF traces over `sigma_ladder`.
pub fn curve_curvature(
    measure: &WeightedMeasure,
    kernel: &RadialKernel,
    x: &[f64],
    sigma_ladder: &[f64],
) -> Result<CurveCurvatureEstimate> {
    require_truncation(kernel)?;
    check_ladder(sigma_ladder)?;
    if measure.dim() != 2 {
        return Err(Error::dims(2, measure.dim()));
    }
    let traces = sigma_ladder
        .iter()
        .map(|&s| ctf_at(measure, kernel, x, s).map(|t| t.trace()))
        .collect::<Result<Vec<_>>>()?;
    let mut est = fit_curve_curvature(sigma_ladder, &traces)?;
    est.point = x.to_vec();
    Ok(est)
}

/// Fits `s` from traces and `q` from determinants, then solves for the
/// principal curvatures with `κ1 ≥ κ2` and `κ1 + κ2 ≥ 0`.
pub fn fit_surface_curvatures(
    sigmas: &[f64],
    traces: &[f64],
    dets: &[f64],
    tol: SurfaceFitTolerance,
) -> Result<SurfaceCurvatureEstimate> {
    check_ladder(sigmas)?;
    if traces.len() != sigmas.len() || dets.len() != sigmas.len() {
        return Err(Error::invalid("one trace and one determinant per scale"));
    }
    let y: Vec<f64> = sigmas.iter().zip(traces).map(|(s, t)| t - 3.0 * s / 8.0).collect();
    let b: Vec<f64> = sigmas.iter().map(|s| s.powi(3) / 64.0).collect();
    let (s, t_rms) = ls_one(&y, &b);
    let bd: Vec<f64> = sigmas.iter().map(|s| 9.0 * s.powi(5) / 32768.0).collect();
    let (q, d_rms) = ls_one(dets, &bd);

    // κ1 κ2 = (q - 3s)/8 and (κ1 + κ2)^2 = s + 4 κ1 κ2 = (q - s)/2.
    let slack = tol.abs + tol.rel * q.abs().max(s.abs());
    if s < -slack || q - s.max(0.0) < -2.0 * slack {
        return Err(Error::Numerical(format!(
            "inconsistent curvature fit: s = {s:.4}, q = {q:.4} (need q >= s >= 0)"
        )));
    }
    // Within the slack a negative s is fitting noise on a flat or umbilic point.
    let s_pos = s.max(0.0);
    let sum = ((q - s_pos) / 2.0).max(0.0).sqrt();
    let diff = s_pos.sqrt();
    let (kappa1, kappa2) = (0.5 * (sum + diff), 0.5 * (sum - diff));
    Ok(SurfaceCurvatureEstimate {
        point: Vec::new(),
        sigma_ladder: sigmas.to_vec(),
        kappa1,
        kappa2,
        s,
        q,
        trace_residual: t_rms / mean_abs(traces),
        det_residual: if mean_abs(dets) > 0.0 { d_rms / mean_abs(dets) } else { 0.0 },
        sign_ambiguity: kappa1.abs().max(kappa2.abs()) > tol.abs,
        umbilic: s.abs() <= slack,
    })
}

/// Principal curvatures of a surface in R^3 at `p`.
pub fn surface_curvatures(
    measure: &WeightedMeasure,
    kernel: &RadialKernel,
    p: &[f64],
    sigma_ladder: &[f64],
    tol: SurfaceFitTolerance,
) -> Result<SurfaceCurvatureEstimate> {
    require_truncation(kernel)?;
    check_ladder(sigma_ladder)?;
    if measure.dim() != 3 {
        return Err(Error::dims(3, measure.dim()));
    }
    let mut traces = Vec::new();
    let mut dets = Vec::new();
    for &s in sigma_ladder {
        let spec = ctf_at(measure, kernel, p, s)?.spectrum();
        traces.push(spec.trace);
        dets.push(spec.eigenvalues.iter().product());
    }
    let mut est = fit_surface_curvatures(sigma_ladder, &traces, &dets, tol)?;
    est.point = p.to_vec();
    Ok(est)
}
