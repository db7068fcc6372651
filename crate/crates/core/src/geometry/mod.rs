//! Closed-form CTFs of canonical measures, curvature recovery from
//! small-scale spectra, and the Gaussian Fréchet transfer function.

mod curvature;
mod transfer;

pub use curvature::{
    curve_curvature, fit_curve_curvature, fit_surface_curvatures, surface_curvatures, CurveCurvatureEstimate,
    SurfaceCurvatureEstimate, SurfaceFitTolerance,
};
pub use transfer::{gaussian_transfer_angular, gaussian_transfer_hat, gaussian_transfer_zero_radius};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{ball_volume, gamma_half, Profile, RadialKernel};
use crate::tensor::CovTensor;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∫_{-π/2}^{π/2} sin^2 θ cos^r θ dθ = W_r / (r + 2)`, where
/// `W_r = ∫ cos^r = √π Γ((r+1)/2) / Γ(r/2 + 1)`.
fn sin2_cos_r_integral(r: usize) -> f64 {
    let w = PI.sqrt() * gamma_half(r + 1) / gamma_half(r + 2);
    w / (r as f64 + 2.0)
}

/// Eigenvalue of the CTF at a point of an `r`-dimensional linear subspace of
/// R^d carrying its volume measure.
///
/// Gaussian: `1 / ((2π)^{(d-r)/2} σ^{d-r-2})`. Truncation:
/// `σ^{-(d-r-2)} (ν_{r-1} / ν_d) ∫ sin^2 θ cos^r θ dθ`.
pub fn subspace_eigenvalue(d: usize, r: usize, kernel: &RadialKernel, sigma: f64) -> Result<f64> {
    if r == 0 || r > d {
        return Err(Error::invalid("subspace dimension must satisfy 1 <= r <= d"));
    }
    let codim = d as i32 - r as i32;
    match kernel.profile_kind() {
        Profile::Gaussian => Ok(1.0 / ((2.0 * PI).powf(codim as f64 / 2.0) * sigma.powi(codim - 2))),
        Profile::Truncation => {
            Ok(sigma.powi(2 - codim) * ball_volume(r - 1) / ball_volume(d) * sin2_cos_r_integral(r))
        }
        _ => Err(Error::Unsupported("subspace oracle is available for the builtin kernels only".into())),
    }
}

/// `Σ_α(0, σ)` for the volume measure on `span(basis)`.
pub fn oracle_subspace(d: usize, basis: &[Vec<f64>], kernel: &RadialKernel, sigma: f64) -> Result<CovTensor> {
    for (i, v) in basis.iter().enumerate() {
        if v.len() != d {
            return Err(Error::dims(d, v.len()));
        }
        for (j, u) in basis.iter().enumerate().take(i + 1) {
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot(u, v) - want).abs() > 1e-10 {
                return Err(Error::invalid("basis vectors are not orthonormal"));
            }
        }
    }
    let lambda = subspace_eigenvalue(d, basis.len(), kernel, sigma)?;
    let terms: Vec<(f64, &[f64])> = basis.iter().map(|v| (lambda, v.as_slice())).collect();
    CovTensor::from_dyads(d, &terms)
}

/// `Σ_α(0, σ)` for arc length on a wedge of segments from the origin along
/// unit `directions` with the given `lengths`, truncation kernel:
/// `(1 / (3 σ^d ν_d)) Σ min(σ, ℓ_i)^3 v_i v_iᵀ`.
pub fn oracle_wedge(directions: &[Vec<f64>], lengths: &[f64], sigma: f64, d: usize) -> Result<CovTensor> {
    if directions.len() != lengths.len() || directions.is_empty() {
        return Err(Error::invalid("need one length per direction"));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }
    for (i, v) in directions.iter().enumerate() {
        if v.len() != d {
            return Err(Error::dims(d, v.len()));
        }
        if (dot(v, v) - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("wedge directions must be unit vectors"));
        }
        if !(lengths[i] > 0.0) {
            return Err(Error::invalid("wedge lengths must be positive"));
        }
        for u in &directions[..i] {
            if u.iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-12) {
                return Err(Error::invalid("duplicate wedge direction"));
            }
        }
    }
    let c = 1.0 / (3.0 * sigma.powi(d as i32) * ball_volume(d));
    let terms: Vec<(f64, &[f64])> = directions
        .iter()
        .zip(lengths)
        .map(|(v, &l)| (c * sigma.min(l).powi(3), v.as_slice()))
        .collect();
    CovTensor::from_dyads(d, &terms)
}

fn half_angle(radius: f64, r: f64, sigma: f64) -> Result<Option<f64>> {
    if !(radius > 0.0 && sigma > 0.0 && r >= 0.0) {
        return Err(Error::invalid("radius and sigma must be positive, r non-negative"));
    }
    if (r - radius).abs() > sigma {
        return Ok(None);
    }
    if r == 0.0 {
        return Err(Error::Numerical("angle undefined at the centre (r = 0, R <= sigma)".into()));
    }
    let c = ((radius * radius + r * r - sigma * sigma) / (2.0 * r * radius)).clamp(-1.0, 1.0);
    Ok(Some(c.acos()))
}

/// Normal and tangential eigenvalues `(λ_n, λ_t)` of the truncation-kernel
/// CTF of arc length on the circle of radius `radius`, at distance `r` from
/// the centre. Both vanish when `|r - R| > σ`.
pub fn oracle_circle_eigs(radius: f64, r: f64, sigma: f64) -> Result<(f64, f64)> {
    let Some(phi) = half_angle(radius, r, sigma)? else {
        return Ok((0.0, 0.0));
    };
    let (s, c) = phi.sin_cos();
    let k = 1.0 / (PI * sigma * sigma);
    let r2 = radius * radius;
    let lambda_n = k * (radius * phi * (r2 + 2.0 * r * r) + r2 * (radius * c - 4.0 * r) * s);
    let lambda_t = k * radius * r2 * (phi - s * c);
    Ok((lambda_n, lambda_t))
}

/// The full truncation-kernel CTF of the circle of radius `radius` at an
/// arbitrary planar point `x`. With `probability = true` the measure is the
/// uniform probability law (arc length divided by `2πR`).
pub fn circle_ctf_exact(radius: f64, x: &[f64], sigma: f64, probability: bool) -> Result<CovTensor> {
    if x.len() != 2 {
        return Err(Error::dims(2, x.len()));
    }
    let scale = if probability { 1.0 / (2.0 * PI * radius) } else { 1.0 };
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        // The whole circle is at distance R from the centre.
        if radius > sigma {
            return Ok(CovTensor::zeros(2));
        }
        let l = scale * radius.powi(3) / (sigma * sigma);
        return CovTensor::from_row_major(2, &[l, 0.0, 0.0, l]);
    }
    let (ln, lt) = oracle_circle_eigs(radius, r, sigma)?;
    let n = [x[0] / r, x[1] / r];
    let t = [-n[1], n[0]];
    CovTensor::from_dyads(2, &[(scale * ln, &n), (scale * lt, &t)])
}

/// `(λ_t, λ_t, λ_n)` for the surface measure of the sphere of radius
/// `radius`, truncation kernel, at distance `r` from the centre.
pub fn oracle_sphere_eigs(radius: f64, r: f64, sigma: f64) -> Result<(f64, f64, f64)> {
    let Some(phi) = half_angle(radius, r, sigma)? else {
        return Ok((0.0, 0.0, 0.0));
    };
    let s3 = sigma.powi(3);
    let lambda_t = radius.powi(4) / s3 * (phi / 2.0).sin().powi(4) * (phi.cos() + 2.0);
    let lambda_n = radius * ((radius - r).powi(3) - (radius * phi.cos() - r).powi(3)) / (2.0 * s3);
    Ok((lambda_t, lambda_t, lambda_n))
}
