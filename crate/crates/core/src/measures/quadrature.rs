//! Deterministic midpoint-rule quadratures of arc-length and surface measures.
//!
//! The "aligned" variants accept breakpoints (e.g. the radii of a scale ladder)
//! so that no quadrature cell straddles the boundary of a truncation ball
//! centred at the distinguished point. The integrand of a truncated CTF is
//! then smooth on every cell and the midpoint rule keeps its O(h^2) accuracy.

use std::f64::consts::{PI, TAU};

use super::WeightedMeasure;
use crate::error::{Error, Result};

/// Midpoint quadrature of arc length on the segment `[a, b]`.
///
/// Cells have length `spacing` except the last, which is shortened so the
/// total mass equals the segment length.
pub fn quadrature_segment(a: &[f64], b: &[f64], spacing: f64) -> Result<WeightedMeasure> {
    if a.len() != b.len() {
        return Err(Error::dims(a.len(), b.len()));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid("spacing must be positive"));
    }
    let len = a.iter().zip(b).map(|(p, q)| (q - p).powi(2)).sum::<f64>().sqrt();
    if len == 0.0 {
        return Err(Error::invalid("degenerate segment"));
    }
    let ratio = len / spacing;
    // Treat lengths that are an integer multiple of the spacing up to
    // rounding noise as exact multiples.
    let n = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round().max(1.0) as usize
    } else {
        ratio.ceil() as usize
    };
    let dim = a.len();
    let mut coords = Vec::with_capacity(n * dim);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let (t0, t1) = if k + 1 == n {
            ((n - 1) as f64 * spacing, len)
        } else {
            (k as f64 * spacing, (k + 1) as f64 * spacing)
        };
        let s = 0.5 * (t0 + t1) / len;
        coords.extend(a.iter().zip(b).map(|(p, q)| p + s * (q - p)));
        weights.push(t1 - t0);
    }
    WeightedMeasure::new(dim, coords, weights)
}

/// Arc-length measure of the circle of radius `radius` about the origin,
/// `n_atoms` equally spaced atoms starting at angle 0.
pub fn quadrature_circle(radius: f64, n_atoms: usize) -> Result<WeightedMeasure> {
    if n_atoms < 3 {
        return Err(Error::invalid("circle quadrature needs at least 3 atoms"));
    }
    check_radius(radius)?;
    let w = TAU * radius / n_atoms as f64;
    let mut coords = Vec::with_capacity(2 * n_atoms);
    for k in 0..n_atoms {
        let t = TAU * k as f64 / n_atoms as f64;
        coords.push(radius * t.cos());
        coords.push(radius * t.sin());
    }
    WeightedMeasure::new(2, coords, vec![w; n_atoms])
}

/// Surface-area measure of the sphere of radius `radius` about the origin on
/// a latitude-longitude grid. Each cell carries its exact area
/// `R^2 (cos θ0 - cos θ1) Δφ` and its atom sits at the cell's centre angles.
pub fn quadrature_sphere(radius: f64, n_theta: usize, n_phi: usize) -> Result<WeightedMeasure> {
    if n_theta < 2 || n_phi < 3 {
        return Err(Error::invalid("sphere quadrature needs n_theta >= 2 and n_phi >= 3"));
    }
    check_radius(radius)?;
    let dt = PI / n_theta as f64;
    let dp = TAU / n_phi as f64;
    let mut coords = Vec::with_capacity(3 * n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let (t0, t1) = (i as f64 * dt, (i + 1) as f64 * dt);
        let t = 0.5 * (t0 + t1);
        let w = radius * radius * (t0.cos() - t1.cos()) * dp;
        for j in 0..n_phi {
            let p = (j as f64 + 0.5) * dp;
            coords.extend([radius * t.sin() * p.cos(), radius * t.sin() * p.sin(), radius * t.cos()]);
            weights.push(w);
        }
    }
    WeightedMeasure::new(3, coords, weights)
}

/// Arc-length measure of the full circle of radius `radius`, with cell
/// boundaries at the angles `center_angle ± b` for each `b` in
/// `half_angle_breaks`.
pub fn quadrature_arc(
    radius: f64,
    center_angle: f64,
    half_angle_breaks: &[f64],
    spacing: f64,
) -> Result<WeightedMeasure> {
    check_radius(radius)?;
    check_spacing(spacing)?;
    let mut breaks: Vec<f64> = half_angle_breaks.iter().copied().filter(|b| *b > 0.0 && *b < PI).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut knots = vec![-PI];
    knots.extend(breaks.iter().rev().map(|b| -b));
    knots.extend(breaks.iter().copied());
    knots.push(PI);

    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for seg in knots.windows(2) {
        let (t0, t1) = (seg[0], seg[1]);
        let m = ((t1 - t0) * radius / spacing).ceil().max(1.0) as usize;
        let dt = (t1 - t0) / m as f64;
        for k in 0..m {
            let t = center_angle + t0 + (k as f64 + 0.5) * dt;
            coords.push(radius * t.cos());
            coords.push(radius * t.sin());
            weights.push(radius * dt);
        }
    }
    WeightedMeasure::new(2, coords, weights)
}

/// Area measure of the disk of radius `rho_max` in the plane `z = 0` of R^3,
/// on polar rings with boundaries at `rho_breaks`.
pub fn quadrature_plane_disk(
    rho_max: f64,
    rho_breaks: &[f64],
    drho: f64,
    n_psi: usize,
) -> Result<WeightedMeasure> {
    polar_chart(rho_max, rho_breaks, drho, n_psi, |rho, psi| {
        ([rho * psi.cos(), rho * psi.sin(), 0.0], 1.0)
    })
}

/// Area measure of the cap of the sphere of radius `radius` centred at the
/// north pole `(0, 0, radius)`, made of all points within chord distance
/// `rho_max <= 2 radius` of the pole. `rho_max = 2 radius` gives the whole
/// sphere.
///
/// Polar coordinates are taken in chord distance, in which the area element
/// is exactly `ρ dρ dψ`, so ring boundaries at `rho_breaks` line up with
/// truncation balls about the pole.
pub fn quadrature_sphere_cap(
    radius: f64,
    rho_max: f64,
    rho_breaks: &[f64],
    drho: f64,
    n_psi: usize,
) -> Result<WeightedMeasure> {
    check_radius(radius)?;
    if rho_max > 2.0 * radius {
        return Err(Error::invalid("cap chord radius exceeds the sphere diameter"));
    }
    polar_chart(rho_max, rho_breaks, drho, n_psi, |rho, psi| {
        let theta = 2.0 * (rho / (2.0 * radius)).min(1.0).asin();
        let s = radius * theta.sin();
        ([s * psi.cos(), s * psi.sin(), radius * theta.cos()], 1.0)
    })
}

/// Area measure of a patch of the cylinder `x^2 + z^2 = radius^2` (axis along
/// y) around the point `(0, 0, radius)`: every point within distance
/// `rho_max < 2 radius` of it. Rings are in Euclidean distance to that point.
pub fn quadrature_cylinder_patch(
    radius: f64,
    rho_max: f64,
    rho_breaks: &[f64],
    drho: f64,
    n_psi: usize,
) -> Result<WeightedMeasure> {
    check_radius(radius)?;
    if rho_max >= 2.0 * radius {
        return Err(Error::invalid("cylinder patch must stay within chord distance 2R"));
    }
    // With v = 2R sin(t/2) the squared distance to the base point is
    // v^2 + u^2, and R dt du = dv du / sqrt(1 - v^2 / 4R^2).
    polar_chart(rho_max, rho_breaks, drho, n_psi, |rho, psi| {
        let v = rho * psi.cos();
        let u = rho * psi.sin();
        let h = v / (2.0 * radius);
        let t = 2.0 * h.asin();
        ([radius * t.sin(), u, radius * t.cos()], 1.0 / (1.0 - h * h).sqrt())
    })
}

fn polar_chart<F>(rho_max: f64, rho_breaks: &[f64], drho: f64, n_psi: usize, embed: F) -> Result<WeightedMeasure>
where
    F: Fn(f64, f64) -> ([f64; 3], f64),
{
    check_radius(rho_max)?;
    check_spacing(drho)?;
    if n_psi < 3 {
        return Err(Error::invalid("polar quadrature needs n_psi >= 3"));
    }
    let mut knots = vec![0.0];
    let mut inner: Vec<f64> = rho_breaks.iter().copied().filter(|b| *b > 0.0 && *b < rho_max).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    knots.extend(inner);
    knots.push(rho_max);

    let dpsi = TAU / n_psi as f64;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for seg in knots.windows(2) {
        let m = ((seg[1] - seg[0]) / drho).ceil().max(1.0) as usize;
        let h = (seg[1] - seg[0]) / m as f64;
        for k in 0..m {
            let r0 = seg[0] + k as f64 * h;
            let r1 = if k + 1 == m { seg[1] } else { r0 + h };
            let rho = 0.5 * (r0 + r1);
            let ring = 0.5 * (r1 * r1 - r0 * r0) * dpsi;
            for j in 0..n_psi {
                let psi = (j as f64 + 0.5) * dpsi;
                let (p, jac) = embed(rho, psi);
                coords.extend(p);
                weights.push(ring * jac);
            }
        }
    }
    WeightedMeasure::new(3, coords, weights)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("radius must be positive"))
    }
}

fn check_spacing(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("spacing must be positive"))
    }
}
