//! Fourier transform of `h_σ(x) = |x|^2 G_σ(x)`, the kernel whose
//! convolution with a measure gives its Gaussian Fréchet function.

use std::f64::consts::PI;

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// `σ^2 (d - σ^2 |ξ|^2 / π) exp(-σ^2 |ξ|^2 / 2π)`: the transform written in
/// the variable `ξ = √π ω`, where `ω` is angular frequency. It vanishes
/// exactly on the sphere `|ξ| = √(π d) / σ`.
pub fn gaussian_transfer_hat(sigma: f64, d: usize, xi: &[f64]) -> f64 {
    let u = sigma * sigma * norm_sq(xi) / PI;
    sigma * sigma * (d as f64 - u) * (-0.5 * u).exp()
}

/// `∫ h_σ(x) e^{-i⟨x, ω⟩} dx = σ^2 (d - σ^2 |ω|^2) exp(-σ^2 |ω|^2 / 2)`.
pub fn gaussian_transfer_angular(sigma: f64, d: usize, omega: &[f64]) -> f64 {
    let u = sigma * sigma * norm_sq(omega);
    sigma * sigma * (d as f64 - u) * (-0.5 * u).exp()
}

/// Radius `√(π d) / σ` of the zero set of [`gaussian_transfer_hat`].
pub fn gaussian_transfer_zero_radius(sigma: f64, d: usize) -> f64 {
    (PI * d as f64).sqrt() / sigma
}
