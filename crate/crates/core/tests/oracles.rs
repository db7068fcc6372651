use std::f64::consts::PI;

use ctfield::clustering::gh_certificate;
use ctfield::ctf::{ctf_at, flow_basins, FlowParams};
use ctfield::geometry::{
    curve_curvature, gaussian_transfer_hat, gaussian_transfer_zero_radius, oracle_circle_eigs, oracle_sphere_eigs,
    oracle_wedge, subspace_eigenvalue, surface_curvatures, SurfaceFitTolerance,
};
use ctfield::kernels::derive_constants;
use ctfield::measures::{
    quadrature_arc, quadrature_circle, quadrature_cylinder_patch, quadrature_plane_disk, quadrature_segment,
};
use ctfield::{RadialKernel, TensorizedMetricParams, WeightedMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Composite Simpson rule with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn circle_closed_form_matches_arc_integral() {
    // Integrate over the arc inside the ball, parametrized by angle.
    for (radius, r, sigma) in [(1.0, 0.95, 0.1), (1.0, 1.0, 0.1), (2.0, 2.3, 0.5), (0.7, 0.4, 0.45)] {
        let c: f64 = (radius * radius + r * r - sigma * sigma) / (2.0 * r * radius);
        let phi = c.clamp(-1.0, 1.0).acos();
        let norm = PI * sigma * sigma;
        let ln = simpson(|t| (radius * t.cos() - r).powi(2) * radius, -phi, phi, 4000) / norm;
        let lt = simpson(|t| (radius * t.sin()).powi(2) * radius, -phi, phi, 4000) / norm;
        let (on, ot) = oracle_circle_eigs(radius, r, sigma).unwrap();
        assert!(rel(on, ln) < 1e-9 && rel(ot, lt) < 1e-9, "({radius}, {r}, {sigma}): {on} vs {ln}, {ot} vs {lt}");
    }
}

#[test]
fn sphere_closed_form_matches_cap_integral() {
    for (radius, r, sigma) in [(1.0, 1.0, 0.2), (1.0, 1.1, 0.3), (2.0, 1.7, 0.5)] {
        let c: f64 = (radius * radius + r * r - sigma * sigma) / (2.0 * r * radius);
        let phi = c.clamp(-1.0, 1.0).acos();
        let norm = 4.0 * PI * sigma.powi(3) / 3.0;
        let r2 = radius * radius;
        // The azimuthal integral of cos^2 ψ is π; of 1 it is 2π.
        let lt = PI * r2 * simpson(|t| (radius * t.sin()).powi(2) * t.sin(), 0.0, phi, 4000) / norm;
        let ln = 2.0 * PI * r2 * simpson(|t| (radius * t.cos() - r).powi(2) * t.sin(), 0.0, phi, 4000) / norm;
        let (a, b, n) = oracle_sphere_eigs(radius, r, sigma).unwrap();
        assert_eq!(a, b);
        assert!(rel(a, lt) < 1e-9 && rel(n, ln) < 1e-9, "({radius}, {r}, {sigma}): {a} vs {lt}, {n} vs {ln}");
    }
}

#[test]
fn empirical_circle_converges_to_closed_form() {
    let kernel = RadialKernel::truncation();
    let m = quadrature_circle(1.0, 200_000).unwrap();
    // A query point off every atom's ball boundary.
    let t = ctf_at(&m, &kernel, &[1.03, 0.0], 0.2).unwrap();
    let (ln, lt) = oracle_circle_eigs(1.0, 1.03, 0.2).unwrap();
    assert!(rel(t.get(0, 0), ln) < 1e-3 && rel(t.get(1, 1), lt) < 1e-3);
}

#[test]
fn line_and_plane_eigenvalues() {
    let trunc = RadialKernel::truncation();
    let gauss = RadialKernel::gaussian();
    for sigma in [0.3f64, 0.7] {
        // Line in R^2, truncation: ∫_{-σ}^{σ} t^2 dt / (π σ^2).
        let line = quadrature_segment(&[-2.0, 0.0], &[2.0, 0.0], 1e-4).unwrap();
        let t = ctf_at(&line, &trunc, &[0.0, 0.0], sigma).unwrap();
        let want = 2.0 * sigma / (3.0 * PI);
        assert!(rel(t.get(0, 0), want) < 1e-6);
        assert!(rel(subspace_eigenvalue(2, 1, &trunc, sigma).unwrap(), want) < 1e-13);

        // Line in R^3, Gaussian: ∫ t^2 e^{-t^2/2σ^2} dt / (2πσ^2)^{3/2} = 1 / (2π σ^{-2}... ) = 1/(2π).
        let line3 = quadrature_segment(&[-12.0 * sigma, 0.0, 0.0], &[12.0 * sigma, 0.0, 0.0], 1e-4).unwrap();
        let t = ctf_at(&line3, &gauss, &[0.0, 0.0, 0.0], sigma).unwrap();
        let want = 1.0 / (2.0 * PI);
        assert!(rel(t.get(0, 0), want) < 1e-6, "{} vs {want}", t.get(0, 0));
        assert!(rel(subspace_eigenvalue(3, 1, &gauss, sigma).unwrap(), want) < 1e-13);

        // Plane in R^3: truncation 3σ/16, Gaussian σ/√(2π).
        let disk = quadrature_plane_disk(sigma, &[], 2e-4, 64).unwrap();
        let t = ctf_at(&disk, &trunc, &[0.0, 0.0, 0.0], sigma).unwrap();
        assert!(rel(t.get(0, 0), 3.0 * sigma / 16.0) < 1e-6);
        assert!(t.get(2, 2).abs() < 1e-15);
        let big = quadrature_plane_disk(10.0 * sigma, &[], 1e-3, 64).unwrap();
        let t = ctf_at(&big, &gauss, &[0.0, 0.0, 0.0], sigma).unwrap();
        let want = sigma / (2.0 * PI).sqrt();
        assert!(rel(t.get(1, 1), want) < 1e-5, "{} vs {want}", t.get(1, 1));
        assert!(rel(subspace_eigenvalue(3, 2, &gauss, sigma).unwrap(), want) < 1e-13);
    }
}

#[test]
fn wedge_matches_segment_quadrature() {
    let kernel = RadialKernel::truncation();
    let dirs = vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![-0.8, 0.6]];
    let lengths = [0.2, 1.0, 0.35];
    let sigma = 0.3;
    let parts: Vec<WeightedMeasure> = dirs
        .iter()
        .zip(lengths)
        .map(|(v, l)| quadrature_segment(&[0.0, 0.0], &[l * v[0], l * v[1]], 1e-5).unwrap())
        .collect();
    let m = WeightedMeasure::concat(&parts).unwrap();
    let got = ctf_at(&m, &kernel, &[0.0, 0.0], sigma).unwrap();
    let want = oracle_wedge(&dirs, &lengths, sigma, 2).unwrap();
    assert!(got.max_abs_diff(&want) < 1e-6 * want.frobenius_norm(), "{got:?} vs {want:?}");
}

#[test]
fn kernels_integrate_to_one() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let table_r: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
    let table_f: Vec<f64> = table_r.iter().map(|r| (-0.5 * r).exp()).collect();
    let kernels = [
        RadialKernel::gaussian(),
        RadialKernel::truncation(),
        RadialKernel::tabulated("gaussian-table", table_r, table_f).unwrap(),
    ];
    for d in 1..=3usize {
        for k in &kernels {
            let sigma = 0.7;
            let half = k.support_radius_sq().map_or(6.0, f64::sqrt) * sigma * 1.01;
            let n = 200_000;
            let vol = (2.0 * half).powi(d as i32);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..n {
                let y: Vec<f64> = (0..d).map(|_| rng.random_range(-half..half)).collect();
                let v = k.eval(&vec![0.0; d], &y, sigma).unwrap() * vol;
                sum += v;
                sum_sq += v * v;
            }
            let integral = sum / n as f64;
            let se = ((sum_sq / n as f64 - integral * integral) / n as f64).sqrt();
            assert!((integral - 1.0).abs() < 4.0 * se, "{} in d = {d}: {integral} ± {se}", k.name());
        }
    }
}

#[test]
fn gaussian_constants_closed_form() {
    let k = derive_constants(&RadialKernel::gaussian(), 2).unwrap();
    let e = std::f64::consts::E;
    assert!(rel(k.c, 2.0 / e) < 1e-12);
    assert!(rel(k.a2, e.powf(-0.5)) < 1e-12);
    assert!(rel(k.a1.unwrap(), 0.5 * 3f64.powf(1.5) * e.powf(-1.5)) < 1e-12);
    assert!(rel(k.c_d(0.5), 2.0 * PI * 0.25) < 1e-12);
    let t = derive_constants(&RadialKernel::truncation(), 3).unwrap();
    assert_eq!((t.c, t.a2, t.a1), (1.0, 1.0, None));
    assert!(rel(t.c_d(2.0), 4.0 * PI / 3.0 * 8.0) < 1e-12);
}

#[test]
fn curvature_of_cylinder_patch() {
    let kernel = RadialKernel::truncation();
    let ladder = [0.05, 0.04, 0.03];
    let radius = 0.8;
    let m = quadrature_cylinder_patch(radius, 0.06, &ladder, 1e-4, 720).unwrap();
    let est = surface_curvatures(&m, &kernel, &[0.0, 0.0, radius], &ladder, SurfaceFitTolerance::default()).unwrap();
    assert!(rel(est.kappa1, 1.0 / radius) < 0.15, "{est:?}");
    assert!(est.kappa2.abs() < 0.15 / radius, "{est:?}");
}

#[test]
fn curvature_of_aligned_arcs() {
    let kernel = RadialKernel::truncation();
    let ladder = [0.05, 0.04, 0.03];
    for radius in [0.5f64, 1.5] {
        let breaks: Vec<f64> = ladder.iter().map(|s| 2.0 * (s / (2.0 * radius)).asin()).collect();
        let m = quadrature_arc(radius, 1.0, &breaks, 1e-5).unwrap();
        let x = [radius * 1f64.cos(), radius * 1f64.sin()];
        let est = curve_curvature(&m, &kernel, &x, &ladder).unwrap();
        assert!(rel(est.kappa_abs, 1.0 / radius) < 0.1, "{est:?}");
        assert!(est.reliable);
    }
}

#[test]
fn transfer_function_matches_fft() {
    for sigma in [0.4f64, 1.3] {
        let n = 1 << 13;
        let half = 30.0 * sigma;
        let dx = 2.0 * half / n as f64;
        let h = |x: f64| x * x / (2.0 * PI * sigma * sigma).sqrt() * (-x * x / (2.0 * sigma * sigma)).exp();
        let mut buf: Vec<Complex<f64>> = (0..n).map(|j| Complex::new(h(-half + j as f64 * dx), 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let dw = 2.0 * PI / (n as f64 * dx);
        let band = 2.0 * PI.sqrt() / sigma;
        let mut last = f64::NAN;
        let mut zero = None;
        for (k, c) in buf.iter().enumerate().take(n / 2) {
            let w = k as f64 * dw;
            let v = (c * Complex::from_polar(1.0, w * half) * dx).re;
            let xi = w * PI.sqrt();
            if xi <= band {
                assert!((v - gaussian_transfer_hat(sigma, 1, &[xi])).abs() < 1e-4, "σ = {sigma}, ξ = {xi}");
            }
            if zero.is_none() && last > 0.0 && v <= 0.0 {
                zero = Some(xi);
            }
            last = v;
        }
        let z = zero.expect("sign change");
        assert!((z - gaussian_transfer_zero_radius(sigma, 1)).abs() <= dw * PI.sqrt());
    }
}

#[test]
fn clt_variance_bound_holds() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let kernel = RadialKernel::gaussian();
    let sigma: f64 = 0.5;
    let x = [0.1, -0.2];
    let (u, v) = ([1.0, 0.0], [0.6, 0.8]);
    let n = 40_000;
    let z: Vec<f64> = (0..n)
        .map(|_| {
            let y = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let w = [y[0] - x[0], y[1] - x[1]];
            (u[0] * w[0] + u[1] * w[1]) * (v[0] * w[0] + v[1] * w[1]) * kernel.eval(&x, &y, sigma).unwrap()
        })
        .collect();
    let mean = z.iter().sum::<f64>() / n as f64;
    let var = z.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let c = 2.0 / std::f64::consts::E;
    let bound = c * c * sigma.powi(4) / (2.0 * PI * sigma * sigma).powi(2);
    assert!(var <= bound, "{var} > {bound}");
}

#[test]
fn flow_finds_blob_centres() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut coords = Vec::new();
    for c in [[0.0, 0.0], [3.0, 0.0]] {
        for _ in 0..40 {
            coords.push(c[0] + rng.random_range(-0.02..0.02));
            coords.push(c[1] + rng.random_range(-0.02..0.02));
        }
    }
    let m = WeightedMeasure::uniform(2, coords).unwrap();
    let starts = vec![vec![0.15, 0.1], vec![-0.1, -0.12], vec![2.85, 0.1], vec![3.1, -0.1]];
    let res = flow_basins(&m, &RadialKernel::gaussian(), &starts, 0.5, &FlowParams::default()).unwrap();
    let ids: Vec<usize> = res.iter().map(|r| r.basin_id).collect();
    assert_eq!(ids, vec![0, 0, 1, 1]);
    for (r, c) in res.iter().zip([0.0, 0.0, 3.0, 3.0]) {
        assert!((r.attractor[0] - c).abs() < 0.05 && r.attractor[1].abs() < 0.05, "{:?}", r.attractor);
        for w in r.values.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}

#[test]
fn gh_certificate_on_jittered_circle() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let alpha = quadrature_circle(1.0, 40).unwrap().normalize();
    for eps in [1e-3, 1e-2, 5e-2] {
        let beta = alpha
            .map_atoms(|p| {
                let t: f64 = rng.random_range(0.0..2.0 * PI);
                let r = rng.random_range(0.0..eps);
                vec![p[0] + r * t.cos(), p[1] + r * t.sin()]
            })
            .unwrap();
        for gamma in [0.0, 0.5] {
            for sigma in [0.3, 1.0] {
                let params = TensorizedMetricParams::new(gamma, sigma, RadialKernel::gaussian()).unwrap();
                let c = gh_certificate(&alpha, &beta, &params).unwrap();
                assert!(c.winf <= eps);
                assert!(c.passed_gh && c.passed_tensor, "{c:?}");
            }
        }
    }
}
