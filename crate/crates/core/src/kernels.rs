//! Radial multiscale kernels `K(x, y, σ) = f(|y - x|^2 / σ^2) / C_d(σ)` and
//! their derived constants.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Profile `f` on `[0, ∞)`.
#[derive(Clone)]
pub enum Profile {
    /// `f(r) = exp(-r/2)`.
    Gaussian,
    /// Indicator of `[0, 1]` (closed ball).
    Truncation,
    /// Piecewise-linear interpolation of `(r, f)` knots, zero past the last knot.
    Tabulated { r: Arc<[f64]>, f: Arc<[f64]> },
    /// Arbitrary closures. `df` is the derivative, if known.
    Custom { f: Arc<ScalarFn>, df: Option<Arc<ScalarFn>> },
}

impl fmt::Debug for Profile {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Gaussian => write!(fm, "Gaussian"),
            Profile::Truncation => write!(fm, "Truncation"),
            Profile::Tabulated { r, .. } => write!(fm, "Tabulated({} knots)", r.len()),
            Profile::Custom { df, .. } => write!(fm, "Custom(derivative: {})", df.is_some()),
        }
    }
}

/// A radial kernel. Cheap to clone.
#[derive(Debug, Clone)]
pub struct RadialKernel {
    name: String,
    profile: Profile,
    support_sq: Option<f64>,
}

impl RadialKernel {
    pub fn gaussian() -> Self {
        Self { name: "gaussian".into(), profile: Profile::Gaussian, support_sq: None }
    }

    pub fn truncation() -> Self {
        Self { name: "truncation".into(), profile: Profile::Truncation, support_sq: Some(1.0) }
    }

    /// Looks up a builtin kernel by name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::gaussian()),
            "truncation" => Ok(Self::truncation()),
            other => Err(Error::invalid(format!("unknown kernel '{other}' (expected gaussian or truncation)"))),
        }
    }

    /// Piecewise-linear profile through the knots `(r[i], f[i])`. The knots
    /// must start at 0, increase strictly, and have maximum value 1.
    pub fn tabulated(name: impl Into<String>, r: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != f.len() {
            return Err(Error::invalid("tabulated profile needs at least two (r, f) pairs"));
        }
        if r[0] != 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) || r.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("tabulated knots must start at 0 and increase strictly"));
        }
        if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("profile values must be non-negative"));
        }
        let top = f.iter().copied().fold(0.0, f64::max);
        if (top - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("profile must satisfy sup f = 1, got {top}")));
        }
        let support = *r.last().unwrap();
        Ok(Self {
            name: name.into(),
            profile: Profile::Tabulated { r: r.into(), f: f.into() },
            support_sq: Some(support),
        })
    }

    /// Reads a tabulated profile from a CSV file with header `r,f`.
    pub fn load_tabulated_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| Error::Io(e.into()))?;
        let mut r = Vec::new();
        let mut f = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("invalid number '{s}'") });
            if rec.len() != 2 {
                return Err(Error::Parse { line, msg: format!("row {line} has {} fields, expected 2", rec.len()) });
            }
            r.push(parse(&rec[0])?);
            f.push(parse(&rec[1])?);
        }
        Self::tabulated(path.display().to_string(), r, f)
    }

    /// A profile given by closures. The profile is checked for
    /// non-negativity and `sup f = 1` on a sampling grid.
    pub fn custom<F>(name: impl Into<String>, f: F, df: Option<Arc<ScalarFn>>, support_sq: Option<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let k = Self {
            name: name.into(),
            profile: Profile::Custom { f: Arc::new(f), df },
            support_sq,
        };
        let grid = search_grid(support_sq);
        let mut top = 0.0f64;
        for &r in &grid {
            let v = k.profile(r);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("profile is negative or non-finite at r = {r}")));
            }
            top = top.max(v);
        }
        top = top.max(k.profile(0.0));
        if (top - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(format!("profile must satisfy sup f = 1, got {top}")));
        }
        Ok(k)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn profile_kind(&self) -> &Profile {
        &self.profile
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.profile, Profile::Gaussian)
    }

    /// `Some(s)` if `f(r) = 0` for `r > s`.
    pub fn support_radius_sq(&self) -> Option<f64> {
        self.support_sq
    }

    pub fn is_compact(&self) -> bool {
        self.support_sq.is_some()
    }

    /// `f(r)`.
    pub fn profile(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::Gaussian => (-0.5 * r).exp(),
            Profile::Truncation => {
                if r <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Tabulated { r: rs, f } => interp(rs, f, r),
            Profile::Custom { f, .. } => {
                if self.support_sq.is_some_and(|s| r > s) {
                    0.0
                } else {
                    f(r)
                }
            }
        }
    }

    /// `f'(r)`, when the kernel carries a derivative.
    pub fn derivative(&self, r: f64) -> Option<f64> {
        match &self.profile {
            Profile::Gaussian => Some(-0.5 * (-0.5 * r).exp()),
            Profile::Custom { df: Some(df), .. } => Some(df(r)),
            _ => None,
        }
    }

    pub fn has_derivative(&self) -> bool {
        matches!(self.profile, Profile::Gaussian | Profile::Custom { df: Some(_), .. })
    }

    /// `M_d = ∫_0^∞ r^{d/2 - 1} f(r) dr`.
    pub fn moment(&self, d: usize) -> Result<f64> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let h = d as f64 / 2.0;
        match &self.profile {
            Profile::Gaussian => Ok(2f64.powf(h) * gamma_half(d)),
            Profile::Truncation => Ok(2.0 / d as f64),
            Profile::Tabulated { r, f } => Ok(tabulated_moment(r, f, h - 1.0)),
            Profile::Custom { .. } => numeric_moment(self, d),
        }
    }

    /// `C_d(1) = ½ M_d ω_{d-1}`; `C_d(σ) = σ^d C_d(1)`.
    pub fn unit_normalization(&self, d: usize) -> Result<f64> {
        Ok(0.5 * self.moment(d)? * sphere_area(d))
    }

    /// `C_d(σ)`.
    pub fn normalization(&self, d: usize, sigma: f64) -> Result<f64> {
        check_sigma(sigma)?;
        Ok(sigma.powi(d as i32) * self.unit_normalization(d)?)
    }

    /// Binds the kernel to a dimension and scale for repeated evaluation.
    pub fn at_scale(&self, d: usize, sigma: f64) -> Result<ScaledKernel<'_>> {
        let norm = self.normalization(d, sigma)?;
        Ok(ScaledKernel {
            kernel: self,
            sigma,
            inv_sigma_sq: 1.0 / (sigma * sigma),
            inv_norm: 1.0 / norm,
            cutoff_sq: self.support_sq.map(|s| s * sigma * sigma),
        })
    }

    /// `K(x, y, σ)`.
    pub fn eval(&self, x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::dims(x.len(), y.len()));
        }
        let r2: f64 = x.iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum();
        Ok(self.at_scale(x.len(), sigma)?.value(r2))
    }
}

/// Free-function form of [`RadialKernel::eval`].
pub fn eval_kernel(kernel: &RadialKernel, x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
    kernel.eval(x, y, sigma)
}

/// A kernel bound to `(d, σ)`, evaluated on squared distances.
#[derive(Debug, Clone, Copy)]
pub struct ScaledKernel<'a> {
    kernel: &'a RadialKernel,
    sigma: f64,
    inv_sigma_sq: f64,
    inv_norm: f64,
    cutoff_sq: Option<f64>,
}

impl ScaledKernel<'_> {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Squared Euclidean radius beyond which the kernel vanishes.
    pub fn cutoff_sq(&self) -> Option<f64> {
        self.cutoff_sq
    }

    /// `K` as a function of the squared distance `r2 = |y - x|^2`.
    #[inline]
    pub fn value(&self, r2: f64) -> f64 {
        let u = r2 * self.inv_sigma_sq;
        match self.kernel.profile {
            Profile::Gaussian => (-0.5 * u).exp() * self.inv_norm,
            Profile::Truncation => {
                if u <= 1.0 {
                    self.inv_norm
                } else {
                    0.0
                }
            }
            _ => self.kernel.profile(u) * self.inv_norm,
        }
    }

    /// `dK / d(r2)`, when the profile has a derivative.
    #[inline]
    pub fn d_value(&self, r2: f64) -> Option<f64> {
        self.kernel
            .derivative(r2 * self.inv_sigma_sq)
            .map(|d| d * self.inv_sigma_sq * self.inv_norm)
    }
}

/// Constants of a kernel in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConstants {
    pub dim: usize,
    pub m_d: f64,
    /// `C_d(1)`.
    pub c_d_unit: f64,
    /// `sup r f(r)`.
    pub c: f64,
    /// `sup r^{3/2} |f'(r)|`; `None` without a derivative.
    pub a1: Option<f64>,
    /// `sup √r f(r)`.
    pub a2: f64,
    /// `2 (A1 + A2)`.
    pub a_f: Option<f64>,
    pub nu_d: f64,
    pub omega_dm1: f64,
    pub smooth_eligible: bool,
}

impl KernelConstants {
    /// `C_d(σ) = σ^d C_d(1)`.
    pub fn c_d(&self, sigma: f64) -> f64 {
        sigma.powi(self.dim as i32) * self.c_d_unit
    }

    /// Lipschitz factor `σ A_f / C_d(σ)` of the smooth-kernel stability bound.
    pub fn lipschitz(&self, sigma: f64) -> Option<f64> {
        self.a_f.map(|a| sigma * a / self.c_d(sigma))
    }
}

/// Computes `M_d`, `C_d`, and the sup constants of `kernel` in dimension `d`.
///
/// Builtin kernels use closed forms; other profiles use quadrature for `M_d`
/// and a grid search with golden-section refinement for the sups.
pub fn derive_constants(kernel: &RadialKernel, d: usize) -> Result<KernelConstants> {
    let m_d = kernel.moment(d)?;
    let (c, a1, a2) = match kernel.profile {
        Profile::Gaussian => (2.0 / std::f64::consts::E, Some(0.5 * 3f64.powf(1.5) * (-1.5f64).exp()), (-0.5f64).exp()),
        Profile::Truncation => (1.0, None, 1.0),
        _ => {
            let c = sup_search(|r| r * kernel.profile(r), kernel.support_sq);
            let a2 = sup_search(|r| r.sqrt() * kernel.profile(r), kernel.support_sq);
            let a1 = kernel
                .has_derivative()
                .then(|| sup_search(|r| r.powf(1.5) * kernel.derivative(r).unwrap().abs(), kernel.support_sq));
            (c, a1, a2)
        }
    };
    let a1 = a1.filter(|v| v.is_finite());
    let a_f = a1.map(|a1| 2.0 * (a1 + a2));
    Ok(KernelConstants {
        dim: d,
        m_d,
        c_d_unit: 0.5 * m_d * sphere_area(d),
        c,
        a1,
        a2,
        a_f,
        nu_d: ball_volume(d),
        omega_dm1: sphere_area(d),
        smooth_eligible: a_f.is_some(),
    })
}

/// Volume `ν_d` of the unit ball in R^d, with `ν_0 = 1`.
pub fn ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * ball_volume(d - 2),
    }
}

/// Area `ω_{d-1} = d ν_d` of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * ball_volume(d)
}

/// `Γ(n / 2)` for a positive integer `n`.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n > 0, "gamma_half(0) is a pole");
    let mut g = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("sigma must be positive, got {sigma}")))
    }
}

fn interp(rs: &[f64], fs: &[f64], r: f64) -> f64 {
    let last = rs.len() - 1;
    if r < 0.0 || r > rs[last] {
        return 0.0;
    }
    let i = rs.partition_point(|&k| k <= r);
    if i == 0 {
        return fs[0];
    }
    if i > last {
        return fs[last];
    }
    let t = (r - rs[i - 1]) / (rs[i] - rs[i - 1]);
    fs[i - 1] + t * (fs[i] - fs[i - 1])
}

/// Exact `∫ r^a f(r) dr` for piecewise-linear `f`, `a > -1`.
fn tabulated_moment(rs: &[f64], fs: &[f64], a: f64) -> f64 {
    let mut total = 0.0;
    for i in 1..rs.len() {
        let (r0, r1) = (rs[i - 1], rs[i]);
        let slope = (fs[i] - fs[i - 1]) / (r1 - r0);
        let icpt = fs[i - 1] - slope * r0;
        total += icpt * (r1.powf(a + 1.0) - r0.powf(a + 1.0)) / (a + 1.0)
            + slope * (r1.powf(a + 2.0) - r0.powf(a + 2.0)) / (a + 2.0);
    }
    total
}

fn numeric_moment(k: &RadialKernel, d: usize) -> Result<f64> {
    // Substituting r = u^2 removes the r^{-1/2} singularity at d = 1:
    // M_d = ∫ 2 u^{d-1} f(u^2) du.
    let g = |u: f64| 2.0 * u.powi(d as i32 - 1) * k.profile(u * u);
    if let Some(s) = k.support_sq {
        let v = adaptive_simpson(&g, 0.0, s.sqrt(), 1e-13, 50);
        return if v.is_finite() { Ok(v) } else { Err(Error::Numerical("condition (b) violated".into())) };
    }
    let mut total = adaptive_simpson(&g, 0.0, 1.0, 1e-13, 50);
    let mut lo = 1.0;
    for _ in 0..60 {
        let piece = adaptive_simpson(&g, lo, 2.0 * lo, 1e-13, 50);
        total += piece;
        if !total.is_finite() {
            break;
        }
        if piece.abs() <= 1e-14 * total.abs() {
            return Ok(total);
        }
        lo *= 2.0;
    }
    Err(Error::Numerical("condition (b) violated: M_d integral does not converge".into()))
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // Split first so that features narrower than the interval are seen.
    let n = 16;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            rec(f, x0, x1, f0, fm, f1, whole, tol / n as f64, max_depth)
        })
        .sum()
}

fn search_grid(support_sq: Option<f64>) -> Vec<f64> {
    let hi = support_sq.unwrap_or(1e6);
    let lo = 1e-12f64.min(hi * 1e-12);
    let n = 40_000;
    let ratio = (hi / lo).ln() / n as f64;
    let mut g: Vec<f64> = (0..=n).map(|i| lo * (ratio * i as f64).exp()).collect();
    *g.last_mut().unwrap() = hi;
    g
}

/// Numerical `sup_{r > 0} g(r)`: log-spaced grid, then golden-section
/// refinement around the best grid point.
pub fn sup_search<G: Fn(f64) -> f64>(g: G, support_sq: Option<f64>) -> f64 {
    let grid = search_grid(support_sq);
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &r) in grid.iter().enumerate() {
        let v = g(r);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (grid[best_i.saturating_sub(1)], grid[(best_i + 1).min(grid.len() - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * b.abs() {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    best.max(gc).max(gd)
}
