//! Directional-statistics kernel for Tikhonov (von Mises) distributions.
//!
//! A Tikhonov component is parameterized by a single complex number `z`:
//! the density on `[0, 2π)` is
//!
//! ```text
//!     t(θ) = exp(Re[z e^{-jθ}]) / (2π I₀(|z|))
//! ```
//!
//! so `|z|` is the concentration and `arg(z)` the mean direction, and
//! pointwise products of components reduce to sums of their parameters.
//! Everything in this module is kept in log domain: `I₀` overflows an `f64`
//! near argument 709, while phase trackers routinely reach concentrations in
//! the tens of thousands.
//!
//! The module provides the primitive operations the mixture recursions are
//! built from: log-domain Bessel evaluation, the first-circular-moment map
//! `κ ↦ I₁(κ)/I₀(κ)` and its inverse, Tikhonov products, wrapped-Gaussian
//! concentration shrinkage, a closed-form KL divergence between components,
//! and circular mean/variance matching (CMVM) for collapsing a mixture to a
//! single component.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

/// Natural log of 2π.
pub const LN_TWO_PI: f64 = 1.837_877_066_409_345_5;

/// Below this argument the Bessel power series is used; above it the
/// large-argument asymptotic expansion. Both are accurate to ~1e-15 relative
/// at the crossover.
const BESSEL_SERIES_LIMIT: f64 = 20.0;

/// Errors from domain violations in the kernel functions.
#[derive(Debug, Clone, PartialEq)]
pub enum DirstatError {
    /// An argument fell outside the mathematical domain of the function.
    Domain { what: &'static str, value: f64 },
    /// A weighted-merge operation received no components.
    EmptyInput,
    /// Weight and component lists have different lengths.
    LengthMismatch { weights: usize, components: usize },
    /// Merge weights do not sum to one.
    WeightsNotNormalized { sum: f64 },
}

impl fmt::Display for DirstatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirstatError::Domain { what, value } => {
                write!(f, "{what} outside domain (got {value})")
            }
            DirstatError::EmptyInput => write!(f, "empty component list"),
            DirstatError::LengthMismatch { weights, components } => {
                write!(f, "{weights} weights for {components} components")
            }
            DirstatError::WeightsNotNormalized { sum } => {
                write!(f, "weights sum to {sum}, expected 1")
            }
        }
    }
}

impl std::error::Error for DirstatError {}

/// A single Tikhonov (von Mises) distribution on `[0, 2π)`.
///
/// `z = 0` denotes the uniform distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TikhonovComponent {
    /// Complex concentration parameter: `|z|` = concentration, `arg z` = mean direction.
    pub z: Complex64,
}

impl TikhonovComponent {
    /// Wraps a complex concentration parameter.
    ///
    /// Callers must supply a finite `z`; non-finite parameters indicate an
    /// upstream arithmetic bug and trip a debug assertion.
    #[inline]
    pub fn new(z: Complex64) -> Self {
        debug_assert!(z.re.is_finite() && z.im.is_finite(), "non-finite Tikhonov parameter");
        TikhonovComponent { z }
    }

    /// The uniform distribution on the circle.
    #[inline]
    pub fn uniform() -> Self {
        TikhonovComponent { z: Complex64::new(0.0, 0.0) }
    }

    /// Builds a component from concentration `kappa ≥ 0` and mean direction (radians).
    #[inline]
    pub fn from_polar(kappa: f64, mean_direction: f64) -> Self {
        TikhonovComponent::new(Complex64::from_polar(kappa, mean_direction))
    }

    /// Concentration `|z|`.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.z.norm()
    }

    /// Mean direction `arg z` in `(-π, π]`. Zero for the uniform component.
    #[inline]
    pub fn mean_direction(&self) -> f64 {
        self.z.arg()
    }

    /// Log density at `theta`.
    pub fn log_density(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        // Re[z e^{-jθ}] = re·cosθ + im·sinθ
        self.z.re * c + self.z.im * s - log_i0(self.kappa()) - LN_TWO_PI
    }

    /// Density at `theta`.
    pub fn density(&self, theta: f64) -> f64 {
        self.log_density(theta).exp()
    }

    /// First circular moment `E[e^{jθ}] = ρ(|z|) e^{j arg z}`.
    pub fn circular_moment(&self) -> Complex64 {
        let k = self.kappa();
        if k == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.z * (bessel_ratio_raw(k) / k)
        }
    }
}

/// One Wiener-process step: the per-symbol phase increment is
/// `N(0, sigma_delta²)` wrapped onto the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrappedGaussianStep {
    /// Standard deviation of the phase increment, radians/symbol.
    pub sigma_delta: f64,
}

impl WrappedGaussianStep {
    /// `sigma_delta` must be nonnegative and finite.
    pub fn new(sigma_delta: f64) -> Result<Self, DirstatError> {
        if !(sigma_delta >= 0.0) || !sigma_delta.is_finite() {
            return Err(DirstatError::Domain { what: "sigma_delta", value: sigma_delta });
        }
        Ok(WrappedGaussianStep { sigma_delta })
    }
}

// ---------------------------------------------------------------------------
// Bessel kernel
// ---------------------------------------------------------------------------

/// `ln I₀(x)` for `x ≥ 0`, accurate to better than 1e-10 relative over `[0, 1e6]`.
pub fn log_bessel_i0(x: f64) -> Result<f64, DirstatError> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(DirstatError::Domain { what: "log_bessel_i0 argument", value: x });
    }
    Ok(log_i0(x))
}

/// `ρ(κ) = I₁(κ)/I₀(κ)` for `κ ≥ 0`; strictly increasing, in `[0, 1)`.
pub fn bessel_ratio(kappa: f64) -> Result<f64, DirstatError> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(DirstatError::Domain { what: "bessel_ratio argument", value: kappa });
    }
    Ok(bessel_ratio_raw(kappa))
}

/// Inverse of [`bessel_ratio`]: returns `κ` with `|ρ(κ) − rho| ≤ 1e-9`.
pub fn inverse_bessel_ratio(rho: f64) -> Result<f64, DirstatError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(DirstatError::Domain { what: "inverse_bessel_ratio argument", value: rho });
    }
    Ok(inverse_bessel_ratio_raw(rho))
}

/// Unchecked `ln I₀`; internal hot path with the domain enforced by contract.
#[inline]
pub(crate) fn log_i0(x: f64) -> f64 {
    debug_assert!(x >= 0.0 && x.is_finite());
    if x < BESSEL_SERIES_LIMIT {
        i0_series(x).ln()
    } else {
        // I₀(x) ~ e^x / sqrt(2πx) · Σ_k u_k,   u_k = u_{k-1} (2k-1)² / (8kx)
        x - 0.5 * (2.0 * PI * x).ln() + asymptotic_sum(0.0, x).ln()
    }
}

/// `I₀(x)` by its power series; valid while the result fits an f64.
fn i0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    while term > sum * 1e-18 {
        term *= q / (m * m);
        sum += term;
        m += 1.0;
    }
    sum
}

/// `I₁(x)` by its power series, divided by `x/2` (i.e. `Σ q^m / (m!(m+1)!)`).
fn i1_series_scaled(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    while term > sum * 1e-18 {
        term *= q / (m * (m + 1.0));
        sum += term;
        m += 1.0;
    }
    sum
}

/// Large-argument asymptotic series `Σ_k s_k` for `I_ν`, with `mu = 4ν²`:
/// `s_0 = 1`, `s_k = s_{k-1} ((2k-1)² − mu) / (8kx)`. The shared prefactor
/// `e^x/√(2πx)` is applied by the caller (or cancels in ratios).
fn asymptotic_sum(mu: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev_abs = f64::INFINITY;
    for k in 1..=60u32 {
        let t = 2.0 * f64::from(k) - 1.0;
        term *= (t * t - mu) / (8.0 * f64::from(k) * x);
        // asymptotic series: stop at the smallest term
        if term.abs() >= prev_abs {
            break;
        }
        prev_abs = term.abs();
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum
}

#[inline]
pub(crate) fn bessel_ratio_raw(kappa: f64) -> f64 {
    debug_assert!(kappa >= 0.0 && kappa.is_finite());
    if kappa == 0.0 {
        0.0
    } else if kappa < BESSEL_SERIES_LIMIT {
        0.5 * kappa * i1_series_scaled(kappa) / i0_series(kappa)
    } else {
        // prefactors cancel in the ratio of the asymptotic sums
        (asymptotic_sum(4.0, kappa) / asymptotic_sum(0.0, kappa)).min(1.0 - 1e-16)
    }
}

/// Derivative of the moment map: `ρ'(κ) = 1 − ρ/κ − ρ²` (from the Bessel
/// recurrences). Used by the Newton refinement in the inverse.
#[inline]
fn bessel_ratio_derivative(kappa: f64, rho: f64) -> f64 {
    if kappa == 0.0 {
        0.5
    } else {
        1.0 - rho / kappa - rho * rho
    }
}

pub(crate) fn inverse_bessel_ratio_raw(rho: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&rho));
    if rho == 0.0 {
        return 0.0;
    }
    // Standard von Mises concentration estimates as the starting point.
    let mut kappa = if rho < 0.53 {
        2.0 * rho + rho.powi(3) + 5.0 * rho.powi(5) / 6.0
    } else if rho < 0.85 {
        -0.4 + 1.39 * rho + 0.43 / (1.0 - rho)
    } else {
        1.0 / (rho.powi(3) - 4.0 * rho * rho + 3.0 * rho)
    };
    // Bracket the root, then run safeguarded Newton.
    let mut lo = 0.0_f64;
    let mut hi = kappa.max(1.0);
    while bessel_ratio_raw(hi) < rho {
        lo = hi;
        hi *= 4.0;
    }
    kappa = kappa.clamp(lo, hi);
    for _ in 0..200 {
        let r = bessel_ratio_raw(kappa);
        let err = r - rho;
        if err.abs() <= 1e-13 * (1.0 - rho).max(1e-6) + 1e-15 {
            break;
        }
        if err > 0.0 {
            hi = kappa;
        } else {
            lo = kappa;
        }
        let step = err / bessel_ratio_derivative(kappa, r);
        let next = kappa - step;
        kappa = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    kappa
}

// ---------------------------------------------------------------------------
// Component operations
// ---------------------------------------------------------------------------

/// Pointwise product of two Tikhonov densities.
///
/// Returns `(c, log_scale)` such that `t_a(θ)·t_b(θ) = exp(log_scale)·t_c(θ)`
/// with `c.z = a.z + b.z`.
pub fn tikhonov_product(a: TikhonovComponent, b: TikhonovComponent) -> (TikhonovComponent, f64) {
    let z = a.z + b.z;
    let log_scale = log_i0(z.norm()) - log_i0(a.kappa()) - log_i0(b.kappa()) - LN_TWO_PI;
    (TikhonovComponent::new(z), log_scale)
}

/// Convolves a Tikhonov component with a wrapped-Gaussian step, projecting
/// the result back onto the Tikhonov family.
///
/// The mean direction is unchanged and the concentration shrinks as
/// `z' = z / (1 + σ_Δ² |z|)`; this preserves the family exactly, is the
/// identity at `σ_Δ = 0`, and agrees with the true convolution to second
/// order in `σ_Δ` (validated against quadrature in the test suite).
pub fn convolve_wrapped_gaussian(
    c: TikhonovComponent,
    step: WrappedGaussianStep,
) -> TikhonovComponent {
    let s2 = step.sigma_delta * step.sigma_delta;
    if s2 == 0.0 {
        return c;
    }
    TikhonovComponent::new(c.z / (1.0 + s2 * c.kappa()))
}

/// Closed-form KL divergence `D(p ‖ q)` between Tikhonov components:
///
/// ```text
///     ln I₀(|z_q|) − ln I₀(|z_p|) + ρ(|z_p|)·(|z_p| − Re[z_q e^{-j arg z_p}])
/// ```
///
/// Always ≥ 0, and 0 iff `p.z == q.z`.
pub fn tikhonov_kl(p: TikhonovComponent, q: TikhonovComponent) -> f64 {
    let kp = p.kappa();
    let kq = q.kappa();
    let aligned = if kp == 0.0 {
        q.z.re
    } else {
        // Re[z_q e^{-j arg z_p}]
        (q.z * p.z.conj()).re / kp
    };
    let kl = log_i0(kq) - log_i0(kp) + bessel_ratio_raw(kp) * (kp - aligned);
    kl.max(0.0)
}

/// Circular mean and variance matching: collapses a weighted Tikhonov mixture
/// to the single component with the same first circular moment.
///
/// `weights` must be nonnegative and sum to 1. A mixture moment with
/// `|m| ≥ 1` cannot arise analytically; if floating point produces one it is
/// clamped to `1 − 1e-12`.
pub fn cmvm(
    weights: &[f64],
    components: &[TikhonovComponent],
) -> Result<TikhonovComponent, DirstatError> {
    if weights.is_empty() || components.is_empty() {
        return Err(DirstatError::EmptyInput);
    }
    if weights.len() != components.len() {
        return Err(DirstatError::LengthMismatch {
            weights: weights.len(),
            components: components.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(DirstatError::WeightsNotNormalized { sum });
    }
    let mut moment = Complex64::new(0.0, 0.0);
    for (&w, c) in weights.iter().zip(components) {
        moment += w * c.circular_moment();
    }
    let r = moment.norm();
    if r == 0.0 {
        return Ok(TikhonovComponent::uniform());
    }
    let r = r.min(1.0 - 1e-12);
    Ok(TikhonovComponent::from_polar(
        inverse_bessel_ratio_raw(r),
        moment.arg(),
    ))
}

/// Wrapped-Gaussian density `Σ_l g(θ − 2πl; 0, σ²)` on `[0, 2π)`,
/// truncated once the tail terms fall below 1e-15 of the peak.
pub fn wrapped_gaussian_pdf(theta: f64, sigma: f64) -> Result<f64, DirstatError> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(DirstatError::Domain { what: "sigma", value: sigma });
    }
    // Wrap to (-π, π]; the sum is over all 2π translates of that offset.
    let t = theta.rem_euclid(2.0 * PI);
    let d0 = if t > PI { t - 2.0 * PI } else { t };
    // exp(-d²/2σ²) < 1e-15 once |d| > σ·sqrt(2·ln 1e15) ≈ 8.31 σ
    let reach = 8.31 * sigma + d0.abs();
    let l_wrap = (reach / (2.0 * PI)).ceil() as i64 + 1;
    let inv_two_s2 = 0.5 / (sigma * sigma);
    let mut sum = 0.0;
    for l in -l_wrap..=l_wrap {
        let d = d0 + 2.0 * PI * l as f64;
        sum += (-d * d * inv_two_s2).exp();
    }
    Ok(sum / (sigma * (2.0 * PI).sqrt()))
}
