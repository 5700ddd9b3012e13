//! Radial-kernel machinery: normalized Bessel functions, the
//! order-(n/2 − 1) Hankel transform, and even-moment extraction from sampled
//! spherical-mean traces.
//!
//! The normalized Bessel function `j_ν(x) = x^{−ν} J_ν(x)` is evaluated by
//! its power series for `x ≤ 12 + 2ν` and by the standard large-argument
//! expansion of `J_ν` beyond. The series is summed in double-double
//! arithmetic: near the handoff point the alternating sum loses ~5 digits to
//! cancellation, which plain f64 cannot spare at the accuracy the transform
//! tests demand.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::SphericalMeanTrace;
use crate::quad::{self, QuadError};

#[derive(Debug, Error)]
pub enum HankelError {
    #[error("only ambient dimensions 2 and 3 are supported (got {0})")]
    UnsupportedDimension(usize),
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
    #[error("lambda grid must be strictly increasing and start at 0")]
    BadLambdaGrid,
    #[error("profile order {profile} does not match dimension order {expected}")]
    OrderMismatch { profile: f64, expected: f64 },
    #[error("kernel transform vanishes on the usable grid; no moments can be extracted")]
    ProfileVanishes,
    #[error("even-polynomial fit residual {residual:e} exceeds tolerance {tol:e}")]
    GridTooCoarse { residual: f64, tol: f64 },
    #[error("invalid kernel parameter: {0}")]
    InvalidKernel(&'static str),
}

// ---------------------------------------------------------------------------
// Double-double helpers for the Bessel series
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    fn from_f64(a: f64) -> Dd {
        Dd { hi: a, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        quick_two_sum(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r1 = self.add(o.mul(Dd::from_f64(-q1)));
        let q2 = r1.hi / o.hi;
        let r2 = r1.add(o.mul(Dd::from_f64(-q2)));
        let q3 = r2.hi / o.hi;
        quick_two_sum(q1, q2).add(Dd::from_f64(q3))
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

// ---------------------------------------------------------------------------
// Gamma and Bessel
// ---------------------------------------------------------------------------

/// Gamma function via the Lanczos approximation (g = 7, 9 terms, ~1e-14
/// relative accuracy), with reflection for arguments below 1/2.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI / (s * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Series/asymptotic handoff point for [`normalized_bessel`].
fn bessel_switch(nu: f64) -> f64 {
    12.0 + 2.0 * nu
}

fn bessel_series(nu: f64, x: f64) -> f64 {
    // t_0 = 1 / (2^nu Γ(nu+1)); t_{k+1} = -t_k x² / (4 (k+1)(k+nu+1)).
    let t0 = 1.0 / (2.0_f64.powf(nu) * gamma(nu + 1.0));
    let x2 = two_prod(x, x);
    let mut term = Dd::from_f64(t0);
    let mut sum = term;
    for k in 0..400 {
        let denom = Dd::from_f64(4.0 * (k + 1) as f64).mul(two_sum((k + 1) as f64, nu));
        term = term.mul(x2).div(denom).neg();
        sum = sum.add(term);
        if term.hi.abs() < 1e-17 * sum.hi.abs() {
            break;
        }
    }
    sum.hi + sum.lo
}

fn bessel_asymptotic(nu: f64, x: f64) -> f64 {
    // J_nu(x) ≈ sqrt(2/(πx)) [cos χ · P − sin χ · Q], χ = x − νπ/2 − π/4,
    // with the Hankel expansion coefficients a_k = Π (4ν² − (2j−1)²)/(k! 8^k).
    // Terminates exactly for ν = 1/2; truncated at its smallest term else.
    let mu = 4.0 * nu * nu;
    let chi = x - (0.5 * nu + 0.25) * std::f64::consts::PI;
    let mut p = 0.0_f64;
    let mut q = 0.0_f64;
    let mut term = 1.0_f64; // a_k / x^k
    let mut last = f64::INFINITY;
    for k in 0..40usize {
        if term.abs() > last {
            break; // divergent tail reached
        }
        last = term.abs();
        let phase = k / 2 % 2; // (−1)^{floor(k/2)}
        let signed = if phase == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if term.abs() < 1e-18 * (p.abs() + q.abs()) {
            break;
        }
        let odd = (2 * k + 1) as f64;
        term *= (mu - odd * odd) / (8.0 * (k + 1) as f64 * x);
    }
    let amp = (2.0 / (std::f64::consts::PI * x)).sqrt();
    amp * (chi.cos() * p - chi.sin() * q) / x.powf(nu)
}

/// The normalized Bessel function `j_ν(x) = x^{−ν} J_ν(x)`, finite at zero
/// with `j_ν(0) = 1 / (2^ν Γ(ν+1))`.
pub fn normalized_bessel(nu: f64, x: f64) -> f64 {
    assert!(
        nu >= 0.0 && x >= 0.0,
        "normalized_bessel domain: nu, x >= 0"
    );
    if x == 0.0 {
        return 1.0 / (2.0_f64.powf(nu) * gamma(nu + 1.0));
    }
    if x <= bessel_switch(nu) {
        bessel_series(nu, x)
    } else {
        bessel_asymptotic(nu, x)
    }
}

// ---------------------------------------------------------------------------
// Radial kernels
// ---------------------------------------------------------------------------

/// A radial profile `g(r)` with rapid decay, defining a source via
/// translation: built-in Gaussian `exp(−r²/(2s²))`, or a tabulated profile
/// (linear interpolation, zero past the last sample).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum RadialKernel {
    Gaussian { s: f64 },
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl RadialKernel {
    pub fn gaussian(s: f64) -> Self {
        RadialKernel::Gaussian { s }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialKernel::Gaussian { s } => (-r * r / (2.0 * s * s)).exp(),
            RadialKernel::Tabulated { radii, values } => {
                if radii.is_empty() || r > *radii.last().unwrap() {
                    return 0.0;
                }
                if r <= radii[0] {
                    return values[0];
                }
                let idx = radii.partition_point(|&t| t < r);
                let (r0, r1) = (radii[idx - 1], radii[idx]);
                let (v0, v1) = (values[idx - 1], values[idx]);
                v0 + (v1 - v0) * (r - r0) / (r1 - r0)
            }
        }
    }

    /// Radius past which |g| stays below the tail threshold 1e-12.
    pub fn support_radius(&self) -> f64 {
        match self {
            // r²/(2s²) > ln(1e12)
            RadialKernel::Gaussian { s } => s.abs() * (2.0 * 12.0 * std::f64::consts::LN_10).sqrt(),
            RadialKernel::Tabulated { radii, .. } => radii.last().copied().unwrap_or(0.0),
        }
    }

    /// Closed-form Hankel transform of order n/2 − 1, when known.
    pub fn closed_form_transform(&self, n: usize, lambda: f64) -> Option<f64> {
        match self {
            RadialKernel::Gaussian { s } => {
                Some(s.powi(n as i32) * (-s * s * lambda * lambda / 2.0).exp())
            }
            RadialKernel::Tabulated { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<(), HankelError> {
        match self {
            RadialKernel::Gaussian { s } => {
                if *s > 0.0 && s.is_finite() {
                    Ok(())
                } else {
                    Err(HankelError::InvalidKernel(
                        "gaussian width must be positive",
                    ))
                }
            }
            RadialKernel::Tabulated { radii, values } => {
                if radii.len() != values.len() || radii.len() < 2 {
                    return Err(HankelError::InvalidKernel(
                        "tabulated kernel needs matching radii/values with at least two samples",
                    ));
                }
                if !radii.windows(2).all(|w| w[1] > w[0]) {
                    return Err(HankelError::InvalidKernel(
                        "tabulated radii must be strictly increasing",
                    ));
                }
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Hankel transform
// ---------------------------------------------------------------------------

/// The Hankel transform of `g` of order n/2 − 1 sampled on a λ grid.
#[derive(Debug, Clone)]
pub struct HankelProfile {
    /// Transform order ν = n/2 − 1.
    pub order: f64,
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// Smallest |G| over the grid.
    pub g_min: f64,
}

fn check_dim(n: usize) -> Result<f64, HankelError> {
    match n {
        2 | 3 => Ok(n as f64 / 2.0 - 1.0),
        other => Err(HankelError::UnsupportedDimension(other)),
    }
}

fn check_grid(lambdas: &[f64]) -> Result<(), HankelError> {
    if lambdas.is_empty() || lambdas[0] != 0.0 || !lambdas.windows(2).all(|w| w[1] > w[0]) {
        return Err(HankelError::BadLambdaGrid);
    }
    Ok(())
}

/// One point of the order-(n/2 − 1) Hankel transform of a scalar profile,
/// by adaptive quadrature over `[0, r_max]` with target 1e-10.
pub fn hankel_transform_at(
    g: impl Fn(f64) -> f64,
    n: usize,
    r_max: f64,
    lambda: f64,
) -> Result<f64, HankelError> {
    let nu = check_dim(n)?;
    let value = quad::integrate(
        |r| g(r) * normalized_bessel(nu, lambda * r) * r.powi(n as i32 - 1),
        0.0,
        r_max,
        1e-10,
        1e-10,
    )?;
    Ok(value)
}

/// `G(λ) = ∫_0^∞ g(r) j_{n/2−1}(λr) r^{n−1} dr` on the given grid, using the
/// kernel's closed form when it declares one and adaptive quadrature
/// otherwise.
pub fn hankel_transform(
    kernel: &RadialKernel,
    n: usize,
    lambdas: &[f64],
) -> Result<HankelProfile, HankelError> {
    transform_impl(kernel, n, lambdas, false)
}

/// Same as [`hankel_transform`] but always integrates numerically, ignoring
/// any closed form. Used to cross-check declared closed forms.
pub fn hankel_transform_quadrature(
    kernel: &RadialKernel,
    n: usize,
    lambdas: &[f64],
) -> Result<HankelProfile, HankelError> {
    transform_impl(kernel, n, lambdas, true)
}

fn transform_impl(
    kernel: &RadialKernel,
    n: usize,
    lambdas: &[f64],
    force_quadrature: bool,
) -> Result<HankelProfile, HankelError> {
    let nu = check_dim(n)?;
    check_grid(lambdas)?;
    kernel.validate()?;
    let r_max = kernel.support_radius();
    let mut values = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let v = match (force_quadrature, kernel.closed_form_transform(n, lambda)) {
            (false, Some(v)) => v,
            _ => hankel_transform_at(|r| kernel.eval(r), n, r_max, lambda)?,
        };
        values.push(v);
    }
    let g_min = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    Ok(HankelProfile {
        order: nu,
        lambdas: lambdas.to_vec(),
        values,
        g_min,
    })
}

/// Uniform grid of `count` points on [0, λ_max], λ_max chosen as the largest
/// λ with `|G(λ)| ≥ g_min_rel · |G(0)|`.
pub fn default_lambda_grid(
    kernel: &RadialKernel,
    n: usize,
    count: usize,
    g_min_rel: f64,
) -> Result<Vec<f64>, HankelError> {
    check_dim(n)?;
    kernel.validate()?;
    let r_max = kernel.support_radius();
    let g_at = |lambda: f64| -> Result<f64, HankelError> {
        match kernel.closed_form_transform(n, lambda) {
            Some(v) => Ok(v),
            None => hankel_transform_at(|r| kernel.eval(r), n, r_max, lambda),
        }
    };
    let g0 = g_at(0.0)?.abs();
    if g0 == 0.0 {
        return Err(HankelError::ProfileVanishes);
    }
    let floor = g_min_rel * g0;
    // March outward until the transform decays below the floor.
    let mut hi = 1.0 / r_max.max(1e-6);
    let mut steps = 0;
    while g_at(hi)?.abs() >= floor {
        hi *= 1.5;
        steps += 1;
        if steps > 200 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g_at(mid)?.abs() >= floor {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda_max = lo.max(1e-6);
    Ok((0..count)
        .map(|i| lambda_max * i as f64 / (count - 1) as f64)
        .collect())
}

// ---------------------------------------------------------------------------
// Even-moment extraction
// ---------------------------------------------------------------------------

/// Knobs for [`extract_even_moments`].
#[derive(Debug, Clone)]
pub struct ExtractConfig {
    /// Grid points with |G| below this fraction of max |G| are discarded.
    pub g_min_rel: f64,
    /// Extra even powers fitted beyond the 2m − 1 that are returned. The
    /// guard terms absorb the high-order tail of Φ so the low coefficients
    /// stay unbiased Taylor coefficients.
    pub guard_terms: usize,
    /// Relative residual above which the fit is rejected.
    pub tol_fit: f64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            g_min_rel: 1e-6,
            guard_terms: 4,
            tol_fit: 1e-5,
        }
    }
}

/// Extracts the even moments `μ_{2k} = Σ_j a_j |y − x_j|^{2k}` for
/// `k = 0 .. 2m−1` from a sampled trace.
///
/// Computes `Φ(λ) = (2π)^{−n/2} ∫ (R_y f)(t) j_{n/2−1}(λt) dt / G(λ)` on the
/// usable part of the profile grid, fits an even polynomial in λ by least
/// squares, and rescales the Taylor coefficients:
/// `μ_{2k} = β_k (−1)^k k! Γ(k + n/2) 2^{2k + n/2 − 1}`.
pub fn extract_even_moments(
    trace: &SphericalMeanTrace,
    profile: &HankelProfile,
    n: usize,
    m: usize,
    cfg: &ExtractConfig,
) -> Result<Vec<f64>, HankelError> {
    let nu = check_dim(n)?;
    if (profile.order - nu).abs() > 1e-12 {
        return Err(HankelError::OrderMismatch {
            profile: profile.order,
            expected: nu,
        });
    }
    let g_max = profile
        .values
        .iter()
        .map(|v| v.abs())
        .fold(0.0_f64, f64::max);
    let usable: Vec<usize> = (0..profile.lambdas.len())
        .filter(|&i| profile.values[i].abs() > cfg.g_min_rel * g_max)
        .collect();

    let degree = 2 * m - 1 + cfg.guard_terms; // highest fitted power of λ²
    if g_max == 0.0 || usable.len() < degree + 2 {
        return Err(HankelError::ProfileVanishes);
    }

    let norm_const = (2.0 * std::f64::consts::PI).powf(-(n as f64) / 2.0);
    let lambda_ref = profile.lambdas[*usable.last().unwrap()];
    let mut phi = Vec::with_capacity(usable.len());
    let mut zs = Vec::with_capacity(usable.len());
    for &i in &usable {
        let lambda = profile.lambdas[i];
        let integrand: Vec<f64> = trace
            .radii
            .iter()
            .zip(&trace.values)
            .map(|(&t, &v)| v * normalized_bessel(nu, lambda * t))
            .collect();
        let integral = quad::integrate_samples(&trace.radii, &integrand);
        phi.push(norm_const * integral / profile.values[i]);
        let z = lambda / lambda_ref;
        zs.push(z * z);
    }

    // Least-squares fit of Φ against even powers (z = (λ/λ_ref)²).
    let rows = zs.len();
    let cols = degree + 1;
    let design = nalgebra::DMatrix::from_fn(rows, cols, |r, c| zs[r].powi(c as i32));
    let rhs = nalgebra::DVector::from_vec(phi.clone());
    let svd = design.clone().svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-14)
        .map_err(|_| HankelError::ProfileVanishes)?;
    let residual = (&design * &coeffs - &rhs).norm();
    let scale = rhs.norm().max(f64::MIN_POSITIVE);
    if residual / scale > cfg.tol_fit {
        return Err(HankelError::GridTooCoarse {
            residual: residual / scale,
            tol: cfg.tol_fit,
        });
    }

    let mut moments = Vec::with_capacity(2 * m);
    let mut factorial = 1.0;
    for k in 0..2 * m {
        if k > 0 {
            factorial *= k as f64;
        }
        let beta = coeffs[k] / lambda_ref.powi(2 * k as i32);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let scale = factorial
            * gamma(k as f64 + n as f64 / 2.0)
            * 2.0_f64.powf(2.0 * k as f64 + n as f64 / 2.0 - 1.0);
        moments.push(beta * sign * scale);
    }
    Ok(moments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward;
    use crate::model::RadialSources;

    const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(1.5) - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((gamma(7.5) - 1_871.254_305_797_788_5).abs() < 1e-10);
    }

    #[test]
    fn bessel_at_zero_is_leading_series_term() {
        for nu in [0.0, 0.5, 1.0, 2.5] {
            let expected = 1.0 / (2.0_f64.powf(nu) * gamma(nu + 1.0));
            assert!((normalized_bessel(nu, 0.0) - expected).abs() < 1e-14);
        }
    }

    /// j_{1/2}(x) · x = sqrt(2/π) · sin x, across both evaluation branches.
    #[test]
    fn bessel_half_order_sine_identity() {
        let mut worst = 0.0_f64;
        for i in 1..=2000 {
            let x = 20.0 * i as f64 / 2000.0;
            let lhs = normalized_bessel(0.5, x) * x;
            let rhs = SQRT_2_OVER_PI * x.sin();
            worst = worst.max((lhs - rhs).abs());
        }
        assert!(worst < 1e-12, "worst deviation {worst:e}");
    }

    #[test]
    fn bessel_j0_first_zero() {
        // First zero of J0, frozen from bisection on the series.
        let x0 = 2.404_825_557_695_773;
        assert!(normalized_bessel(0.0, x0).abs() < 1e-10);
    }

    #[test]
    fn bessel_branches_agree_at_handoff() {
        for nu in [0.0, 0.5] {
            let x = bessel_switch(nu);
            let below = bessel_series(nu, x);
            let above = bessel_asymptotic(nu, x);
            assert!(
                (below - above).abs() < 1e-11,
                "nu={nu}: series {below:e} vs asymptotic {above:e}"
            );
        }
    }

    #[test]
    fn gaussian_self_transform() {
        // Quadrature must reproduce G(λ) = e^{−λ²/2} for the unit Gaussian.
        let kernel = RadialKernel::gaussian(1.0);
        for n in [2usize, 3] {
            for i in 0..=20 {
                let lambda = 5.0 * i as f64 / 20.0;
                let v = hankel_transform_at(|r| kernel.eval(r), n, kernel.support_radius(), lambda)
                    .unwrap();
                let exact = (-lambda * lambda / 2.0).exp();
                assert!((v - exact).abs() < 1e-8, "n={n} λ={lambda}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn transform_at_zero_is_weighted_mass() {
        let kernel = RadialKernel::gaussian(1.0);
        for n in [2usize, 3] {
            let nu = n as f64 / 2.0 - 1.0;
            let mass = quad::integrate(
                |r| kernel.eval(r) * r.powi(n as i32 - 1),
                0.0,
                kernel.support_radius(),
                1e-12,
                1e-12,
            )
            .unwrap();
            let j0 = normalized_bessel(nu, 0.0);
            let g0 = hankel_transform(&kernel, n, &[0.0, 1.0]).unwrap().values[0];
            assert!((g0 - j0 * mass).abs() < 1e-10);
        }
    }

    #[test]
    fn hankel_inversion_self_reciprocity() {
        // Applying the transform twice reproduces g on [0, 3].
        let kernel = RadialKernel::gaussian(1.0);
        for n in [2usize, 3] {
            let lambda_max = 2.0 * kernel.support_radius();
            for i in 0..=12 {
                let r = 3.0 * i as f64 / 12.0;
                let g_rec = hankel_transform_at(
                    |lambda| kernel.closed_form_transform(n, lambda).unwrap(),
                    n,
                    lambda_max,
                    r,
                )
                .unwrap();
                assert!(
                    (g_rec - kernel.eval(r)).abs() < 1e-6,
                    "n={n} r={r}: {g_rec} vs {}",
                    kernel.eval(r)
                );
            }
        }
    }

    #[test]
    fn default_grid_respects_floor() {
        let kernel = RadialKernel::gaussian(1.0);
        let grid = default_lambda_grid(&kernel, 2, 64, 1e-6).unwrap();
        assert_eq!(grid.len(), 64);
        assert_eq!(grid[0], 0.0);
        let g_end = kernel
            .closed_form_transform(2, *grid.last().unwrap())
            .unwrap();
        assert!((0.99e-6..1.2e-6).contains(&g_end), "G at end: {g_end:e}");
    }

    fn radial_model(n: usize, nodes: Vec<Vec<f64>>, amps: Vec<f64>) -> RadialSources {
        RadialSources::new(n, nodes, amps, RadialKernel::gaussian(1.0)).unwrap()
    }

    fn extraction_grid(kernel: &RadialKernel, n: usize, d_max: f64) -> Vec<f64> {
        // Keep λ·d ≲ 2 so the guarded even-polynomial fit stays unbiased.
        let by_decay = default_lambda_grid(kernel, n, 64, 1e-6).unwrap();
        let lambda_max = by_decay.last().unwrap().min(2.0 / d_max);
        (0..64).map(|i| lambda_max * i as f64 / 63.0).collect()
    }

    #[test]
    fn extract_single_source_second_moment() {
        // One source of amplitude 2 at distance 1.5: μ_2 = 2 · 1.5² = 4.5.
        let model = radial_model(3, vec![vec![1.5, 0.0, 0.0]], vec![2.0]);
        let y = vec![0.0, 0.0, 0.0];
        let radii = forward::default_radial_grid(&model, &y, 512);
        let trace = forward::radial_trace(&model, &y, &radii).unwrap();
        let grid = extraction_grid(model.kernel(), 3, 1.5);
        let profile = hankel_transform(model.kernel(), 3, &grid).unwrap();
        let mu = extract_even_moments(&trace, &profile, 3, 1, &ExtractConfig::default()).unwrap();
        assert!((mu[0] - 2.0).abs() < 1e-6, "mu0 = {}", mu[0]);
        assert!((mu[1] - 4.5).abs() < 1e-4, "mu2 = {}", mu[1]);
    }

    #[test]
    fn extract_two_sources_matches_power_sums() {
        // Two-source geometry in the plane; oracle is the direct power sum.
        let model = radial_model(2, vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![3.0, 2.0]);
        let y = vec![-1.0, 1.0];
        let radii = forward::default_radial_grid(&model, &y, 512);
        let trace = forward::radial_trace(&model, &y, &radii).unwrap();
        let d: Vec<f64> = model
            .nodes()
            .iter()
            .map(|x| crate::model::dist(x, &y))
            .collect();
        let grid = extraction_grid(model.kernel(), 2, d.iter().cloned().fold(0.0, f64::max));
        let profile = hankel_transform(model.kernel(), 2, &grid).unwrap();
        let mu = extract_even_moments(&trace, &profile, 2, 2, &ExtractConfig::default()).unwrap();
        for k in 0..4 {
            let exact: f64 = model
                .amplitudes()
                .iter()
                .zip(&d)
                .map(|(a, dk)| a * dk.powi(2 * k as i32))
                .sum();
            let rel = (mu[k] - exact).abs() / exact.abs();
            assert!(
                rel < 1e-3,
                "mu_{}: {} vs {} (rel {rel:e})",
                2 * k,
                mu[k],
                exact
            );
        }
    }

    #[test]
    fn extraction_is_linear_in_trace() {
        let model = radial_model(3, vec![vec![0.5, -0.3, 1.1]], vec![2.0]);
        let y = vec![1.0, 0.0, 0.0];
        let radii = forward::default_radial_grid(&model, &y, 512);
        let trace = forward::radial_trace(&model, &y, &radii).unwrap();
        let mut doubled = trace.clone();
        for v in &mut doubled.values {
            *v *= 2.0;
        }
        let grid = extraction_grid(model.kernel(), 3, 2.0);
        let profile = hankel_transform(model.kernel(), 3, &grid).unwrap();
        let cfg = ExtractConfig::default();
        let mu = extract_even_moments(&trace, &profile, 3, 1, &cfg).unwrap();
        let mu2 = extract_even_moments(&doubled, &profile, 3, 1, &cfg).unwrap();
        for (a, b) in mu.iter().zip(&mu2) {
            assert!((2.0 * a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn tabulated_kernel_interpolates() {
        let radii: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let values: Vec<f64> = radii.iter().map(|&r| (-r * r / 2.0).exp()).collect();
        let kernel = RadialKernel::Tabulated { radii, values };
        kernel.validate().unwrap();
        assert!((kernel.eval(1.0) - (-0.5_f64).exp()).abs() < 1e-3);
        assert_eq!(kernel.eval(100.0), 0.0);
    }
}
