//! Independent numerical oracles for the integration tests: composite
//! Simpson quadrature for the error-function family and the normal CDF,
//! and central finite differences for gradients. Nothing here calls the
//! crate's own special-function or gradient code.

#![allow(dead_code)]

const SQRT_PI: f64 = 1.7724538509055160;

/// Composite Simpson rule with `n` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0 && n >= 2);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

/// erf by direct quadrature of its defining integral; absolute error well
/// below 1e-13 on [-6, 6].
pub fn erf_quadrature(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ax = x.abs();
    let val = 2.0 / SQRT_PI * simpson(|t| (-t * t).exp(), 0.0, ax, 20_000);
    val.copysign(x)
}

/// log(erfc(x)) for x >= 0 via the tail integral with the quadratic term
/// carried analytically:
///
///   erfc(x) = (2/sqrt(pi)) e^{-x^2} G(x),
///   G(x) = integral_0^inf e^{-2xu - u^2} du.
///
/// For x >= 1 the substitution w = 2xu keeps the integrand O(1)-scaled.
/// Relative error is below 1e-12 over [0, 30].
pub fn log_erfc_quadrature(x: f64) -> f64 {
    assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let g = if x >= 1.0 {
        simpson(
            |w| (-w - w * w / (4.0 * x * x)).exp(),
            0.0,
            60.0,
            120_000,
        ) / (2.0 * x)
    } else {
        simpson(|u| (-2.0 * x * u - u * u).exp(), 0.0, 10.0, 120_000)
    };
    (2.0 / SQRT_PI).ln() - x * x + g.ln()
}

/// Standard normal CDF by quadrature of the density; |t| should stay
/// moderate (the result underflows past t ~ -37 anyway).
pub fn normal_cdf_quadrature(t: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let density = |s: f64| (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt();
    0.5 + simpson(density, 0.0, t.abs(), 40_000) * t.signum()
}

/// -log P(z > 0) for z ~ N(mu_z, sigma_z^2), from the CDF oracle.
pub fn pair_loss_oracle(mu_z: f64, sigma_z: f64) -> f64 {
    -normal_cdf_quadrature(mu_z / sigma_z).ln()
}

/// Central finite difference with step `h`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Relative error with an absolute floor: |a - b| over max(|a|, |b|, 1e-8).
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}
