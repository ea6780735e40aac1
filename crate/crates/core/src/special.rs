//! Gamma-function constants of the fractional calculus.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{invalid, Result};

pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

/// Surface measure of the unit sphere `S^{N-1}` (2 for `N = 1`).
pub fn sphere_area(dim: usize) -> f64 {
    let d = dim as f64;
    2.0 * PI.powf(0.5 * d) / gamma(0.5 * d)
}

/// `∫_0^π sin^{N-2}θ dθ`, the normalizer of the polar-angle density on `S^{N-1}`.
pub fn polar_normalizer(dim: usize) -> f64 {
    assert!(dim >= 2);
    let d = dim as f64;
    PI.sqrt() * gamma(0.5 * (d - 1.0)) / gamma(0.5 * d)
}

/// Constant `C_{N,s}` making `C ∫ (u(x)-u(y))/|x-y|^{N+2s} dy` the Fourier multiplier `|ξ|^{2s}`.
pub fn fraclap_constant(dim: usize, s: f64) -> Result<f64> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("fractional order s = {s} must lie in (0, 1)")));
    }
    let d = dim as f64;
    Ok(4f64.powf(s) * gamma(0.5 * d + s) / (PI.powf(0.5 * d) * gamma(-s).abs()))
}

/// `(-Δ)^s (1-|x|²)₊^s` inside the unit ball.
pub fn getoor_constant(dim: usize, s: f64) -> f64 {
    let d = dim as f64;
    4f64.powf(s) * gamma(1.0 + s) * gamma(0.5 * d + s) / gamma(0.5 * d)
}

/// Normalization making `c · I_α` the inverse of `(-Δ)^{α/2}` on `R^N`.
pub fn riesz_constant(dim: usize, alpha: f64) -> f64 {
    let d = dim as f64;
    gamma(0.5 * (d - alpha)) / (2f64.powf(alpha) * PI.powf(0.5 * d) * gamma(0.5 * alpha))
}

/// Literature value of the unit-ball Green-function constant (reference only).
pub fn green_constant_reference(dim: usize, s: f64) -> f64 {
    let d = dim as f64;
    gamma(0.5 * d) / (4f64.powf(s) * PI.powf(0.5 * d) * gamma(s).powi(2))
}

/// `C` with `(-Δ)^s |x|^{-α} = C |x|^{-α-2s}` for `0 < α < N - 2s`.
pub fn power_coefficient(dim: usize, s: f64, alpha: f64) -> Result<f64> {
    let d = dim as f64;
    if !(alpha > 0.0 && alpha < d - 2.0 * s) {
        return Err(invalid(format!(
            "alpha = {alpha} must lie in (0, N-2s) = (0, {})",
            d - 2.0 * s
        )));
    }
    Ok(4f64.powf(s) * gamma(0.5 * (alpha + 2.0 * s)) * gamma(0.5 * (d - alpha))
        / (gamma(0.5 * alpha) * gamma(0.5 * (d - alpha - 2.0 * s))))
}
