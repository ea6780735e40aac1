//! Angular integrals of radial kernels over spheres.
//!
//! Every radial operator reduces to `∫_{S^{N-1}} k(|r e₁ - t ω|) dω`; the helpers
//! here evaluate that integral in closed form where one exists (N = 1, 3, or a
//! point at the origin) and by graded Gauss-Legendre in the polar angle otherwise.

use std::f64::consts::PI;

use crate::quad::integrate_graded;
use crate::special::sphere_area;

const ANGLE_ORDER: usize = 8;

/// `∫_{S^{N-1}} g(|r e₁ - t ω|) dω` restricted to distances in `(cut, ∞)`.
///
/// `antiderivative_3d`, when given, is `ℓ ↦ ∫ ℓ g(ℓ) dℓ`, used for the N = 3 closed form.
pub fn angular_integral(
    dim: usize,
    r: f64,
    t: f64,
    cut: f64,
    g: impl Fn(f64) -> f64,
    antiderivative_3d: Option<&dyn Fn(f64) -> f64>,
) -> f64 {
    let lo = (r - t).abs();
    let hi = r + t;
    if cut >= hi {
        return 0.0;
    }
    if dim == 1 {
        let mut acc = 0.0;
        if lo > cut {
            acc += g(lo);
        }
        acc += g(hi);
        return acc;
    }
    if r == 0.0 || t == 0.0 {
        return if hi > cut { sphere_area(dim) * g(hi) } else { 0.0 };
    }
    let lmin = lo.max(cut);
    if dim == 3 {
        if let Some(anti) = antiderivative_3d {
            return 2.0 * PI / (r * t) * (anti(hi) - anti(lmin));
        }
    }
    // Half-angle form: acos near 1 would lose the peak at θ = 0.
    let theta0 = if lmin > lo {
        let x = ((lmin - lo) * (lmin + lo) / (4.0 * r * t)).clamp(0.0, 1.0);
        2.0 * x.sqrt().asin()
    } else {
        0.0
    };
    let scale = (lmin / r.max(t)).max(1e-14);
    let weight = sphere_area(dim - 1);
    let p = dim as f64 - 2.0;
    let integrand = |th: f64| {
        let sh = (0.5 * th).sin();
        let l = ((r - t) * (r - t) + 4.0 * r * t * sh * sh).sqrt();
        let jac = if dim == 2 { 1.0 } else { th.sin().powf(p) };
        g(l) * jac
    };
    weight * integrate_graded(theta0, PI, 0.5 * scale, ANGLE_ORDER, integrand)
}

/// `∫_{S^{N-1}} |r e₁ - t ω|^{-p} 1{|r e₁ - t ω| > cut} dω`.
pub fn angular_power(dim: usize, r: f64, t: f64, p: f64, cut: f64) -> f64 {
    let anti = move |l: f64| {
        if (p - 2.0).abs() < 1e-14 {
            l.ln()
        } else {
            l.powf(2.0 - p) / (2.0 - p)
        }
    };
    angular_integral(dim, r, t, cut, |l| l.powf(-p), Some(&anti))
}

/// Mean of `g` over the sphere of radius `rho` centered at distance `r` from the origin,
/// as a function of `|y|`. Convenience for tests.
pub fn spherical_mean(dim: usize, r: f64, rho: f64, g: impl Fn(f64) -> f64) -> f64 {
    angular_integral(dim, r, rho, 0.0, g, None) / sphere_area(dim)
}
