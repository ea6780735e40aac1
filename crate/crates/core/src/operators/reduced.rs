//! One-dimensional reduction of `(-Δ)^s` for radial functions and exterior tails.

use crate::error::{invalid, Error, Result};
use crate::grid::{DomainKind, DomainSpec};
use crate::quad::integrate_graded;
use crate::special::fraclap_constant;
use crate::sphere::angular_power;

const ORDER: usize = 10;

/// Kernel `H(σ)` of the reduction
/// `(-Δ)^s w(r) = r^{-2s} ∫_1^∞ [(w(r)-w(σr)) + (w(r)-w(r/σ))σ^{2s-N}] σ(σ²-1)^{-1-2s} H(σ) dσ`.
///
/// Obtained from the angular kernel `K(1,σ) = ∫_{S^{N-1}} |e₁ - σω|^{-N-2s} dω` as
/// `H(σ) = C_{N,s} σ^{N-2} K(1,σ) (σ²-1)^{1+2s}`.
pub fn reduced_kernel(dim: usize, s: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(invalid(format!("H(σ) is defined for σ > 1, got {sigma}")));
    }
    let c = fraclap_constant(dim, s)?;
    let k = angular_power(dim, 1.0, sigma, dim as f64 + 2.0 * s, 0.0);
    Ok(c * sigma.powf(dim as f64 - 2.0) * k * (sigma * sigma - 1.0).powf(1.0 + 2.0 * s))
}

/// `σ(σ²-1)^{-1-2s} H(σ)` at `σ = 1 + ε`, i.e. `C_{N,s} σ^{N-1} K(1,σ)`.
///
/// Below `ε = 1e-8` the leading singular term is used, since `1 + ε` loses digits.
pub fn reduced_weight(dim: usize, s: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(invalid(format!("reduced weight needs ε > 0, got {eps}")));
    }
    let c = fraclap_constant(dim, s)?;
    let p = dim as f64 + 2.0 * s;
    let e_min = 1e-8;
    if eps < e_min {
        let lead = angular_power(dim, 1.0, 1.0 + e_min, p, 0.0) * e_min.powf(1.0 + 2.0 * s);
        return Ok(c * lead * eps.powf(-1.0 - 2.0 * s));
    }
    let sigma = 1.0 + eps;
    Ok(c * sigma.powf(dim as f64 - 1.0) * angular_power(dim, 1.0, sigma, p, 0.0))
}

/// Integrates over `[a, b]` with panels graded towards both ends.
pub(crate) fn two_sided(a: f64, b: f64, f: &mut dyn FnMut(f64) -> f64) -> f64 {
    let m = 0.5 * (a + b);
    let delta = 1e-9 * (b - a);
    integrate_graded(a, m, delta, ORDER, &mut *f) + integrate_graded(0.0, b - m, delta, ORDER, |y| f(b - y))
}

/// Coefficients `c₂..c₅` of `d(1+ε) ≈ Σ c_k ε^k` from samples at `ε_c, 2ε_c, 3ε_c, 4ε_c`
/// (returned as `[c₂, c₃, c₄, c₅]`).
fn quartic_fit(d: &dyn Fn(f64) -> f64, eps_c: f64) -> [f64; 4] {
    let m = nalgebra::Matrix4::from_fn(|i, k| ((i + 1) as f64).powi(k as i32 + 2));
    let b = nalgebra::Vector4::from_fn(|i, _| d(1.0 + (i + 1) as f64 * eps_c));
    let c = m.lu().solve(&b).unwrap_or_else(nalgebra::Vector4::zeros);
    [0, 1, 2, 3].map(|k| c[k] / eps_c.powi(k as i32 + 2))
}

/// `(-Δ)^s w(r)` for a radial profile `w` by the σ-reduction.
///
/// `kinks` lists radii where `w` is not smooth (support edges); the σ-integration
/// is split there. `w` must already include its exterior values.
pub fn fraclap_radial_reduced(dim: usize, s: f64, w: &dyn Fn(f64) -> f64, r: f64, kinks: &[f64]) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("the reduction needs r > 0"));
    }
    let c = fraclap_constant(dim, s)?;
    let nd = dim as f64;
    let two_s = 2.0 * s;
    let p = nd + two_s;
    let wr = w(r);
    let diff = |sigma: f64| (wr - w(sigma * r)) * sigma.powf(nd - 1.0) + (wr - w(r / sigma)) * sigma.powf(two_s - 1.0);
    let kern = |sigma: f64| angular_power(dim, 1.0, sigma, p, 0.0);
    let integrand = |sigma: f64| -> f64 {
        if sigma <= 1.0 {
            return 0.0;
        }
        diff(sigma) * kern(sigma)
    };
    let far = 64.0f64.max(4.0 * kinks.iter().fold(0.0f64, |m, &b| m.max(b)) / r);
    let mut breaks: Vec<f64> = vec![far];
    for &b in kinks {
        for sig in [b / r, r / b] {
            if sig > 1.0 + 1e-12 && sig < far {
                breaks.push(sig);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    // The difference is O(ε²) at σ = 1 + ε and the kernel O(ε^{-1-2s}); below ε_c the
    // difference is replaced by its quadratic-cubic fit to avoid cancellation.
    let eps_c = 1e-3f64.min(0.2 * (breaks[0] - 1.0));
    let fit = quartic_fit(&diff, eps_c);
    // Below ε = 1e-8 the sum 1 + ε loses digits; use the leading singular behaviour.
    let e_min = 1e-8;
    let lead = kern(1.0 + e_min) * e_min.powf(1.0 + two_s);
    let kern_near = |e: f64| {
        if e < e_min {
            lead * e.powf(-1.0 - two_s)
        } else {
            kern(1.0 + e)
        }
    };
    // ε = ε_c v^{1/(2-2s)} flattens ε^{1-2s}.
    let expo = 1.0 / (2.0 - two_s);
    let mut acc = integrate_graded(0.0, 1.0, 1e-6, ORDER, |v| {
        if v <= 0.0 {
            return 0.0;
        }
        let e = eps_c * v.powf(expo);
        let jac = expo * e / v;
        let poly = fit.iter().rev().fold(0.0, |a, c| a * e + c);
        poly * e * e * kern_near(e) * jac
    });
    let mut lo = 1.0 + eps_c;
    for &b in &breaks {
        acc += two_sided(lo, b, &mut |x| integrand(x));
        lo = b;
    }
    // σ = far / v for v in (0, 1].
    acc += integrate_graded(0.0, 1.0, 1e-8, ORDER, |v| {
        if v <= 0.0 {
            return 0.0;
        }
        let sigma = far / v;
        integrand(sigma) * far / (v * v)
    });
    let out = c * r.powf(-two_s) * acc;
    if !out.is_finite() {
        return Err(Error::Quadrature(format!("reduced operator at r = {r} is not finite")));
    }
    Ok(out)
}

/// `C_{N,s} ∫_{|y|>R} g(|y|) |x_i - y|^{-N-2s} dy` at every interior node of a ball grid.
///
/// Subtracting this from the zero-exterior operator gives `(-Δ)^s` of a function
/// continued by `g` outside the ball.
pub fn exterior_tail(domain: &DomainSpec, s: f64, g: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    let (radius, dim) = match domain.kind {
        DomainKind::Ball { radius, dim } => (radius, dim),
        DomainKind::Interval { .. } => {
            return Err(Error::Unsupported(
                "exterior tails are implemented for ball grids".into(),
            ))
        }
    };
    let c = fraclap_constant(dim, s)?;
    let nd = dim as f64;
    let p = nd + 2.0 * s;
    let far = 8.0 * radius;
    let out = domain
        .interior()
        .map(|i| {
            let r = domain.node(i);
            let kern = |t: f64| g(t) * t.powf(nd - 1.0) * angular_power(dim, r, t, p, 0.0);
            let near = integrate_graded(radius, far, 0.25 * (radius - r), ORDER, kern);
            let tail = integrate_graded(0.0, 1.0, 1e-8, ORDER, |v| {
                if v <= 0.0 {
                    return 0.0;
                }
                let t = far / v;
                kern(t) * far / (v * v)
            });
            c * (near + tail)
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{getoor_constant, power_coefficient, sphere_area};

    #[test]
    fn kernel_growth_at_infinity() {
        for dim in [2usize, 3] {
            let s = 0.75;
            let sig = 1e4;
            let h = reduced_kernel(dim, s, sig).unwrap();
            let expect = fraclap_constant(dim, s).unwrap() * sphere_area(dim) * sig.powf(2.0 * s);
            assert!((h / expect - 1.0).abs() < 1e-3, "{dim}: {h} vs {expect}");
        }
    }

    #[test]
    fn reduced_getoor() {
        for dim in [2usize, 3] {
            let s = 0.75;
            let w = |t: f64| (1.0 - t * t).max(0.0).powf(s);
            let target = getoor_constant(dim, s);
            for r in [0.1, 0.4, 0.8, 0.95] {
                let v = fraclap_radial_reduced(dim, s, &w, r, &[1.0]).unwrap();
                assert!((v / target - 1.0).abs() < 1e-6, "{dim} {r}: {v} vs {target}");
            }
        }
    }

    #[test]
    fn reduced_power() {
        let (dim, s, alpha) = (3usize, 0.75, 1.0);
        let w = |t: f64| t.powf(-alpha);
        let c = power_coefficient(dim, s, alpha).unwrap();
        for r in [0.3, 1.0, 2.0] {
            let v = fraclap_radial_reduced(dim, s, &w, r, &[]).unwrap();
            let ratio = v * r.powf(alpha + 2.0 * s);
            assert!((ratio / c - 1.0).abs() < 1e-6, "{ratio} vs {c}");
        }
    }

    #[test]
    fn weight_matches_kernel() {
        for eps in [1e-10f64, 1e-3, 0.5, 10.0] {
            let sigma = 1.0 + eps;
            let via_h = sigma * (sigma * sigma - 1.0).powf(-2.5) * reduced_kernel(3, 0.75, sigma).unwrap();
            let w = reduced_weight(3, 0.75, eps).unwrap();
            let tol = if eps < 1e-8 { 1e-4 } else { 1e-10 };
            assert!((w / via_h - 1.0).abs() < tol, "{eps}: {w} vs {via_h}");
        }
    }

    #[test]
    fn tail_of_zero_is_zero() {
        let d = DomainSpec::ball(1.0, 2, 32).unwrap();
        assert!(exterior_tail(&d, 0.75, &|_| 0.0).unwrap().iter().all(|&v| v == 0.0));
    }
}
