//! Quadrature building blocks: cached Gauss-Legendre rules and graded panels.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

const MAX_CACHED: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl Rule {
    fn build(n: usize) -> Rule {
        let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("rule order must be positive"));
        let (x, w) = gl.as_node_weight_pairs().iter().copied().unzip();
        Rule { x, w }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        self.x.iter().zip(&self.w).map(move |(&x, &w)| (m + c * x, c * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Cached rule of order `n` (1..=64).
pub fn gauss_legendre(n: usize) -> &'static Rule {
    static CACHE: OnceLock<Vec<OnceLock<Rule>>> = OnceLock::new();
    assert!((1..=MAX_CACHED).contains(&n), "Gauss-Legendre order {n} out of range");
    let cache = CACHE.get_or_init(|| (0..=MAX_CACHED).map(|_| OnceLock::new()).collect());
    cache[n].get_or_init(|| Rule::build(n))
}

/// Panels on `[a, b]` refined geometrically towards `a`: `[a, a+δ], [a+δ, a+2δ], [a+2δ, a+4δ], ...`.
pub fn graded_panels(a: f64, b: f64, delta: f64) -> Vec<(f64, f64)> {
    let len = b - a;
    if !(len > 0.0) {
        return Vec::new();
    }
    let delta = delta.clamp(len * 1e-15, len);
    let mut panels = vec![(a, a + delta)];
    let mut lo = delta;
    while lo < len {
        let hi = (2.0 * lo).min(len);
        if len - hi < 0.25 * lo {
            panels.push((a + lo, b));
            break;
        }
        panels.push((a + lo, a + hi));
        lo = hi;
    }
    panels
}

/// Integrates `f` over `[a, b]` with graded panels clustered at `a`.
pub fn integrate_graded(a: f64, b: f64, delta: f64, order: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let rule = gauss_legendre(order);
    graded_panels(a, b, delta)
        .into_iter()
        .map(|(lo, hi)| rule.integrate(lo, hi, &mut f))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exact_on_polynomials() {
        let r = gauss_legendre(4);
        let v = r.integrate(0.0, 2.0, |x| x.powi(7));
        assert!((v - 32.0).abs() < 1e-12);
    }

    #[test]
    fn graded_panels_cover_interval() {
        let p = graded_panels(1.0, 4.0, 1e-3);
        assert_eq!(p[0].0, 1.0);
        assert_eq!(p.last().unwrap().1, 4.0);
        for w in p.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn graded_handles_endpoint_singularity() {
        let v = integrate_graded(0.0, 1.0, 1e-12, 10, |x| x.powf(-0.5));
        assert!((v - 2.0).abs() < 1e-6);
    }
}
