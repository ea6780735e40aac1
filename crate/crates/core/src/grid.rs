//! Uniform grids on an interval or a ball (radial), and nodal grid functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::sphere_area;

pub const MIN_GRID_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainKind {
    Interval {
        a: f64,
        b: f64,
    },
    /// Ball of the given radius in `R^dim`, discretized along the radius.
    Ball {
        radius: f64,
        dim: usize,
    },
}

/// Interval nodes are `a + i h`; radial nodes are `i h` with the origin included.
/// The last node (and the first, for intervals) lies on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub grid_n: usize,
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64, grid_n: usize) -> Result<Self> {
        let d = DomainSpec {
            kind: DomainKind::Interval { a, b },
            grid_n,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn ball(radius: f64, dim: usize, grid_n: usize) -> Result<Self> {
        let d = DomainSpec {
            kind: DomainKind::Ball { radius, dim },
            grid_n,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < MIN_GRID_N {
            return Err(Error::InvalidDomain(format!(
                "grid_n = {} is below the minimum {MIN_GRID_N}",
                self.grid_n
            )));
        }
        match self.kind {
            DomainKind::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::InvalidDomain(format!("interval ({a}, {b}) needs a < b")));
                }
            }
            DomainKind::Ball { radius, dim } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidDomain(format!("radius {radius} must be > 0")));
                }
                if dim == 0 {
                    return Err(Error::InvalidDomain("ball dimension must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval { .. } => 1,
            DomainKind::Ball { dim, .. } => dim,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, DomainKind::Ball { .. })
    }

    pub fn radius(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Ball { radius, .. } => Some(radius),
            DomainKind::Interval { .. } => None,
        }
    }

    pub fn h(&self) -> f64 {
        let len = match self.kind {
            DomainKind::Interval { a, b } => b - a,
            DomainKind::Ball { radius, .. } => radius,
        };
        len / (self.grid_n - 1) as f64
    }

    /// Same domain, different resolution.
    pub fn with_grid(&self, grid_n: usize) -> Self {
        DomainSpec {
            kind: self.kind,
            grid_n,
        }
    }

    /// Coordinate of node `i` (signed position, or radius).
    pub fn node(&self, i: usize) -> f64 {
        let h = self.h();
        match self.kind {
            DomainKind::Interval { a, .. } => a + i as f64 * h,
            DomainKind::Ball { .. } => i as f64 * h,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.grid_n).map(|i| self.node(i)).collect()
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        match self.kind {
            DomainKind::Interval { .. } => i == 0 || i + 1 == self.grid_n,
            DomainKind::Ball { .. } => i + 1 == self.grid_n,
        }
    }

    /// Indices of the unknowns (nodes in the open domain).
    pub fn interior(&self) -> std::ops::Range<usize> {
        match self.kind {
            DomainKind::Interval { .. } => 1..self.grid_n - 1,
            DomainKind::Ball { .. } => 0..self.grid_n - 1,
        }
    }

    pub fn num_interior(&self) -> usize {
        self.interior().len()
    }

    /// Measure of the cell owned by each node; the cells tile the closed domain.
    pub fn cell_measures(&self) -> Vec<f64> {
        let h = self.h();
        let n = self.grid_n;
        match self.kind {
            DomainKind::Interval { .. } => (0..n).map(|i| if i == 0 || i + 1 == n { 0.5 * h } else { h }).collect(),
            DomainKind::Ball { radius, dim } => {
                let area = sphere_area(dim);
                let d = dim as f64;
                (0..n)
                    .map(|i| {
                        let r = i as f64 * h;
                        let lo = (r - 0.5 * h).max(0.0);
                        let hi = (r + 0.5 * h).min(radius);
                        area * (hi.powf(d) - lo.powf(d)) / d
                    })
                    .collect()
            }
        }
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { a, b } => b - a,
            DomainKind::Ball { radius, dim } => sphere_area(dim) * radius.powi(dim as i32) / dim as f64,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { a, b } => b - a,
            DomainKind::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Distance from a point (signed coordinate or radius) to the boundary; 0 outside.
    pub fn distance_to_boundary(&self, x: f64) -> f64 {
        match self.kind {
            DomainKind::Interval { a, b } => (x - a).min(b - x).max(0.0),
            DomainKind::Ball { radius, .. } => (radius - x.abs()).max(0.0),
        }
    }

    /// Whether `x` lies in the closed domain.
    pub fn contains(&self, x: f64) -> bool {
        match self.kind {
            DomainKind::Interval { a, b } => x >= a && x <= b,
            DomainKind::Ball { radius, .. } => x.abs() <= radius,
        }
    }
}

/// Nodal values on a [`DomainSpec`], including the boundary nodes.
///
/// Solutions of the Dirichlet problem vanish at the boundary nodes; potentials
/// evaluated on a bounding box need not. Outside the domain the function is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub domain: DomainSpec,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: DomainSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.grid_n {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                domain.grid_n
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("grid function value at node {i}")));
        }
        Ok(GridFunction { domain, values })
    }

    pub fn zeros(domain: DomainSpec) -> Self {
        GridFunction {
            values: vec![0.0; domain.grid_n],
            domain,
        }
    }

    /// Samples `f` at the nodes of the open domain; boundary nodes get 0.
    pub fn from_fn(domain: DomainSpec, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..domain.grid_n)
            .map(|i| if domain.is_boundary(i) { 0.0 } else { f(domain.node(i)) })
            .collect();
        GridFunction { domain, values }
    }

    /// Samples `f` at every node, boundary included.
    pub fn from_fn_closed(domain: DomainSpec, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..domain.grid_n).map(|i| f(domain.node(i))).collect();
        GridFunction { domain, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.domain.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.domain.nodes()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            domain: self.domain,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            domain: self.domain,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::GridMismatch("grid functions live on different grids".into()));
        }
        Ok(())
    }

    /// Boundary entries set to 0.
    pub fn with_zero_boundary(mut self) -> Self {
        for i in 0..self.values.len() {
            if self.domain.is_boundary(i) {
                self.values[i] = 0.0;
            }
        }
        self
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        (0..self.values.len())
            .filter(|&i| self.domain.is_boundary(i))
            .all(|i| self.values[i] == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Piecewise-linear interpolation; exactly 0 outside the closed domain.
    /// For radial grids `x` is a radius (its sign is ignored).
    pub fn evaluate(&self, x: f64) -> f64 {
        let d = &self.domain;
        let x = if d.is_radial() { x.abs() } else { x };
        if !d.contains(x) {
            return 0.0;
        }
        let t = (x - d.node(0)) / d.h();
        let k = (t.floor() as usize).min(d.grid_n - 2);
        let w = t - k as f64;
        (1.0 - w) * self.values[k] + w * self.values[k + 1]
    }
}

/// `d(x_i)` at every node.
pub fn boundary_distance(domain: &DomainSpec) -> GridFunction {
    GridFunction::from_fn_closed(*domain, |x| domain.distance_to_boundary(x)).with_zero_boundary()
}

/// `T_k(u)`: values clamped to `[-k, k]`.
pub fn truncate(u: &GridFunction, k: f64) -> Result<GridFunction> {
    check_level(k)?;
    Ok(u.map(|v| v.clamp(-k, k)))
}

/// `G_k(u) = u - T_k(u)`.
pub fn remainder(u: &GridFunction, k: f64) -> Result<GridFunction> {
    check_level(k)?;
    Ok(u.map(|v| v - v.clamp(-k, k)))
}

fn check_level(k: f64) -> Result<()> {
    if !(k > 0.0) || k.is_nan() {
        return Err(Error::InvalidParameter(format!("truncation level k = {k} must be > 0")));
    }
    Ok(())
}

/// Signed derivative `du/dx` (or `du/dr`), second order everywhere in the open domain.
///
/// Central differences at interior nodes, one-sided three-point stencils at the
/// nodes next to the boundary so that the boundary value is not differenced
/// across. The radial origin gets 0 by symmetry; boundary nodes get 0.
pub fn finite_derivative(u: &GridFunction) -> GridFunction {
    let d = &u.domain;
    let n = d.grid_n;
    let h = d.h();
    let v = &u.values;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = if !d.is_radial() && i == 1 {
            (-3.0 * v[1] + 4.0 * v[2] - v[3]) / (2.0 * h)
        } else if i == n - 2 {
            (3.0 * v[n - 2] - 4.0 * v[n - 3] + v[n - 4]) / (2.0 * h)
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * h)
        };
    }
    GridFunction {
        domain: *d,
        values: out,
    }
}

/// `|∇u|` at every node (see [`finite_derivative`]).
pub fn finite_gradient(u: &GridFunction) -> GridFunction {
    finite_derivative(u).map(f64::abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(n: usize) -> DomainSpec {
        DomainSpec::interval(-1.0, 1.0, n).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let d = interval(16);
        let mut u = GridFunction::zeros(d);
        u.values[3] = 3.0;
        u.values[4] = -3.0;
        let t = truncate(&u, 2.0).unwrap();
        let g = remainder(&u, 2.0).unwrap();
        assert_eq!(t.values[3], 2.0);
        assert_eq!(g.values[3], 1.0);
        assert_eq!(t.values[4], -2.0);
        assert!(truncate(&u, 0.0).is_err());
        assert!(remainder(&u, -1.0).is_err());
    }

    #[test]
    fn boundary_distance_examples() {
        let d = interval(21);
        let dist = boundary_distance(&d);
        assert!((dist.values[10] - 1.0).abs() < 1e-15);
        let b = DomainSpec::ball(1.0, 2, 11).unwrap_err();
        assert!(matches!(b, Error::InvalidDomain(_)));
        let b = DomainSpec::ball(1.0, 2, 101).unwrap();
        let dist = boundary_distance(&b);
        assert!((dist.values[30] - 0.7).abs() < 1e-14);
        for (i, &x) in dist.values.iter().enumerate() {
            assert!(x >= 0.0);
            assert_eq!(x == 0.0, b.is_boundary(i));
        }
    }

    #[test]
    fn gradient_exact_on_linears_and_quadratics() {
        let d = interval(33);
        let u = GridFunction::from_fn_closed(d, |x| x);
        let g = finite_derivative(&u);
        for i in d.interior() {
            assert!((g.values[i] - 1.0).abs() < 1e-12);
        }
        let u = GridFunction::from_fn_closed(d, |x| x * x);
        let g = finite_derivative(&u);
        for i in d.interior() {
            assert!((g.values[i] - 2.0 * d.node(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_bump_profile() {
        let alpha = 1.2;
        let mut errs = Vec::new();
        for n in [201, 401] {
            let d = DomainSpec::ball(1.0, 2, n).unwrap();
            let u = GridFunction::from_fn(d, |r| 1.0 - r.powf(alpha));
            let g = finite_gradient(&u);
            let mut err = 0.0f64;
            for i in d.interior() {
                let r = d.node(i);
                if (0.25..=0.9).contains(&r) {
                    err = err.max((g.values[i] - alpha * r.powf(alpha - 1.0)).abs());
                }
            }
            errs.push(err);
        }
        assert!(errs[0] < 1e-4);
        assert!(errs[0] / errs[1] > 3.5, "second order: {errs:?}");
    }

    #[test]
    fn cell_measures_tile_domain() {
        for d in [
            interval(40),
            DomainSpec::ball(1.5, 1, 40).unwrap(),
            DomainSpec::ball(1.5, 2, 40).unwrap(),
            DomainSpec::ball(1.5, 3, 40).unwrap(),
        ] {
            let total: f64 = d.cell_measures().iter().sum();
            assert!((total - d.measure()).abs() < 1e-12 * d.measure());
        }
    }

    #[test]
    fn evaluation_outside_is_zero() {
        let d = interval(16);
        let u = GridFunction::from_fn(d, |_| 1.0);
        assert_eq!(u.evaluate(1.5), 0.0);
        assert_eq!(u.evaluate(-1.0000001), 0.0);
        assert_eq!(u.evaluate(0.0), 1.0);
    }

    #[test]
    fn rejects_non_finite() {
        let d = interval(16);
        let mut v = vec![0.0; 16];
        v[2] = f64::NAN;
        assert!(GridFunction::new(d, v).is_err());
        assert!(GridFunction::new(d, vec![0.0; 15]).is_err());
    }
}
