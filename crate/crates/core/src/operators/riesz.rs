use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{DomainKind, DomainSpec, GridFunction};
use crate::quad::{gauss_legendre, graded_panels};
use crate::sphere::angular_power;

/// Riesz potential `I_α g(x) = ∫ g(y) |x-y|^{α-N} dy` (no normalization constant)
/// for `g` piecewise linear on the closed domain and zero outside.
#[derive(Debug, Clone)]
pub struct RieszKernel {
    pub domain: DomainSpec,
    pub alpha: f64,
    /// `grid_n × grid_n`, acting on all nodal values.
    pub matrix: DMatrix<f64>,
}

impl RieszKernel {
    pub fn build(domain: &DomainSpec, alpha: f64) -> Result<Self> {
        domain.validate()?;
        let dim = domain.dim();
        if !(alpha > 0.0 && alpha < dim as f64) {
            return Err(invalid(format!("Riesz order alpha = {alpha} must lie in (0, {dim})")));
        }
        let n = domain.grid_n;
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| riesz_row(domain, alpha, i)).collect();
        Ok(RieszKernel {
            domain: *domain,
            alpha,
            matrix: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        })
    }

    pub fn apply_values(&self, g: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(g)).as_slice().to_vec()
    }

    pub fn apply(&self, g: &GridFunction) -> Result<GridFunction> {
        if g.domain != self.domain {
            return Err(Error::GridMismatch("Riesz kernel and data grids differ".into()));
        }
        Ok(GridFunction {
            domain: self.domain,
            values: self.apply_values(&g.values),
        })
    }
}

/// `I_α g` at every node of `g`'s grid.
pub fn riesz_apply(g: &GridFunction, alpha: f64) -> Result<GridFunction> {
    RieszKernel::build(&g.domain, alpha)?.apply(g)
}

fn riesz_row(domain: &DomainSpec, alpha: f64, i: usize) -> Vec<f64> {
    match domain.kind {
        DomainKind::Interval { .. } => interval_row(domain, alpha, i),
        DomainKind::Ball { .. } => radial_row(domain, alpha, i),
    }
}

/// `∫_0^1 (1-v)|k + σv|^{α-1} dv` in units of `h`.
fn half_hat(k: f64, sigma: f64, alpha: f64) -> f64 {
    if k == 0.0 {
        return 1.0 / alpha - 1.0 / (alpha + 1.0);
    }
    if k.abs() == 1.0 && sigma == -k.signum() {
        return 1.0 / (alpha + 1.0);
    }
    gauss_legendre(16).integrate(0.0, 1.0, |v| (1.0 - v) * (k + sigma * v).abs().powf(alpha - 1.0))
}

fn interval_row(domain: &DomainSpec, alpha: f64, i: usize) -> Vec<f64> {
    let n = domain.grid_n;
    let scale = domain.h().powf(alpha);
    (0..n)
        .map(|j| {
            let k = j as f64 - i as f64;
            let mut w = 0.0;
            if j > 0 {
                w += half_hat(k, -1.0, alpha);
            }
            if j + 1 < n {
                w += half_hat(k, 1.0, alpha);
            }
            scale * w
        })
        .collect()
}

fn radial_row(domain: &DomainSpec, alpha: f64, i: usize) -> Vec<f64> {
    let n = domain.grid_n;
    let h = domain.h();
    let dim = domain.dim();
    let nd = dim as f64;
    let p = nd - alpha;
    let r = domain.node(i);
    let mut row = vec![0.0; n];
    let kern = |t: f64| t.powf(nd - 1.0) * angular_power(dim, r, t, p, 0.0);
    for k in 0..n - 1 {
        let (t0, t1) = (domain.node(k), domain.node(k + 1));
        let mut add = |t: f64, w: f64| {
            let lam = (t - t0) / h;
            let v = kern(t) * w;
            row[k] += v * (1.0 - lam);
            row[k + 1] += v * lam;
        };
        if k == i || k + 1 == i {
            // |t - r|^{α-1} at the end t = r; y = v^{1/α} absorbs it into the Jacobian.
            let (end, sign) = if k == i { (t0, 1.0) } else { (t1, -1.0) };
            let rule = gauss_legendre(12);
            for (a, b) in graded_panels(0.0, 1.0, 1e-4) {
                for (v, w) in rule.mapped(a, b) {
                    let y = v.powf(1.0 / alpha);
                    let jac = h * y / (alpha * v);
                    add(end + sign * h * y, w * jac);
                }
            }
        } else {
            let order = if k + 3 >= i && k <= i + 3 { 10 } else { 5 };
            for (t, w) in gauss_legendre(order).mapped(t0, t1) {
                add(t, w);
            }
        }
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_graded;
    use crate::special::sphere_area;

    #[test]
    fn rejects_bad_order() {
        let d = DomainSpec::ball(1.0, 2, 32).unwrap();
        assert!(RieszKernel::build(&d, 0.0).is_err());
        assert!(RieszKernel::build(&d, 2.0).is_err());
    }

    #[test]
    fn constant_at_center_of_ball() {
        // I_α 1_{B_R}(0) = |S^{N-1}| R^α / α.
        for (dim, alpha) in [(2usize, 0.5), (2, 1.5), (3, 1.5), (3, 0.5)] {
            let d = DomainSpec::ball(1.0, dim, 65).unwrap();
            let g = GridFunction::from_fn_closed(d, |_| 1.0);
            let v = riesz_apply(&g, alpha).unwrap();
            let exact = sphere_area(dim) / alpha;
            assert!(
                (v.values[0] / exact - 1.0).abs() < 1e-8,
                "{dim} {alpha}: {}",
                v.values[0]
            );
        }
    }

    #[test]
    fn interval_constant_closed_form() {
        // ∫_{-1}^{1} |x-y|^{α-1} dy = ((1+x)^α + (1-x)^α)/α.
        let alpha = 0.5;
        let d = DomainSpec::interval(-1.0, 1.0, 41).unwrap();
        let g = GridFunction::from_fn_closed(d, |_| 1.0);
        let v = riesz_apply(&g, alpha).unwrap();
        for (i, x) in d.nodes().into_iter().enumerate() {
            let exact = ((1.0 + x).powf(alpha) + (1.0 - x).powf(alpha)) / alpha;
            assert!((v.values[i] - exact).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn radial_unit_ball_potential() {
        // N = 3: ∫_{B_1} |x-y|^{α-3} dy in closed form via shells.
        let (dim, alpha) = (3usize, 1.5);
        let d = DomainSpec::ball(1.0, dim, 129).unwrap();
        let g = GridFunction::from_fn_closed(d, |_| 1.0);
        let v = riesz_apply(&g, alpha).unwrap();
        let exact = |r: f64| {
            let f = |t: f64| t * t * angular_power(3, r, t, 3.0 - alpha, 0.0);
            integrate_graded(0.0, r, 1e-9, 12, |y| f(r - y)) + integrate_graded(r, 1.0, 1e-9, 12, f)
        };
        for i in [10, 64, 100] {
            let r = d.node(i);
            let e = exact(r);
            assert!((v.values[i] / e - 1.0).abs() < 1e-4, "{r}: {} vs {e}", v.values[i]);
        }
    }
}
