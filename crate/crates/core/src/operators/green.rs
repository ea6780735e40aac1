use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DomainKind, DomainSpec, GridFunction};
use crate::params::ProblemParams;
use crate::quad::{gauss_legendre, graded_panels};
use crate::special::{getoor_constant, sphere_area};
use crate::sphere::angular_integral;

const Y_MIN: f64 = -60.0;
const Y_MAX: f64 = 60.0;
const Y_STEP: f64 = 0.01;

/// `J(z) = ∫_0^z t^{s-1}(1+t)^{-N/2} dt`, tabulated in `ln z` with cubic Hermite interpolation.
#[derive(Debug, Clone)]
struct ProfileTable {
    s: f64,
    half_n: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl ProfileTable {
    fn new(dim: usize, s: f64) -> Self {
        let half_n = 0.5 * dim as f64;
        let m = ((Y_MAX - Y_MIN) / Y_STEP).round() as usize + 1;
        let dj = |y: f64| {
            let z = y.exp();
            z.powf(s) * (1.0 + z).powf(-half_n)
        };
        let rule = gauss_legendre(10);
        let mut values = Vec::with_capacity(m);
        let z0 = Y_MIN.exp();
        let mut acc = z0.powf(s) / s * (1.0 - half_n * s / (s + 1.0) * z0);
        values.push(acc);
        for k in 1..m {
            let a = Y_MIN + (k - 1) as f64 * Y_STEP;
            acc += rule.integrate(a, a + Y_STEP, dj);
            values.push(acc);
        }
        let slopes = (0..m).map(|k| dj(Y_MIN + k as f64 * Y_STEP)).collect();
        ProfileTable {
            s,
            half_n,
            values,
            slopes,
        }
    }

    fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if z.is_infinite() {
            return f64::INFINITY;
        }
        let y = z.ln();
        if y < Y_MIN {
            return z.powf(self.s) / self.s;
        }
        let last = self.values.len() - 1;
        if y >= Y_MAX {
            let c = self.s - self.half_n;
            let zmax = Y_MAX.exp();
            return self.values[last] + (z.powf(c) - zmax.powf(c)) / c;
        }
        let u = (y - Y_MIN) / Y_STEP;
        let k = (u.floor() as usize).min(last - 1);
        let t = u - k as f64;
        let (p0, p1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * Y_STEP, self.slopes[k + 1] * Y_STEP);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1
    }
}

/// Green function of `(-Δ)^s` in a ball with zero exterior data,
/// `G(x,y) = κ |x-y|^{2s-N} J(z)`, `z = (R²-|x|²)(R²-|y|²)/(R²|x-y|²)`.
#[derive(Debug, Clone)]
pub struct BallGreenKernel {
    pub domain: DomainSpec,
    pub s: f64,
    pub radius: f64,
    /// Fitted so that the discrete solve reproduces `(R²-|x|²)^s` for Getoor data.
    pub kappa: f64,
    /// Spherically integrated kernel `Ḡ(r_i, r_j) = ∫_{S^{N-1}} G(r_i e₁, r_j ω) dω` at the nodes (including κ).
    /// Infinite at the origin pair when `N ≥ 2`.
    pub kernel: DMatrix<f64>,
    /// Quadrature weights: `v_i = Σ_j weights[(i,j)] f_j` (without κ).
    weights: DMatrix<f64>,
    table: ProfileTable,
}

impl BallGreenKernel {
    pub fn build(domain: &DomainSpec, s: f64) -> Result<Self> {
        let (radius, dim) = match domain.kind {
            DomainKind::Ball { radius, dim } => (radius, dim),
            DomainKind::Interval { .. } => {
                return Err(Error::Unsupported(
                    "the closed-form Green kernel needs a ball grid; use the dense solve on intervals".into(),
                ))
            }
        };
        if !(s > 0.5 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("s = {s} must lie in (1/2, 1)")));
        }
        let table = ProfileTable::new(dim, s);
        let mut k = BallGreenKernel {
            domain: *domain,
            s,
            radius,
            kappa: 1.0,
            kernel: DMatrix::zeros(0, 0),
            weights: DMatrix::zeros(0, 0),
            table,
        };
        let n = domain.grid_n;
        let nodes = domain.nodes();
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| if j < i { 0.0 } else { k.radial(nodes[i], nodes[j]) })
                    .collect()
            })
            .collect();
        let nodal = DMatrix::from_fn(n, n, |i, j| if j >= i { upper[i][j] } else { upper[j][i] });
        let area = sphere_area(dim);
        let cell: Vec<f64> = domain.cell_measures().iter().map(|m| m / area).collect();
        let near: Vec<[f64; 3]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut out = [0.0; 3];
                for (slot, off) in [-1i64, 0, 1].into_iter().enumerate() {
                    let j = i as i64 + off;
                    if j >= 0 && (j as usize) < n {
                        out[slot] = k.cell_integral(i, j as usize);
                    }
                }
                out
            })
            .collect();
        let weights = DMatrix::from_fn(n, n, |i, j| {
            if domain.is_boundary(i) || domain.is_boundary(j) {
                0.0
            } else if i.abs_diff(j) <= 1 {
                near[i][j + 1 - i]
            } else {
                nodal[(i, j)] * cell[j]
            }
        });
        k.weights = weights;
        // Pin κ against the Getoor identity.
        let lam = getoor_constant(dim, s);
        let rhs = DVector::from_element(n, lam);
        let v = &k.weights * rhs;
        let (mut num, mut den) = (0.0, 0.0);
        for i in domain.interior() {
            let r = nodes[i];
            let target = (radius * radius - r * r).powf(s);
            num += target * v[i];
            den += v[i] * v[i];
        }
        k.kappa = num / den;
        k.kernel = nodal * k.kappa;
        Ok(k)
    }

    /// `|x-y|^{2s-N} J(z)` for points at radii `rx`, `ry` and distance `l` (κ not applied).
    fn profile(&self, rx: f64, ry: f64, l: f64) -> f64 {
        let r2 = self.radius * self.radius;
        let num = (r2 - rx * rx).max(0.0) * (r2 - ry * ry).max(0.0);
        if num == 0.0 {
            return 0.0;
        }
        let dim = self.domain.dim() as f64;
        if l == 0.0 {
            // Only finite when 2s > N, i.e. N = 1.
            let c = self.s - 0.5 * dim;
            return if c > 0.0 { (num / r2).powf(c) / c } else { f64::INFINITY };
        }
        let z = num / (r2 * l * l);
        l.powf(2.0 * self.s - dim) * self.table.eval(z)
    }

    /// Pointwise `G(x, y)` for points of `R^N`.
    pub fn green(&self, x: &[f64], y: &[f64]) -> f64 {
        let rx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ry = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let l = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.kappa * self.profile(rx, ry, l)
    }

    /// `∫_{S^{N-1}} G(r e₁, t ω) dω` without κ.
    fn radial(&self, r: f64, t: f64) -> f64 {
        let dim = self.domain.dim();
        if dim == 1 {
            return self.profile(r, t, (r - t).abs()) + self.profile(r, t, r + t);
        }
        if r == 0.0 && t == 0.0 {
            return f64::INFINITY;
        }
        angular_integral(dim, r, t, 0.0, |l| self.profile(r, t, l), None)
    }

    /// `∫_{cell_j} Ḡ(r_i, t) t^{N-1} dt` with panels graded towards `r_i`.
    fn cell_integral(&self, i: usize, j: usize) -> f64 {
        let d = &self.domain;
        let h = d.h();
        let r = d.node(i);
        let lo = (d.node(j) - 0.5 * h).max(0.0);
        let hi = (d.node(j) + 0.5 * h).min(self.radius);
        let nd = d.dim() as f64;
        let rule = gauss_legendre(8);
        let mut acc = 0.0;
        let mut piece = |a: f64, b: f64, toward_a: bool| {
            if b <= a {
                return;
            }
            for (pa, pb) in graded_panels(0.0, b - a, 1e-7 * h) {
                for (y, w) in rule.mapped(pa, pb) {
                    let t = if toward_a { a + y } else { b - y };
                    acc += w * self.radial(r, t) * t.powf(nd - 1.0);
                }
            }
        };
        if r > lo && r < hi {
            piece(lo, r, false);
            piece(r, hi, true);
        } else if r <= lo {
            piece(lo, hi, true);
        } else {
            piece(lo, hi, false);
        }
        acc
    }

    /// `v(x_i) = Σ_j G(x_i, y_j) f(y_j) w_j`; zero at the boundary node.
    pub fn solve(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.domain != self.domain {
            return Err(Error::GridMismatch("Green kernel and data grids differ".into()));
        }
        let v = &self.weights * DVector::from_column_slice(&f.values) * self.kappa;
        Ok(GridFunction {
            domain: self.domain,
            values: v.as_slice().to_vec(),
        })
    }

    /// Solution operator as a dense matrix on the unknowns (κ applied).
    pub fn solution_matrix(&self) -> DMatrix<f64> {
        let idx = self.domain.interior();
        self.weights.view((idx.start, idx.start), (idx.len(), idx.len())) * self.kappa
    }
}

pub fn ball_green_build(params: &ProblemParams) -> Result<BallGreenKernel> {
    BallGreenKernel::build(&params.domain, params.s)
}

pub fn green_solve(kernel: &BallGreenKernel, f: &GridFunction) -> Result<GridFunction> {
    kernel.solve(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::green_constant_reference;

    #[test]
    fn profile_table_accuracy() {
        let t = ProfileTable::new(2, 0.75);
        for z in [1e-3, 0.37, 1.0, 7.5, 300.0] {
            // t = z v^{1/s} removes the endpoint singularity.
            let exact = crate::quad::integrate_graded(0.0, 1.0, 1e-3, 16, |v| {
                let tt = z * v.powf(1.0 / 0.75);
                z.powf(0.75) / 0.75 / (1.0 + tt)
            });
            assert!((t.eval(z) / exact - 1.0).abs() < 1e-9, "{z}: {} {exact}", t.eval(z));
        }
    }

    #[test]
    fn symmetric_positive_and_vanishing_on_boundary() {
        let d = DomainSpec::ball(1.0, 2, 64).unwrap();
        let g = BallGreenKernel::build(&d, 0.75).unwrap();
        let n = d.grid_n;
        for i in 0..n {
            for j in 0..n {
                let a = g.kernel[(i, j)];
                assert!(i + j == 0 || (a - g.kernel[(j, i)]).abs() <= 1e-10 * a.abs().max(1e-300));
                if i == 0 && j == 0 {
                    assert!(a.is_infinite());
                } else if d.is_boundary(i) || d.is_boundary(j) {
                    assert_eq!(a, 0.0);
                } else {
                    assert!(a > 0.0);
                }
            }
        }
        let x = [0.3, -0.2];
        let y = [-0.5, 0.1];
        assert!((g.green(&x, &y) - g.green(&y, &x)).abs() < 1e-14);
    }

    #[test]
    fn getoor_reproduction_and_kappa() {
        let d = DomainSpec::ball(1.0, 2, 256).unwrap();
        let g = BallGreenKernel::build(&d, 0.75).unwrap();
        let f = GridFunction::from_fn(d, |_| getoor_constant(2, 0.75));
        let v = g.solve(&f).unwrap();
        let mut err = 0.0f64;
        for i in d.interior() {
            let r = d.node(i);
            err = err.max((v.values[i] / (1.0 - r * r).powf(0.75) - 1.0).abs());
        }
        assert!(err < 2e-2, "{err}");
        let reference = green_constant_reference(2, 0.75);
        assert!((g.kappa / reference - 1.0).abs() < 1e-2, "{} vs {reference}", g.kappa);
    }

    #[test]
    fn zero_data() {
        let d = DomainSpec::ball(1.0, 3, 32).unwrap();
        let g = BallGreenKernel::build(&d, 0.75).unwrap();
        let v = g.solve(&GridFunction::zeros(d)).unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
    }
}
