//! Discrete L^p, weak-L^p and Gagliardo norms of grid functions.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::grid::{DomainKind, DomainSpec, GridFunction};
use crate::quad::integrate_graded;
use crate::special::sphere_area;
use crate::sphere::angular_power;

/// Pairwise summation; deterministic and accurate for long vectors.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(invalid(format!("norm exponent p = {p} must be >= 1")));
    }
    Ok(())
}

/// `(Σ |u_i|^p μ_i)^{1/p}`; `p = ∞` gives the max norm.
pub fn lp_norm(u: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_norm_values(&u.values, &u.domain.cell_measures(), p))
}

pub fn lp_norm_values(values: &[f64], measures: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let terms: Vec<f64> = values.iter().zip(measures).map(|(v, m)| v.abs().powf(p) * m).collect();
    pairwise_sum(&terms).powf(1.0 / p)
}

/// `sup_t t |{|u| > t}|^{1/p}` over the discrete level sets.
pub fn weak_lp_norm(u: &GridFunction, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(weak_lp_values(&u.values, &u.domain.cell_measures(), p))
}

pub fn weak_lp_values(values: &[f64], measures: &[f64], p: f64) -> f64 {
    let mut pairs: Vec<(f64, f64)> = values.iter().map(|v| v.abs()).zip(measures.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    let mut best = 0.0f64;
    for (v, m) in pairs {
        acc += m;
        if p.is_infinite() {
            best = best.max(v);
        } else {
            best = best.max(v * acc.powf(1.0 / p));
        }
    }
    best
}

/// Matrix `A` of the Gagliardo form on all nodes: `[u]²_{H^s(R^N)} ≈ uᵀ A u`
/// for `u` extended by zero outside the domain.
pub fn gagliardo_form(domain: &DomainSpec, s: f64) -> nalgebra::DMatrix<f64> {
    let n = domain.grid_n;
    let mu = domain.cell_measures();
    let nodes = domain.nodes();
    let dim = domain.dim();
    let p = dim as f64 + 2.0 * s;
    let area = sphere_area(dim);
    let kernel = |i: usize, j: usize| -> f64 {
        match domain.kind {
            DomainKind::Interval { .. } => (nodes[i] - nodes[j]).abs().powf(-p),
            DomainKind::Ball { .. } => angular_power(dim, nodes[i], nodes[j], p, 0.0) / area,
        }
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { kernel(i, j) }).collect())
        .collect();
    let ext = exterior_masses(domain, s);
    let mut a = nalgebra::DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 2.0 * ext[i] * mu[i];
        for j in 0..n {
            if i != j {
                let k = 0.5 * (rows[i][j] + rows[j][i]) * mu[i] * mu[j];
                a[(i, j)] = -2.0 * k;
                diag += 2.0 * k;
            }
        }
        a[(i, i)] = diag;
    }
    a
}

/// `∫_{R^N \ Ω} |x_i - y|^{-N-2s} dy` at every node (infinite at boundary nodes, reported as 0).
pub fn exterior_masses(domain: &DomainSpec, s: f64) -> Vec<f64> {
    let two_s = 2.0 * s;
    match domain.kind {
        DomainKind::Interval { a, b } => domain
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if domain.is_boundary(i) {
                    0.0
                } else {
                    ((x - a).powf(-two_s) + (b - x).powf(-two_s)) / two_s
                }
            })
            .collect(),
        DomainKind::Ball { radius, dim } => {
            let p = dim as f64 + two_s;
            let far = 64.0 * radius;
            (0..domain.grid_n)
                .into_par_iter()
                .map(|i| {
                    if domain.is_boundary(i) {
                        return 0.0;
                    }
                    let r = domain.node(i);
                    let near = integrate_graded(radius, far, 0.5 * (radius - r), 10, |t| {
                        t.powf(dim as f64 - 1.0) * angular_power(dim, r, t, p, 0.0)
                    });
                    near + sphere_area(dim) * far.powf(-two_s) / two_s
                })
                .collect()
        }
    }
}

/// Gagliardo seminorm `[u]_{H^s(R^N)}` of `u` extended by zero.
pub fn gagliardo_seminorm(u: &GridFunction, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("s = {s} must lie in (0, 1)")));
    }
    let a = gagliardo_form(&u.domain, s);
    let v = nalgebra::DVector::from_column_slice(&u.values);
    let q = v.dot(&(&a * &v));
    Ok(q.max(0.0).sqrt())
}
