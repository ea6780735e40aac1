use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{finite_derivative, DomainSpec, GridFunction};
use crate::params::ProblemParams;

use super::fraclap::FracLapMatrix;

/// Matrix of [`finite_derivative`] restricted to the unknowns (boundary values zero).
pub fn derivative_matrix(domain: &DomainSpec) -> DMatrix<f64> {
    let n = domain.grid_n;
    let idx = domain.interior();
    let m = idx.len();
    let off = idx.start;
    let mut d = DMatrix::zeros(m, m);
    let h = domain.h();
    let mut put = |row: usize, col: usize, v: f64| {
        if col >= off && col < off + m {
            d[(row - off, col - off)] += v / (2.0 * h);
        }
    };
    for i in idx.clone() {
        if !domain.is_radial() && i == 1 {
            put(i, 1, -3.0);
            put(i, 2, 4.0);
            put(i, 3, -1.0);
        } else if i == n - 2 {
            put(i, n - 2, 3.0);
            put(i, n - 3, -4.0);
            put(i, n - 4, 1.0);
        } else if i > 0 {
            put(i, i + 1, 1.0);
            put(i, i - 1, -1.0);
        }
    }
    d
}

/// Matrix of `w ↦ (-Δ)^s w - B ∂w` on the unknowns.
///
/// On intervals and for radial fields `B` is the (radial) component, so `B·∇w = B ∂_r w`.
pub fn drift_matrix(op: &FracLapMatrix, b: &GridFunction) -> Result<DMatrix<f64>> {
    if b.domain != op.domain {
        return Err(Error::GridMismatch("drift field and operator grids differ".into()));
    }
    if b.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("drift field must be bounded".into()));
    }
    let idx = op.domain.interior();
    let mut m = derivative_matrix(&op.domain);
    for (row, i) in idx.enumerate() {
        let bi = b.values[i];
        m.row_mut(row).scale_mut(-bi);
    }
    Ok(&op.matrix + m)
}

pub fn drift_apply(u: &GridFunction, b: &GridFunction, params: &ProblemParams) -> Result<GridFunction> {
    u.check_same_grid(b)?;
    let op = FracLapMatrix::for_params(params)?;
    let lu = op.apply(u)?;
    let du = finite_derivative(u);
    let mut out = lu;
    for i in params.domain.interior() {
        out.values[i] -= b.values[i] * du.values[i];
    }
    Ok(out)
}
