//! Forcing terms `f`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{DomainSpec, GridFunction};
use crate::norms::lp_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Constant {
        value: f64,
    },
    /// `|x|^{-theta}`
    Power {
        theta: f64,
    },
    /// Indicator of `{|x| < radius}`.
    Indicator {
        radius: f64,
    },
    /// Piecewise-linear interpolation of `(x, value)` samples in `|x|`, 0 beyond the last sample.
    Tabulated {
        x: Vec<f64>,
        values: Vec<f64>,
    },
}

impl SourceSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            SourceSpec::Constant { value } if !value.is_finite() => Err(invalid("constant source must be finite")),
            SourceSpec::Power { theta } if !(*theta >= 0.0 && *theta < dim as f64) => Err(invalid(format!(
                "power source exponent theta = {theta} must lie in [0, N) for local integrability"
            ))),
            SourceSpec::Indicator { radius } if !(*radius > 0.0) => Err(invalid("indicator radius must be > 0")),
            SourceSpec::Tabulated { x, values } => {
                if x.len() != values.len() || x.len() < 2 {
                    return Err(invalid("tabulated source needs matching x/values with >= 2 samples"));
                }
                if x.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(invalid("tabulated source abscissae must increase"));
                }
                if values.iter().chain(x.iter()).any(|v| !v.is_finite()) {
                    return Err(invalid("tabulated source must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Pointwise value at signed coordinate or radius `x` (infinite at 0 for powers).
    pub fn eval(&self, x: f64) -> f64 {
        let r = x.abs();
        match self {
            SourceSpec::Constant { value } => *value,
            SourceSpec::Power { theta } => r.powf(-theta),
            SourceSpec::Indicator { radius } => {
                if r < *radius {
                    1.0
                } else {
                    0.0
                }
            }
            SourceSpec::Tabulated { x, values } => {
                if r <= x[0] {
                    return values[0];
                }
                if r > x[x.len() - 1] {
                    return 0.0;
                }
                let k = x.partition_point(|&t| t < r).max(1);
                let w = (r - x[k - 1]) / (x[k] - x[k - 1]);
                (1.0 - w) * values[k - 1] + w * values[k]
            }
        }
    }

    /// Nodal samples on the open domain, zero at boundary nodes. A power singularity
    /// sitting on a node is replaced by its average over that node's cell.
    pub fn on_grid(&self, domain: &DomainSpec) -> GridFunction {
        let h = domain.h();
        let dim = domain.dim() as f64;
        GridFunction::from_fn(*domain, |x| match self {
            SourceSpec::Power { theta } if x.abs() < 1e-12 * h => dim / (dim - theta) * (0.5 * h).powf(-theta),
            _ => self.eval(x),
        })
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            SourceSpec::Constant { value } => *value >= 0.0,
            SourceSpec::Tabulated { values, .. } => values.iter().all(|&v| v >= 0.0),
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SourceSpec::Constant { value } => *value == 0.0,
            SourceSpec::Tabulated { values, .. } => values.iter().all(|&v| v == 0.0),
            _ => false,
        }
    }

    /// Discrete `L^m(Ω)` norm of the nodal samples.
    pub fn lm_norm(&self, domain: &DomainSpec, m: f64) -> Result<f64> {
        lp_norm(&self.on_grid(domain), m)
    }
}
