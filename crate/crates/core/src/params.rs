//! Problem parameters and the exponent algebra shared by every solver.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::DomainSpec;

/// Tolerance used to decide `q == 2s`.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Parameters of `(-Δ)^s u = |∇u|^q + λ f` in Ω, `u = 0` outside Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub s: f64,
    pub q: f64,
    pub lambda: f64,
    /// Integrability index of the forcing; `f64::INFINITY` for bounded data.
    #[serde(with = "crate::io::extended_f64")]
    pub m: f64,
    pub domain: DomainSpec,
}

impl ProblemParams {
    pub fn new(s: f64, q: f64, lambda: f64, m: f64, domain: DomainSpec) -> Result<Self> {
        let p = ProblemParams {
            dim: domain.dim(),
            s,
            q,
            lambda,
            m,
            domain,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if self.dim != self.domain.dim() {
            return Err(invalid(format!(
                "dimension {} does not match the domain dimension {}",
                self.dim,
                self.domain.dim()
            )));
        }
        if !(self.s > 0.5 && self.s < 1.0) {
            return Err(invalid(format!("s = {} must lie in (1/2, 1)", self.s)));
        }
        if !(self.q > 1.0) || !self.q.is_finite() {
            return Err(invalid(format!("q = {} must be a finite number > 1", self.q)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda = {} must be finite and >= 0", self.lambda)));
        }
        if !(self.m >= 1.0) {
            return Err(invalid(format!("m = {} must be >= 1", self.m)));
        }
        self.domain.validate()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        ProblemParams { lambda, ..self.clone() }
    }

    pub fn with_domain(&self, domain: DomainSpec) -> Self {
        ProblemParams { domain, ..self.clone() }
    }

    pub fn exponents(&self) -> ExponentTable {
        critical_exponents(self)
    }

    /// Conjugate exponent `q' = q/(q-1)`.
    pub fn q_conjugate(&self) -> f64 {
        self.q / (self.q - 1.0)
    }
}

/// Position of `q` relative to the thresholds `p_*` and `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `q < p_*`
    SubcriticalLow,
    /// `p_* <= q < 2s`
    Subcritical,
    /// `q = 2s`
    Critical,
    /// `q > 2s`
    Supercritical,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::SubcriticalLow => "SUBCRITICAL_LOW",
            Regime::Subcritical => "SUBCRITICAL",
            Regime::Critical => "CRITICAL",
            Regime::Supercritical => "SUPERCRITICAL",
        }
    }

    pub fn below_critical(&self) -> bool {
        matches!(self, Regime::SubcriticalLow | Regime::Subcritical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTable {
    /// `N/(N-2s+1)`
    pub p_star: f64,
    /// `2s`
    pub critical_q: f64,
    /// `mN/(N-m(2s-1))`, infinite once `m(2s-1) >= N`.
    #[serde(with = "crate::io::extended_f64")]
    pub regularity_cap: f64,
    /// `N/(N-m(2s-1))`, infinite once `m(2s-1) >= N`.
    #[serde(with = "crate::io::extended_f64")]
    pub alpha0: f64,
    pub regime: Regime,
}

/// Classify `q` and evaluate the derived exponents.
pub fn critical_exponents(params: &ProblemParams) -> ExponentTable {
    exponents_for(params.dim, params.s, params.q, params.m)
}

pub fn exponents_for(dim: usize, s: f64, q: f64, m: f64) -> ExponentTable {
    let n = dim as f64;
    let p_star = n / (n - 2.0 * s + 1.0);
    let critical_q = 2.0 * s;
    let gap = n - m * (2.0 * s - 1.0);
    let (regularity_cap, alpha0) = if gap > 0.0 && m.is_finite() {
        (m * n / gap, n / gap)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let regime = if (q - critical_q).abs() <= CRITICAL_TOLERANCE {
        Regime::Critical
    } else if q > critical_q {
        Regime::Supercritical
    } else if q < p_star {
        Regime::SubcriticalLow
    } else {
        Regime::Subcritical
    };
    ExponentTable {
        p_star,
        critical_q,
        regularity_cap,
        alpha0,
        regime,
    }
}
