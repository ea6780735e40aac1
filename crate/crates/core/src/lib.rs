//! Numerical solvers and verification harnesses for the stationary fractional
//! KPZ problem `(-Δ)^s u = |∇u|^q + λ f` in a bounded domain, `u = 0` outside.
//!
//! Domains are intervals or balls (radial functions). The fractional Laplacian is
//! discretized by singular-integral quadrature; Riesz potentials and the ball
//! Green function are available for the potential-based schemes.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod norms;
pub mod operators;
pub mod params;
pub mod quad;
pub mod solvers;
pub mod source;
pub mod special;
pub mod sphere;
pub mod supersolutions;

pub use error::{Error, Result};
pub use grid::{
    boundary_distance, finite_derivative, finite_gradient, remainder, truncate, DomainKind, DomainSpec, GridFunction,
};
pub use norms::{gagliardo_seminorm, lp_norm, weak_lp_norm};
pub use params::{critical_exponents, ExponentTable, ProblemParams, Regime};
pub use source::SourceSpec;
