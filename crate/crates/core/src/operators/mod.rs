//! Discrete fractional Laplacian, Riesz potentials, ball Green function and the
//! drift operator.

mod drift;
mod fraclap;
mod green;
mod periodic;
mod reduced;
mod riesz;

pub use drift::{derivative_matrix, drift_apply, drift_matrix};
pub use fraclap::{fraclap_direct, fraclap_radial, normalization_constant, FracLapMatrix};
pub use green::{ball_green_build, green_solve, BallGreenKernel};
pub use periodic::fraclap_periodic;
pub use reduced::{exterior_tail, fraclap_radial_reduced, reduced_kernel, reduced_weight};
pub use riesz::{riesz_apply, RieszKernel};
