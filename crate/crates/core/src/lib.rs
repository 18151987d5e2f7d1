//! Heat and Poisson semigroups on the torus `T^d = [0, 2π)^d`, built on the
//! Jacobi theta kernel, together with a coefficient-space engine for periodic
//! ultra-distributions.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coeffs;
pub mod error;
pub mod fourier;
pub mod io;
pub mod quadrature;
pub mod semigroup;
pub mod suite;
pub mod theta;
pub mod ultradist;

pub use coeffs::{CoefficientSequence, Rule};
pub use error::{Error, Result};
pub use fourier::{PeriodicGrid, SampledFunction};
