//! Operator assembly: geometric factors, sum-factorized kernels, global
//! operators for every method.

mod cost;
mod discretization;
mod factors;
pub mod kernels;
mod neumann;

pub use cost::op_count;
pub use discretization::*;
pub use factors::{geometric_factors, FactorMode, GeometricFactors};
pub use neumann::{conormal_row, neumann_rhs};

#[cfg(test)]
mod tests;
