pub mod assembly;
pub mod basis;
pub mod bench;
pub mod bc;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod splinecore;

pub use error::{Error, Result};
