//! NURBS surfaces, their differential geometry, and the benchmark shapes.

mod builders;
mod io;
mod surface;

pub use builders::*;
pub use io::*;
pub use surface::*;
