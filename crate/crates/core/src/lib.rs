pub mod cli;
pub mod curve;
pub mod error;
pub mod fourier;
pub mod flow;
pub mod fuzz;
pub mod geometry;
pub mod io;
pub mod shrinker;
pub mod spectral;

pub use curve::ClosedCurve;
pub use error::{Error, Result};
