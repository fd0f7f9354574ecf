pub mod decayfit;
pub mod error;
pub mod evolution;
pub mod numerics;
pub mod potential;
pub mod scattering;
pub mod semiclassical;
pub mod timedomain;

pub use error::{Error, NumericsError, Result};
