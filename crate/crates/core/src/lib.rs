//! Imaginary-time expectations, partition functions and full spectra assembled
//! from overlaps of states propagated forward and backward in real time.

pub mod error;
pub mod model;
pub mod propagation;
pub mod assembly;
pub mod sampling;
pub mod analysis;
pub mod experiment;

pub use error::{ItqdeError, Result};
