//! Exact cohomology of stable spherical bundles on K3 surfaces of Picard rank one.
//!
//! The working object is walked from the Gieseker chamber down to the
//! Brill-Noether point along the line `s = 0+`, resolving its Harder-Narasimhan
//! filtration at every wall. All arithmetic is exact.

pub mod brillnoether;
pub mod error;
pub mod filtration;
pub mod mukai;
pub mod rank2;
pub mod reduction;
pub mod walls;

pub use error::Error;
pub use mukai::{MukaiVector, Surface};
