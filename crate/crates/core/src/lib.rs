pub mod bits;
pub mod circuit;
pub mod decoder;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod noise;
pub mod pauli;
pub mod sim;

pub use error::{Error, Result};
