pub mod amplitude;
pub mod cli;
pub mod coeffnet;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod operators;
pub mod problems;
pub mod spectral_basis;

pub use error::{Error, Result};
