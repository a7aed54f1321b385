pub mod abstraction;
pub mod asp;
pub mod bnb;
pub mod cli;
pub mod demo;
pub mod error;
pub mod lattice;
pub mod refine;
pub mod specanalysis;

#[cfg(test)]
mod testkit;

pub use error::{Error, Result};
