pub mod cli;
pub mod constructions;
pub mod document;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod model;
pub mod search;
pub mod states;

#[cfg(test)]
mod testing;

pub use error::{Error, Result};
