//! Experiments and file formats for the `maxprod` command-line harness.

pub mod chain;
pub mod config;
pub mod csvout;
pub mod denoise;
mod error;
pub mod fit;
pub mod grid;
pub mod lists;
pub mod matmul;
pub mod model;

pub use error::{BenchError, Result};
