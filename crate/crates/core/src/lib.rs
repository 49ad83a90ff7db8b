//! Cost-model laboratory for combinatorial Boolean matrix multiplication.

pub mod algorithms;
pub mod audit;
pub mod bits;
pub mod cli;
pub mod error;
pub mod hardgen;
pub mod io;
pub mod rng;
pub mod witness;

pub use error::{Error, Result};
