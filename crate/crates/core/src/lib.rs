pub mod cli;
pub mod companion;
pub mod error;
pub mod factorizer;
pub mod harness;
pub mod module_space;
pub mod numerics;
pub mod operator_algebra;
pub mod selftest;

pub use error::{Error, Result};
