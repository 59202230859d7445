pub mod cli;
pub mod defaults;
pub mod env;
pub mod eval;
pub mod error;
pub mod human;
pub mod optimizer;
pub mod physics;
pub mod policy;
pub mod seed;

pub use error::{Error, Result};
