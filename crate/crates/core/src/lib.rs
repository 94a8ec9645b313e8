pub mod chaos;
pub mod cli;
pub mod distances;
pub mod error;
pub mod experiments;
pub mod free;
pub mod gaussproc;
pub mod hermite;
pub mod kernels;
pub mod numeric;
pub mod rng;
pub mod stats;
pub mod stein;

pub use error::{Error, Result};
