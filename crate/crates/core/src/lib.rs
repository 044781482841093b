pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod special;
pub mod gram;
pub mod kernels;
pub mod polynomials;
pub mod scaling;
pub mod sampler;
pub mod verify;
pub mod cli;
