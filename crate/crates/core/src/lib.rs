mod error;
pub mod cylinders;
pub mod bounds;
pub mod counting;
pub mod mixing;
pub mod dynamics;
pub mod fit;
pub mod rng;
pub mod stein;

pub use error::{Error, Result};
