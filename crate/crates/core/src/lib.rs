pub mod bounds;
pub mod cli;
pub mod error;
pub mod gf2;
pub mod graphs;
pub mod mesh;
pub mod polarcode;

pub use error::{Error, Result};
