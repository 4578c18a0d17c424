pub mod catalog;
pub mod cli;
pub mod connections;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod tensor;
pub mod theorems;

pub use error::{Error, Result};
