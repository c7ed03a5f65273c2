pub mod cli;
pub mod config;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod traces;
pub mod verify;

pub use error::{Error, Result};
