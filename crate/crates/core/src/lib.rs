//! Weak Riemannian metrics on diffeological spaces.

pub mod bump;
pub mod catalog;
pub mod cli;
pub mod constructions;
pub mod distance;
pub mod error;
pub mod linalg;
pub mod mapping;
pub mod metric;
pub mod quadrature;
pub mod reproduce;
pub mod sampling;
pub mod scene;
pub mod space;

pub use error::{Error, Result};
