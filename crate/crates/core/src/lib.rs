//! Spectral solver for ultraslow (distributed-order) subdiffusion on an interval.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod kernel;
pub mod oracle;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod verify;
pub mod weight;

pub use error::{Error, Result};
