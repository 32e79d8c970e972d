//! Low-frequency internal thermal noise of a mirror coated on a plano-convex
//! substrate, read out by a Gaussian beam.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod hermite;
pub mod modes;
pub mod overlap;
pub mod quadrature;
pub mod susceptibility;
pub mod sweep;

pub use error::{Error, Result};
