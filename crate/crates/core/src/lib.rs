//! Fiber integrals, oscillating integrals and Mellin continuation for real
//! polynomial phases with an isolated singularity at the origin, and an exact
//! model of the real cycles in the Milnor fiber of monomial phases.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asympt;
pub mod cli;
pub mod cyclotomic;
pub mod error;
pub mod fiber;
pub mod fit;
pub mod mellin;
pub mod milnor1d;
pub mod model;
pub mod poly;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
