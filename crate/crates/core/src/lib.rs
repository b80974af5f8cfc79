#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blcheck;
pub mod cli;
pub mod diophantine;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod harmonic;
pub mod lattice;
pub mod modelset;
pub mod patterns;
pub mod variance;
pub(crate) mod quad;

pub use error::{Error, Result};
