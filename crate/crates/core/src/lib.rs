//! Numerical laboratory for two-weight inequalities of the Hardy–Littlewood
//! maximal operator: weights, Banach function space averages, maximal
//! operators over cube families, weight-condition estimators and sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod conditions;
pub mod experiments;
pub mod func;
pub mod geometry;
pub mod maximal;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
