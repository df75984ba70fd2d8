#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical criteria for Lipschitz images of Euclidean sets in metric
//! spaces to have vanishing k-dimensional Hausdorff measure, with
//! experiments for Euclidean, `ℓ∞`, Heisenberg and Carnot–Carathéodory
//! targets.

pub mod cc_spaces;
pub mod control;
pub mod error;
pub mod harness;
pub mod heisenberg;
pub mod jets;
pub mod measure;
pub mod metric_core;
pub mod stats;

pub use error::{Error, Result};
