//! Protection, thickness and stability analysis for Euclidean Delaunay
//! triangulations.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod complex;
pub mod datasets;
pub mod delaunay;
pub mod error;
pub mod genericity;
pub mod geometry;
pub mod perturb;
pub mod pointio;
pub mod points;
pub mod random;

pub use error::{Error, Result};
