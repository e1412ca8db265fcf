//! Pareto sets of strongly convex multiobjective problems via the weighted-sum
//! scalarization map x*(w), with numerical checks of the simplicial structure
//! (rank condition, injectivity, Hölder continuity, KKT residuals, face
//! consistency) and random linear-perturbation experiments.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod convexity;
pub mod error;
pub mod pareto;
pub mod perturbation;
pub mod problem;
pub mod rank;
pub mod solver;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
