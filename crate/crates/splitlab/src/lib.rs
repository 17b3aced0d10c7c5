//! Matrix-splitting iterations for ill-posed linear systems.
//!
//! The library builds splittings `A = U - V` and `A = P - R + S` of a dense
//! system matrix or of its Tikhonov-regularized counterpart
//! `B_lambda = A^T A + lambda I`, runs the associated stationary iterations,
//! and machine-checks the convergence and comparison statements of the
//! underlying theory on concrete instances.

pub mod dense;
pub mod error;
pub mod fixtures;
pub mod probgen;
pub mod regularization;
pub mod solvers;
pub mod splittings;
pub mod theorems;

pub use dense::{Matrix, Tolerances};
pub use error::{Error, Result};
