//! Invariant hulls of integral functionals on parameterized curves and
//! surfaces.
//!
//! The hull of a functional `I(u) = ∫ W(∇u)` is the largest functional below
//! `I` that does not change under reparameterization of `u`. The crate
//! provides the closed-form one-dimensional hull, a pointwise matrix hull,
//! and a disk-surface program showing that the Dirichlet energy's hull is
//! the area.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod densities;
pub mod error;
pub mod hull1d;
pub mod mesh;
pub mod numeric;
pub mod pointwise;
pub mod reparam2d;

pub use error::{HullError, Result};
