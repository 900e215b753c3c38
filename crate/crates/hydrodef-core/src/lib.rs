//! Exact verification engine for degenerate hydrodynamic Poisson brackets of
//! Dubrovin–Novikov type and their dispersive deformations.
//!
//! Coefficients live in [`symcore::Expr`], rational functions of jet variables
//! and formal functions. Local bivectors are finite δ-series
//! ([`deltadist::BiDist`]); the Schouten bracket and Lie derivative act on
//! those series directly.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bivectors;
pub mod catalog;
pub mod deltadist;
pub mod error;
pub mod grinberg;
pub mod scalar;
pub mod schouten;
pub mod symcore;
pub mod transforms;

pub use error::{Caps, Error, Result};
pub use scalar::Scalar;
pub use symcore::{Atom, Expr, FuncSym, JetVar};
