//! Iteration schemes built from averaged nonexpansive operators for convex
//! feasibility problems.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! core: exact projections onto a small catalog of convex sets, the operator
//! algebra (relaxed projectors, Douglas–Rachford, Borwein–Tam and cyclically
//! anchored Douglas–Rachford chains), index/weight schedules, the iteration
//! drivers with Fejér monitoring, empirical regularity diagnostics, and the
//! feasibility benchmark generator. File formats and the command line live in
//! the `fixfeas` crate.
//!
//! ```
//! use fixfeas_core::geometry::{SetDescriptor, Vector};
//! use fixfeas_core::operators::dr_operator;
//!
//! let u = SetDescriptor::hyperplane(Vector::from([0.0, 1.0]), 0.0).unwrap();
//! let v = SetDescriptor::hyperplane(Vector::from([1.0, 0.0]), 0.0).unwrap();
//! let t = dr_operator(&u, &v).unwrap();
//! let y = t.apply(&Vector::from([1.0, 0.0])).unwrap();
//! assert!(y.norm() < 1e-15);
//! ```
#![no_std]

extern crate alloc;

pub mod bench;
pub mod control;
pub mod diagnostics;
pub mod engine;
mod error;
pub mod geometry;
pub mod operators;
pub mod sampling;

pub use error::{Error, Result};
pub use geometry::{SetDescriptor, Vector};
pub use operators::FixedPointMap;
