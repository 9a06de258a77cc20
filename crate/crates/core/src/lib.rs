//! Interpolation-based immersogeometric analysis in two dimensions.
//!
//! Background fields live in (truncated hierarchical) B-spline spaces on a
//! Cartesian grid. Level-set geometry is resolved by a cut-cell foreground
//! mesh carrying a discontinuous Lagrange basis, and the background functions
//! are interpolated onto it through sparse extraction operators. Heat
//! conduction, linear elasticity and one-way thermo-elastic coupling are
//! assembled on the foreground and reduced to the background unknowns.

pub mod error;
pub mod quadrature;
pub mod sparse;
pub mod spline;
pub mod hierarchy;
pub mod geometry;
pub mod foreground;
pub mod enrichment;
pub mod extraction;
pub mod physics;
pub mod solver;
pub mod bench;

pub use error::{Error, Result};
