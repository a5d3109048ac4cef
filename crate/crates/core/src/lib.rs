//! Stationary vortex patches for the generalized SQG equation with
//! `1 < γ < 2` in bounded planar domains.

pub mod cli;
pub mod contour;
pub mod error;
pub mod functional;
pub mod green;
pub mod kr;
pub mod linop;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod validation;

pub use error::{Error, Result};
