//! Boundary geometry of pseudoconvex model domains.
//!
//! The crate measures how far a domain bends away from its boundary in
//! complex-tangential directions. Starting from a defining function given as
//! an expression tree, it computes tangential gauge curves and their inverse
//! radius curves, contact orders of holomorphic curves with the boundary, and
//! certified checks that boundary values of holomorphic functions gain
//! regularity along the complex tangent. The `tanlip` binary exposes the same
//! functionality on the command line.

pub mod config;
pub mod contact;
pub mod disc;
pub mod domain;
pub mod error;
pub mod expr;
pub mod geom;
pub mod lipschitz;
pub mod rational;
pub mod report;

pub use error::{Error, Result};
