//! Numerical toolkit for amalgamated free products of finite-dimensional
//! C*-algebras: Hilbert C*-modules, full Fock space constructions, compression
//! and recovery completely positive maps, and group-algebra oracles.

pub mod algebra;
pub mod cp_maps;
pub mod error;
pub mod examples;
pub mod fock;
pub mod group;
pub mod json;
pub mod linalg;
pub mod module;

pub use error::{AmalgamError, Result};
