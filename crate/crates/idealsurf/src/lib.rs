//! Discrete differential-geometry toolkit for surfaces that extremize the
//! Dirichlet energy of mean curvature, `F = ∫ |∇H|² dμ`, under flat boundary
//! conditions (`|A| = 0` and vanishing normal derivatives of `H` and `ΔH` on
//! the rim).
//!
//! The crate is organized as
//! - [`mesh`]: halfedge-flavored triangle meshes, OBJ I/O, cotangent metric,
//! - [`meshgen`]: procedural test geometry,
//! - [`oracle`]: exact parametric surfaces evaluated with truncated Taylor
//!   jets, used to validate every discrete operator,
//! - discrete operators, energy, flow, and audit layers built on top.

pub mod audit;
pub mod config;
pub mod energy;
pub mod error;
pub mod flow;
pub mod field;
pub mod mesh;
pub mod meshgen;
pub mod ops;
pub mod oracle;
pub mod report;

pub use error::{Error, Result};
