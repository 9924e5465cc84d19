//! Four-node shallow-shell finite elements and the Girkmann dome benchmark.
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh`]: quarter spherical cap meshes (generated, refined, perturbed or
//!   imported from MSH 2.2) with boundary tags and nodal normals.
//! - [`geometry`]: element straightening, local frames, Jacobians and
//!   curvature coefficients from interpolated normals.
//! - [`element`]: strain-displacement operators, the covariant strain
//!   reductions (registered by name, see [`element::ReductionRegistry`]),
//!   shear stabilization, element stiffness and loads.
//! - [`assembly`]: nodal-frame degrees of freedom, symmetry constraints,
//!   sparse assembly and the sparse Cholesky solve.
//! - [`girkmann`]: load cases, shell and ring compliances, the reaction
//!   solve, moment profiles and convergence tables.
//! - [`report`]: fixed-layout CSV output.

pub mod assembly;
pub mod element;
pub mod error;
pub mod geometry;
pub mod girkmann;
pub mod mesh;
pub mod report;

pub use error::{Error, Result};

/// Cartesian 3-vector used for positions, normals and load vectors.
pub type Vec3 = nalgebra::Vector3<f64>;
