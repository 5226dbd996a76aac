//! Desk-scale computations for symmetry protected topological phases:
//! finite groups and their cohomology, matrix product states, parent
//! Hamiltonians, SPT indices, spectral flow and the 2D Dijkgraaf–Witten model.

pub mod cohomology;
pub mod dw2d;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod mps;
pub mod parent_ham;
pub mod spectral_flow;
pub mod spt_indices;

pub use error::{Error, Result};
