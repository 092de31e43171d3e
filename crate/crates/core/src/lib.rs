//! Constructions and certificates for 2-transitive sets of equiangular lines.

pub mod action;
pub mod error;
pub mod fiducial;
pub mod finfield;
pub mod heisenberg;
pub mod linalg;
pub mod lineset;
pub mod perm;
pub mod weil;

pub use error::{Error, Result};
