//! Graded nilpotent groups, homogeneous quasi-distances, and Besicovitch covering certificates.

pub mod algebra;
pub mod besicovitch;
pub mod certificates;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod scalar;
pub mod structure;

pub use algebra::{
    builtin_group, AlgebraVector, GradedGroup, GroupPoint, GroupSpec, StructureConstants, ValidationReport,
};
pub use error::{Error, Result};
pub use scalar::{Backend, Rational, Scalar};
