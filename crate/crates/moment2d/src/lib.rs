//! Solver toolkit for the truncated two-dimensional power moment problem and
//! the truncated complex moment problem.
//!
//! The pipeline: certify positivity of the extended moment kernel, realize it
//! at finite rank as coordinate vectors, build the commuting pair of
//! multiplication operators, jointly diagonalize them, and read off a finitely
//! atomic representing measure. A step-wise extension algorithm constructs the
//! extended moment data from plain power moments, and exact conversions route
//! the complex moment problem through the same machinery.

pub mod algorithm;
pub mod cli;
pub mod complexmp;
pub mod error;
pub mod extended;
pub mod gram;
pub mod index;
pub mod linalg;
pub mod linsolve;
pub mod measure;
pub mod table;

pub use cli::run;
pub use error::MomentError;
pub use index::{BoxSpec, ExtIndex};
pub use measure::{Atom, AtomicMeasure};
pub use table::{ComplexMomentTable, ExtMomentTable, MomentTable2D};
