//! Weighted Delaunay triangulations, power diagrams, and the relaxation of
//! circle systems toward polygonal Delaunay partitions.

// Negated comparisons are how NaN inputs get rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagram;
pub mod kernel;
pub mod optimizer;
pub mod par;
pub mod recovery;
pub mod regular;
pub mod scene;
