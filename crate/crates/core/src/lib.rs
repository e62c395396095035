//! Coordinate percolation of two random walks on the complete graph.
//!
//! Two step sequences `X` and `Y` over `{1..M}` define the lattice in which
//! site `(i1, i2)` is closed iff `X[i1] == Y[i2]`. An open oriented path from
//! `(1, 1)` is exactly a delay schedule that keeps the two walks apart.

pub mod error;
pub mod frontier;
pub mod geometry;
pub mod model;
pub mod montecarlo;
pub mod multiscale;
pub mod params;
pub mod reachability;
pub mod scheduler;
pub mod slope;

pub use error::{Error, Result};
pub use model::{generate, is_open, Role, Sequence, Site};
pub use params::{Mode, Params, ValidationReport};
