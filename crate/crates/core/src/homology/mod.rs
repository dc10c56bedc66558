//! Vietoris–Rips persistent homology over Z/2.
//!
//! [`rips_filtration`] enumerates the clique complex of a distance matrix up
//! to tetrahedra, [`compute_persistence`] reduces its boundary matrix with
//! the clearing optimisation, and [`PersistenceDiagram`] carries the
//! resulting birth–death pairs for H0, H1 and H2 together with the lifetime
//! summaries (persistent entropy, Betti curves) built on top of them.
//! [`oracle`] and [`h0_via_mst`] are independent reference paths used to
//! cross-check the optimised reduction.

mod diagram;
mod filtration;
mod mst;
pub mod oracle;
pub mod plot;
mod reduction;

pub use diagram::{
    betti_curve, lifetimes, persistent_entropy, persistent_entropy_with, total_persistent_entropy, EntropyVector,
    FeatureConventions, InfiniteBars, Pair, PersistenceDiagram, MAX_HOMOLOGY_DIM,
};
pub use filtration::{rips_filtration, Filtration, Simplex, Threshold};
pub use mst::{h0_via_mst, UnionFind};
pub use reduction::compute_persistence;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HomologyError {
    #[error("threshold must be positive and finite, got {0}")]
    BadThreshold(f64),
    #[error("2ε threshold needs a positive pairwise distance; all points coincide")]
    NoPositiveDistance,
    #[error("homology dimension {0} not supported (0..=2)")]
    DimensionOutOfRange(usize),
    #[error("simplex {simplex:?} is missing its face {face:?}")]
    MissingFace { simplex: Vec<u32>, face: Vec<u32> },
    #[error("simplex {simplex:?} appears before its face {face:?} or below its value")]
    FaceOrder { simplex: Vec<u32>, face: Vec<u32> },
    #[error("malformed diagram file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HomologyError>;
