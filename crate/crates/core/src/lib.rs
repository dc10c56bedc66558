//! # eegtda
//!
//! Topological feature extraction from multi-channel EEG, and cross-validated
//! stress-vs-normal classification on top of those features.
//!
//! ```text
//! Recording (c × n, µV)
//!   │
//!   ├─ preprocessing::preprocess      Butterworth band-pass, then 50 Hz notch
//!   ├─ preprocessing::segment_trials  non-overlapping 10 s windows
//!   ├─ pointcloud::pca_embed          one point per channel in R^d (PCA via SVD)
//!   ├─ pointcloud::distance_matrix    Euclidean distances between channels
//!   ├─ homology::rips_filtration      clique filtration up to tetrahedra
//!   ├─ homology::compute_persistence  Z/2 column reduction with clearing
//!   └─ learning::assemble_features    18 lifetime / entropy summaries per trial
//!        │
//!        └─→ learning::kfold_cv       RF / DT / SVM / LR / MLP, accuracy ± SD, F1, kappa
//! ```
//!
//! The [`pipeline`] module wires the stages together, writes every artifact
//! to disk and backs the `eegtda` command-line tool.

pub mod homology;
pub mod learning;
pub mod pipeline;
pub mod pointcloud;
pub mod preprocessing;
pub mod seed;
pub mod signal_io;

pub use homology::{
    compute_persistence, h0_via_mst, persistent_entropy, rips_filtration, Filtration, PersistenceDiagram, Threshold,
};
pub use learning::{kfold_cv, metrics, EvalReport, FeatureVector, ModelKind, StudyDataset};
pub use pointcloud::{distance_matrix, pca_embed, tsne_embed, DistanceMatrix, PointCloud};
pub use preprocessing::{bandpass, notch, preprocess, segment_trials, FilterSpec, Trial};
pub use signal_io::{load_recording, synth_cohort, CohortSpec, Label, Recording, Segment};
