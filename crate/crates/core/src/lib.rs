//! Isolation Mondrian forest.
//!
//! An ensemble of Mondrian trees grown on the smallest bounding blocks of
//! the data, scored by isolation depth. Trees can be built in batch and
//! then extended one point at a time, so the same model serves batch
//! outlier detection and streaming novelty detection.
//!
//! Tree construction, scoring and extension run in parallel across trees
//! and points when the `parallel` feature (on by default) is enabled;
//! results are bit-identical either way.

pub mod bench;
pub mod dataset;
pub mod decision;
pub mod error;
pub mod eval;
pub mod forest;
pub mod io;
pub mod mondrian;
pub mod par;

pub use dataset::{Dataset, LabeledDataset};
pub use decision::{DecisionModel, Label};
pub use error::{Error, Result};
pub use forest::{anomaly_score, c_factor, harmonic, Forest, ForestConfig, ScoreReport, Window};
pub use mondrian::{BoundingBox, NodeId, Tree};
