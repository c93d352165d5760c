//! Dataset ingestion, synthetic generators, model persistence and CSV
//! exports.

pub mod export;
pub mod ingest;
pub mod model;
pub mod synthetic;

pub use ingest::{load_csv, read_csv, write_labeled_csv, CsvSchema, LabelColumn, Loaded};
pub use model::{load_model, read_model, save_model, write_model, SavedModel, MODEL_VERSION};
pub use synthetic::{gen_synthetic, uniform_dataset, SyntheticKind, SyntheticSpec};
