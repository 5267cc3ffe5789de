//! Crossvalidation scoring, strategy benchmarks and data plumbing for the
//! subsample-annealing samplers.

pub mod compare;
pub mod cv;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod normalize;
pub mod score;
pub mod synth;

pub use compare::{compare_strategies, CompareConfig, CompareResult};
pub use cv::CvSplit;
pub use error::{Error, Result};
pub use ingest::{ingest_csv, DatasetSchema, SchemaSource};
pub use manifest::{fingerprint, BudgetSpec, ChainResult, InferenceConfig, RunManifest};
pub use normalize::normalize_scores;
pub use score::heldout_log_score;
pub use synth::{synth_dataset, SynthConfig};
