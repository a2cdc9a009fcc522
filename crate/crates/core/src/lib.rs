//! Embedding-space class-incremental learning with class-level unlearning.
//!
//! Embeddings of learned classes live in an in-memory vector store (DB-CIL).
//! Unlearning a class migrates its vectors to a second store (DB-MU) instead
//! of touching any model weights; at inference time a cosine-threshold filter
//! against DB-MU decides whether an input belongs to an unlearned class and,
//! if so, one of four output strategies picks the answer.
//!
//! The crate is `no_std` and needs only `alloc`. File IO, configuration and
//! the command-line driver live in the `ecilmu` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod format;
pub mod inference;
pub mod metrics;
pub mod protocol;
pub mod rng;
pub mod sim;
pub mod store;
pub mod synthetic;
pub mod unlearn;
pub mod vector;

pub use error::{Error, Result};
pub use inference::{
    predict, InverseWeighting, NearestCentroid, PipelineConfig, Prediction, PredictionTable, Query,
    StrategyKind, SurrogateModel,
};
pub use metrics::{
    evaluate, expected_cf_accuracy, expected_cr_accuracy, LabeledSample, MetricsReport,
};
pub use rng::SeedStream;
pub use sim::{simulate, speedup, CostModel, Lane, Method, TaskKind, Timeline};
pub use store::{migrate_class, ClassSummary, Databases, Neighbor, StoreName, VectorStore};
pub use synthetic::{generate_synthetic, split, SyntheticSpec};
pub use unlearn::{
    identify_class, membership_filter, sample_exemplars, sweep_threshold, unlearn,
    FilterCalibration, FilterMode, MigrationReport, UnlearnRequest,
};
pub use vector::{cosine_similarity, ClassId, Embedding, RecordId, VectorRecord};
