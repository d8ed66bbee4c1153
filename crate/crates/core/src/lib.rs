//! Super-enhancer classification with small dense and 1-D convolutional
//! networks.
//!
//! The crate is layered bottom-up:
//!
//! - [`numkernel`]: tensors, a portable seeded generator, matmul, 1-D
//!   convolution and activations.
//! - [`model`]: layer composition, softmax cross-entropy, Adam, the training
//!   loop, finite-difference gradient checks and JSON persistence.
//! - [`dataio`]: the 45-column feature schema, CSV ingestion, per-fold
//!   standardization and a synthetic data generator.
//! - [`metrics`]: confusion statistics and rank-based AUC.
//! - [`pipeline`]: stratified k-fold cross-validation and the
//!   model × feature-set ablation grid.
//! - [`report`]: fold tables, comparison summaries and run manifests.

pub mod dataio;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numkernel;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
