//! Feature schema, CSV ingestion, standardization and synthetic data.

mod dataset;
mod manifest;
mod standardize;
mod synth;

pub use dataset::Dataset;
pub use manifest::{Category, Feature, FeatureGroup, FeatureManifest, FeatureSet};
pub use standardize::Standardizer;
pub use synth::{gen_synthetic, SignalCategory, SynthConfig};

/// Name of the final CSV column holding the 0/1 class label.
pub const LABEL_COLUMN: &str = "label";
