use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Dense hidden layer(s) feeding a 2-unit softmax.
    Dpnn,
    /// Conv1D over the feature vector, flattened into a 2-unit softmax.
    Conv1d,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Dpnn, Variant::Conv1d];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Dpnn => "dpnn",
            Variant::Conv1d => "conv1d",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dpnn" => Ok(Variant::Dpnn),
            "conv1d" => Ok(Variant::Conv1d),
            other => Err(Error::Config(format!(
                "unknown variant '{other}' (expected dpnn or conv1d)"
            ))),
        }
    }
}

/// Architecture and training hyperparameters.
///
/// The defaults are the canonical configuration: 16 hidden units or filters,
/// kernel width 3, 20 epochs, batch size 32 and Adam with
/// `lr = 1e-3, β₁ = 0.9, β₂ = 0.999, ε = 1e-7`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub variant: Variant,
    pub hidden_units: usize,
    /// Number of dense hidden layers; ignored by [`Variant::Conv1d`].
    pub hidden_layers: usize,
    pub output_units: usize,
    pub conv_filters: usize,
    pub conv_kernel_width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            variant: Variant::Dpnn,
            hidden_units: 16,
            hidden_layers: 1,
            output_units: 2,
            conv_filters: 16,
            conv_kernel_width: 3,
            epochs: 20,
            batch_size: 32,
            learning_rate: 0.001,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-7,
            seed: 0,
        }
    }
}

impl ModelSpec {
    pub fn with_variant(variant: Variant) -> Self {
        ModelSpec {
            variant,
            ..ModelSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hidden_units", self.hidden_units),
            ("hidden_layers", self.hidden_layers),
            ("conv_filters", self.conv_filters),
            ("conv_kernel_width", self.conv_kernel_width),
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be a positive integer")));
            }
        }
        if self.output_units != 2 {
            return Err(Error::Config(format!(
                "output_units must be 2, got {}",
                self.output_units
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        for (name, beta) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {beta}")));
            }
        }
        if !(self.adam_epsilon > 0.0 && self.adam_epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "adam_epsilon must be positive, got {}",
                self.adam_epsilon
            )));
        }
        Ok(())
    }
}
