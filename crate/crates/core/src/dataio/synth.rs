use serde::{Deserialize, Serialize};

use super::manifest::{Category, FeatureManifest};
use super::Dataset;
use crate::error::{Error, Result};
use crate::numkernel::{SeededRng, Tensor};

/// Which feature category carries class signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalCategory {
    Genomic,
    Epigenomic,
    Both,
}

impl SignalCategory {
    fn carries(self, category: Category) -> bool {
        match self {
            SignalCategory::Both => true,
            SignalCategory::Genomic => category == Category::Genomic,
            SignalCategory::Epigenomic => category == Category::Epigenomic,
        }
    }
}

impl std::str::FromStr for SignalCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "genomic" => Ok(SignalCategory::Genomic),
            "epigenomic" => Ok(SignalCategory::Epigenomic),
            "both" => Ok(SignalCategory::Both),
            other => Err(Error::Config(format!(
                "unknown signal category '{other}' (expected genomic, epigenomic or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_per_class: usize,
    /// Distance between the two class means on every signal feature.
    pub separation: f64,
    pub signal_category: SignalCategory,
    pub noise_stddev: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_per_class: 500,
            separation: 4.0,
            signal_category: SignalCategory::Epigenomic,
            noise_stddev: 1.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 {
            return Err(Error::Config("n_per_class must be positive".into()));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::Config(format!(
                "separation must be a nonnegative number, got {}",
                self.separation
            )));
        }
        if !(self.noise_stddev > 0.0 && self.noise_stddev.is_finite()) {
            return Err(Error::Config(format!(
                "noise_stddev must be positive, got {}",
                self.noise_stddev
            )));
        }
        Ok(())
    }
}

/// Class-balanced Gaussian data over the default 45-feature manifest.
///
/// Rows alternate negative/positive. On signal features the class means sit
/// at `∓separation/2`; every feature has noise `N(0, noise_stddev²)`.
pub fn gen_synthetic(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let manifest = FeatureManifest::default();
    let signal: Vec<bool> = manifest
        .features()
        .iter()
        .map(|f| {
            let category = manifest.category_of(f.group).expect("default manifest is complete");
            config.signal_category.carries(category)
        })
        .collect();

    let mut rng = SeededRng::new(config.seed);
    let n = 2 * config.n_per_class;
    let width = manifest.len();
    let half = config.separation / 2.0;
    let mut data = Vec::with_capacity(n * width);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let shift = if label == 1 { half } else { -half };
        for &is_signal in &signal {
            let centre = if is_signal { shift } else { 0.0 };
            data.push(centre + config.noise_stddev * rng.normal());
        }
        y.push(label);
    }
    Dataset::new(Tensor::new(vec![n, width], data)?, y, manifest)
}
