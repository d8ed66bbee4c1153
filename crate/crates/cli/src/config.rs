use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sepred_core::dataio::{FeatureSet, SignalCategory, SynthConfig};
use sepred_core::model::{ModelSpec, Variant};
use sepred_core::pipeline::DEFAULT_K;

use crate::cli::{CommonArgs, GenArgs};
use crate::error::{CliError, CliResult};

/// Keys accepted in a `--config` file. Every key is optional; unknown keys
/// are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    /// Comma-separated.
    pub variant: Option<String>,
    /// Comma-separated.
    pub category: Option<String>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub save_model: Option<bool>,
    pub hidden_units: Option<usize>,
    pub hidden_layers: Option<usize>,
    pub conv_filters: Option<usize>,
    pub conv_kernel_width: Option<usize>,
    pub learning_rate: Option<f64>,
    pub n_per_class: Option<usize>,
    pub separation: Option<f64>,
    pub signal: Option<String>,
    pub noise_stddev: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {}", path.display(), e)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Gen,
    Cv,
    Ablate,
    Gradcheck,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Gen => "gen",
            CommandKind::Cv => "cv",
            CommandKind::Ablate => "ablate",
            CommandKind::Gradcheck => "gradcheck",
        }
    }
}

/// Fully resolved settings: flags override the config file, which overrides
/// defaults.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    /// Where the bundle is written; not part of the recorded configuration.
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
    pub k: usize,
    pub variants: Vec<Variant>,
    pub categories: Vec<FeatureSet>,
    /// Base model settings; `variant` is replaced per grid cell.
    pub model: ModelSpec,
    pub save_model: bool,
    #[serde(skip)]
    pub synth: SynthConfig,
}

fn parse_list<T: std::str::FromStr<Err = sepred_core::Error>>(items: &[String]) -> CliResult<Vec<T>> {
    let mut out = Vec::new();
    for item in items.iter().flat_map(|s| s.split(',')) {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        out.push(item.parse().map_err(|e: sepred_core::Error| CliError::Validation(e.to_string()))?);
    }
    Ok(out)
}

fn dedup<T: PartialEq + Copy>(items: Vec<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(items.len());
    for i in items {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

impl RunConfig {
    pub fn resolve(kind: CommandKind, args: &CommonArgs, gen: Option<&GenArgs>) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let variant_src = if args.variant.is_empty() {
            file.variant.clone().into_iter().collect()
        } else {
            args.variant.clone()
        };
        let category_src = if args.category.is_empty() {
            file.category.clone().into_iter().collect()
        } else {
            args.category.clone()
        };
        let mut variants = dedup(parse_list::<Variant>(&variant_src)?);
        let mut categories = dedup(parse_list::<FeatureSet>(&category_src)?);
        if variants.is_empty() {
            variants = match kind {
                CommandKind::Ablate | CommandKind::Gradcheck => Variant::ALL.to_vec(),
                _ => vec![Variant::Dpnn],
            };
        }
        if categories.is_empty() {
            categories = match kind {
                CommandKind::Ablate => FeatureSet::ALL.to_vec(),
                _ => vec![FeatureSet::All],
            };
        }
        if kind == CommandKind::Cv && (variants.len() > 1 || categories.len() > 1) {
            return Err(CliError::Validation(
                "cv takes a single --variant and --category; use ablate for grids".into(),
            ));
        }

        let seed = args.seed.or(file.seed).unwrap_or(0);
        let defaults = ModelSpec::default();
        let model = ModelSpec {
            variant: variants[0],
            epochs: args.epochs.or(file.epochs).unwrap_or(defaults.epochs),
            batch_size: args.batch_size.or(file.batch_size).unwrap_or(defaults.batch_size),
            hidden_units: file.hidden_units.unwrap_or(defaults.hidden_units),
            hidden_layers: file.hidden_layers.unwrap_or(defaults.hidden_layers),
            conv_filters: file.conv_filters.unwrap_or(defaults.conv_filters),
            conv_kernel_width: file.conv_kernel_width.unwrap_or(defaults.conv_kernel_width),
            learning_rate: file.learning_rate.unwrap_or(defaults.learning_rate),
            seed,
            ..defaults
        };
        model.validate()?;

        let synth_defaults = SynthConfig::default();
        let signal = match gen.and_then(|g| g.signal.clone()).or(file.signal.clone()) {
            Some(s) => s
                .parse::<SignalCategory>()
                .map_err(|e| CliError::Validation(e.to_string()))?,
            None => synth_defaults.signal_category,
        };
        let synth = SynthConfig {
            n_per_class: gen
                .and_then(|g| g.n_per_class)
                .or(file.n_per_class)
                .unwrap_or(synth_defaults.n_per_class),
            separation: gen
                .and_then(|g| g.separation)
                .or(file.separation)
                .unwrap_or(synth_defaults.separation),
            signal_category: signal,
            noise_stddev: gen
                .and_then(|g| g.noise_stddev)
                .or(file.noise_stddev)
                .unwrap_or(synth_defaults.noise_stddev),
            seed,
        };

        Ok(RunConfig {
            data: args.data.clone().or(file.data),
            manifest: args.manifest.clone().or(file.manifest),
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            seed,
            k: args.k.or(file.k).unwrap_or(DEFAULT_K),
            variants,
            categories,
            model,
            save_model: args.save_model || file.save_model.unwrap_or(false),
            synth,
        })
    }
}
