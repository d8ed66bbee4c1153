use std::path::Path;

use sepred_core::dataio::{gen_synthetic, Dataset, FeatureManifest, FeatureSet};
use sepred_core::model::{build_model, one_hot, relu_margin, GradCheck, ModelDocument, ModelSpec, Variant};
use sepred_core::numkernel::{SeededRng, Tensor};
use sepred_core::pipeline::{ablate, cross_validate, fit_full};
use sepred_core::report::{
    fold_table_csv, fold_table_name, model_file_name, AblationSummary, RunManifest, RUN_MANIFEST_FILE, SUMMARY_FILE,
};

use crate::config::{CommandKind, RunConfig};
use crate::error::{CliError, CliResult};

pub const DATASET_FILE: &str = "dataset.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Gradient checks pass below this maximum relative error.
pub const GRADCHECK_TOLERANCE: f64 = 1e-6;
pub const GRADCHECK_EPSILON: f64 = 1e-5;
/// Minimum distance between any ReLU pre-activation and zero, 100 × ε.
pub const GRADCHECK_KINK_MARGIN: f64 = 1e-3;
const GRADCHECK_MAX_DRAWS: usize = 100;
pub const GRADCHECK_TRIALS: u64 = 10;

/// Files are collected in memory and written only once every computation
/// has succeeded.
struct Bundle {
    files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    fn new() -> Self {
        Bundle { files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    fn write(self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (name, contents) in self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}

fn load_inputs(cfg: &RunConfig) -> CliResult<Dataset> {
    let data = cfg
        .data
        .as_deref()
        .ok_or_else(|| CliError::Validation("--data is required".into()))?;
    let manifest = match &cfg.manifest {
        Some(path) => FeatureManifest::load(path)?,
        None => FeatureManifest::default(),
    };
    Ok(Dataset::load_csv(data, &manifest)?)
}

fn run_manifest(kind: CommandKind, cfg: &RunConfig, ds: &Dataset, outputs: Vec<String>) -> CliResult<String> {
    let manifest = RunManifest {
        tool: "sepred".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: kind.name().into(),
        config: serde_json::to_value(cfg).map_err(sepred_core::Error::from)?,
        fold_seed: cfg.seed,
        model_seed: cfg.model.seed,
        dataset_fingerprint: ds.fingerprint(),
        outputs,
    };
    Ok(manifest.to_json()?)
}

fn model_dump(ds: &Dataset, spec: &ModelSpec, category: FeatureSet) -> CliResult<String> {
    let (model, standardizer) = fit_full(ds, category, spec)?;
    Ok(ModelDocument::new(&model, Some(standardizer)).to_json()?)
}

pub fn cmd_gen(cfg: &RunConfig) -> CliResult<()> {
    let ds = gen_synthetic(&cfg.synth)?;
    let mut csv = Vec::new();
    ds.write_csv(&mut csv)?;
    let mut bundle = Bundle::new();
    bundle.add(DATASET_FILE, csv);
    bundle.add(MANIFEST_FILE, ds.manifest().to_json()? + "\n");
    bundle.write(&cfg.out)?;
    println!(
        "wrote {} rows ({} per class, separation {}) to {}",
        ds.len(),
        cfg.synth.n_per_class,
        cfg.synth.separation,
        cfg.out.join(DATASET_FILE).display()
    );
    Ok(())
}

pub fn cmd_cv(cfg: &RunConfig) -> CliResult<()> {
    let ds = load_inputs(cfg)?;
    let (variant, category) = (cfg.variants[0], cfg.categories[0]);
    let spec = ModelSpec {
        variant,
        ..cfg.model.clone()
    };
    let report = cross_validate(&ds, category, &spec, cfg.k, cfg.seed)?;
    let table = fold_table_csv(&report);

    let mut bundle = Bundle::new();
    bundle.add(fold_table_name(variant, category), table.clone());
    if cfg.save_model {
        bundle.add(model_file_name(variant, category), model_dump(&ds, &spec, category)?);
    }
    let mut outputs = bundle.names();
    outputs.push(RUN_MANIFEST_FILE.into());
    bundle.add(RUN_MANIFEST_FILE, run_manifest(CommandKind::Cv, cfg, &ds, outputs)?);
    bundle.write(&cfg.out)?;

    println!("{variant} / {category}, {}-fold", cfg.k);
    print!("{table}");
    if !report.meta.flagged_folds.is_empty() {
        println!("zero-denominator metrics in folds {:?}", report.meta.flagged_folds);
    }
    Ok(())
}

pub fn cmd_ablate(cfg: &RunConfig) -> CliResult<()> {
    let ds = load_inputs(cfg)?;
    let report = ablate(&ds, &cfg.model, &cfg.categories, &cfg.variants, cfg.k, cfg.seed)?;
    let summary = AblationSummary::from_report(&report);

    let mut bundle = Bundle::new();
    for cell in &report.cells {
        bundle.add(fold_table_name(cell.variant, cell.category), fold_table_csv(&cell.report));
    }
    bundle.add(SUMMARY_FILE, summary.to_json()?);
    if cfg.save_model {
        for cell in &report.cells {
            let spec = ModelSpec {
                variant: cell.variant,
                ..cfg.model.clone()
            };
            bundle.add(
                model_file_name(cell.variant, cell.category),
                model_dump(&ds, &spec, cell.category)?,
            );
        }
    }
    let mut outputs = bundle.names();
    outputs.push(RUN_MANIFEST_FILE.into());
    bundle.add(RUN_MANIFEST_FILE, run_manifest(CommandKind::Ablate, cfg, &ds, outputs)?);
    bundle.write(&cfg.out)?;

    println!("{:<8} {:<11} {:>8} {:>8} {:>9} {:>8} {:>8} {:>8}", "variant", "category", "Loss", "Acc", "Precision", "Recall", "F1", "Auc");
    for cell in &summary.cells {
        let a = &cell.average;
        println!(
            "{:<8} {:<11} {:>8.4} {:>8.4} {:>9.4} {:>8.4} {:>8.4} {:>8.4}",
            cell.variant.as_str(),
            cell.category.as_str(),
            a.loss,
            a.accuracy,
            a.precision,
            a.recall,
            a.f1,
            a.auc
        );
    }
    Ok(())
}

/// Input width and batch size used for each variant's gradient check.
pub fn gradcheck_shape(variant: Variant) -> (usize, usize) {
    match variant {
        Variant::Dpnn => (45, 4),
        Variant::Conv1d => (9, 2),
    }
}

/// Worst relative gradient error for `variant` over [`GRADCHECK_TRIALS`]
/// random models and batches derived from `seed`.
pub fn gradcheck_variant(base: &ModelSpec, variant: Variant, seed: u64, corruption: f64) -> CliResult<f64> {
    let spec = ModelSpec {
        variant,
        ..base.clone()
    };
    let (width, rows) = gradcheck_shape(variant);
    let check = GradCheck {
        epsilon: GRADCHECK_EPSILON,
        corruption,
    };
    let mut worst: f64 = 0.0;
    for trial in 0..GRADCHECK_TRIALS {
        let mut rng = SeededRng::derive(seed, trial);
        let model = build_model(&spec, width, &mut rng)?;
        let mut x = Tensor::new(vec![rows, width], (0..rows * width).map(|_| rng.normal()).collect())?;
        // The loss is not differentiable at a ReLU kink; redraw inputs that
        // land within reach of one.
        let mut draws = 1;
        while relu_margin(&model, &x)? < GRADCHECK_KINK_MARGIN {
            if draws == GRADCHECK_MAX_DRAWS {
                return Err(CliError::Verification(format!(
                    "{variant}: no input batch clear of ReLU kinks after {draws} draws"
                )));
            }
            x = Tensor::new(vec![rows, width], (0..rows * width).map(|_| rng.normal()).collect())?;
            draws += 1;
        }
        let labels: Vec<u8> = (0..rows).map(|_| rng.below(2) as u8).collect();
        worst = worst.max(check.run(&model, &x, &one_hot(&labels))?);
    }
    Ok(worst)
}

pub fn cmd_gradcheck(cfg: &RunConfig, corrupt: bool) -> CliResult<()> {
    let corruption = if corrupt { 1e-3 } else { 0.0 };
    let mut failed = Vec::new();
    for &variant in &cfg.variants {
        let err = gradcheck_variant(&cfg.model, variant, cfg.seed, corruption)?;
        let (width, rows) = gradcheck_shape(variant);
        let verdict = if err < GRADCHECK_TOLERANCE { "ok" } else { "FAIL" };
        println!(
            "{:<7} max relative error {:.3e} over {} seeds (width {}, batch {}) {}",
            variant.as_str(),
            err,
            GRADCHECK_TRIALS,
            width,
            rows,
            verdict
        );
        if err >= GRADCHECK_TOLERANCE {
            failed.push(variant.as_str());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "gradient check exceeded {:e} for {}",
            GRADCHECK_TOLERANCE,
            failed.join(", ")
        )))
    }
}
