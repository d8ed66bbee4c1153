use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{stratified_kfold, FoldPlan};
use crate::dataio::{Dataset, FeatureSet, Standardizer};
use crate::error::{Error, Result};
use crate::metrics::{auc, classification_metrics, confusion, FoldMetrics, DEFAULT_THRESHOLD};
use crate::model::{cross_entropy, forward, one_hot, train, ModelSpec, TrainedModel, Variant};
use crate::numkernel::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvMeta {
    pub variant: Variant,
    pub category: FeatureSet,
    pub k: usize,
    /// Seed of the fold plan.
    pub fold_seed: u64,
    /// Base seed for per-fold model generators.
    pub model_seed: u64,
    pub dataset_fingerprint: String,
    /// 1-based folds where a zero denominator forced precision, recall or F1 to 0.
    pub flagged_folds: Vec<usize>,
}

/// One row per fold plus the column means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub rows: Vec<FoldMetrics>,
    pub average: FoldMetrics,
    pub meta: CvMeta,
}

/// Stratified k-fold cross-validation of `spec` on the `set` columns of `ds`.
pub fn cross_validate(ds: &Dataset, set: FeatureSet, spec: &ModelSpec, k: usize, seed: u64) -> Result<CvReport> {
    let plan = stratified_kfold(ds.y(), k, seed)?;
    cross_validate_with_plan(ds, set, spec, &plan, seed)
}

/// Cross-validation over a precomputed plan; `fold_seed` is recorded only.
pub fn cross_validate_with_plan(
    ds: &Dataset,
    set: FeatureSet,
    spec: &ModelSpec,
    plan: &FoldPlan,
    fold_seed: u64,
) -> Result<CvReport> {
    spec.validate()?;
    if plan.assignments().len() != ds.len() {
        return Err(Error::Shape(format!(
            "fold plan covers {} samples, dataset has {}",
            plan.assignments().len(),
            ds.len()
        )));
    }
    let selected = ds.select_features(set)?;

    let outcomes: Vec<(FoldMetrics, bool)> = (0..plan.k())
        .into_par_iter()
        .map(|fold| {
            evaluate_fold(&selected, spec, plan, fold).map_err(|e| Error::Fold {
                fold: fold + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let rows: Vec<FoldMetrics> = outcomes.iter().map(|(m, _)| *m).collect();
    let flagged_folds = outcomes
        .iter()
        .enumerate()
        .filter(|(_, (_, degenerate))| *degenerate)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(CvReport {
        average: FoldMetrics::mean(&rows)?,
        rows,
        meta: CvMeta {
            variant: spec.variant,
            category: set,
            k: plan.k(),
            fold_seed,
            model_seed: spec.seed,
            dataset_fingerprint: ds.fingerprint(),
            flagged_folds,
        },
    })
}

fn evaluate_fold(ds: &Dataset, spec: &ModelSpec, plan: &FoldPlan, fold: usize) -> Result<(FoldMetrics, bool)> {
    let train_rows = ds.subset(&plan.train_indices(fold));
    let test_rows = ds.subset(&plan.test_indices(fold));
    let standardizer = Standardizer::fit(&train_rows)?;
    let train_rows = standardizer.apply(&train_rows)?;
    let test_rows = standardizer.apply(&test_rows)?;

    let mut rng = SeededRng::derive(spec.seed, fold as u64);
    let (model, _) = train(spec, train_rows.x(), train_rows.y(), &mut rng)?;

    let probs = forward(&model, test_rows.x())?;
    let loss = cross_entropy(&probs, &one_hot(test_rows.y()))?;
    let cls = classification_metrics(&confusion(&probs, test_rows.y(), DEFAULT_THRESHOLD)?)?;
    let scores: Vec<f64> = probs.rows().map(|r| r[1]).collect();
    let metrics = FoldMetrics {
        loss,
        accuracy: cls.accuracy,
        precision: cls.precision,
        recall: cls.recall,
        f1: cls.f1,
        auc: auc(&scores, test_rows.y())?,
    };
    Ok((metrics, cls.degenerate))
}

/// Trains on every row of `ds` (standardizer fitted on all of them).
pub fn fit_full(ds: &Dataset, set: FeatureSet, spec: &ModelSpec) -> Result<(TrainedModel, Standardizer)> {
    let selected = ds.select_features(set)?;
    let standardizer = Standardizer::fit(&selected)?;
    let scaled = standardizer.apply(&selected)?;
    let mut rng = SeededRng::new(spec.seed);
    let (model, _) = train(spec, scaled.x(), scaled.y(), &mut rng)?;
    Ok((model, standardizer))
}
