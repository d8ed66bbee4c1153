use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate_with_plan, CvReport};
use super::folds::stratified_kfold;
use crate::dataio::{Dataset, FeatureSet};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub variant: Variant,
    pub category: FeatureSet,
    pub report: CvReport,
}

/// Cross-validation reports keyed by (variant, feature set), in request order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub cells: Vec<AblationCell>,
}

impl AblationReport {
    pub fn get(&self, variant: Variant, category: FeatureSet) -> Option<&CvReport> {
        self.cells
            .iter()
            .find(|c| c.variant == variant && c.category == category)
            .map(|c| &c.report)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Runs one cross-validation per (variant, feature set) pair.
///
/// A single fold plan is drawn from `seed` and shared by every cell, so the
/// comparison between cells is paired. `base_spec` supplies every setting
/// except the variant.
pub fn ablate(
    ds: &Dataset,
    base_spec: &ModelSpec,
    categories: &[FeatureSet],
    variants: &[Variant],
    k: usize,
    seed: u64,
) -> Result<AblationReport> {
    if categories.is_empty() || variants.is_empty() {
        return Err(Error::Config("ablation needs at least one variant and one category".into()));
    }
    for &set in categories {
        if ds.manifest().indices(set).is_empty() {
            return Err(Error::Config(format!(
                "feature set '{set}' has no columns under this manifest"
            )));
        }
    }
    let plan = stratified_kfold(ds.y(), k, seed)?;

    let grid: Vec<(Variant, FeatureSet)> = variants
        .iter()
        .flat_map(|&v| categories.iter().map(move |&c| (v, c)))
        .collect();
    let cells = grid
        .into_par_iter()
        .map(|(variant, category)| {
            let spec = ModelSpec {
                variant,
                ..base_spec.clone()
            };
            cross_validate_with_plan(ds, category, &spec, &plan, seed)
                .map(|report| AblationCell {
                    variant,
                    category,
                    report,
                })
                .map_err(|e| Error::Cell {
                    variant: variant.to_string(),
                    category: category.to_string(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationReport { cells })
}
