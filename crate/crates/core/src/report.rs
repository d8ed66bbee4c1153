//! Serialized outputs: per-cell fold tables, the ablation summary and the
//! run manifest.
//!
//! Fold tables are human-readable CSV with 4 decimals. JSON documents use
//! serde_json's shortest round-trip float formatting, so every value parses
//! back to the identical `f64`.

use serde::{Deserialize, Serialize};

use crate::dataio::FeatureSet;
use crate::error::{Error, Result};
use crate::metrics::FoldMetrics;
use crate::model::Variant;
use crate::pipeline::{AblationReport, CvReport};

pub const SUMMARY_FILE: &str = "ablation_summary.json";
pub const RUN_MANIFEST_FILE: &str = "run.json";

pub fn fold_table_name(variant: Variant, category: FeatureSet) -> String {
    format!("cv_{}_{}.csv", variant.as_str(), category.as_str())
}

pub fn model_file_name(variant: Variant, category: FeatureSet) -> String {
    format!("model_{}_{}.json", variant.as_str(), category.as_str())
}

/// Published random-forest scores on the same task, carried as a fixed
/// annotation in every summary. Never recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

pub const RANDOM_FOREST_REFERENCE: ReferenceScores = ReferenceScores {
    precision: 0.89,
    recall: 0.82,
    f1: 0.85,
    auc: 0.97,
};

/// `Folds,Loss,Acc,Precision,Recall,F1-score,Auc`, one row per fold and a
/// final `Ave` row.
pub fn fold_table_csv(report: &CvReport) -> String {
    let mut out = String::from("Folds");
    for col in FoldMetrics::COLUMNS {
        out.push(',');
        out.push_str(col);
    }
    out.push('\n');
    let labelled = report
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| ((i + 1).to_string(), r))
        .chain(std::iter::once(("Ave".to_string(), &report.average)));
    for (label, metrics) in labelled {
        out.push_str(&label);
        for v in metrics.values() {
            out.push_str(&format!(",{v:.4}"));
        }
        out.push('\n');
    }
    out
}

/// Parsed form of [`fold_table_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct FoldTable {
    pub rows: Vec<FoldMetrics>,
    pub average: FoldMetrics,
}

pub fn parse_fold_table(text: &str) -> Result<FoldTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Schema("empty fold table".into()))?;
    let expected: Vec<&str> = std::iter::once("Folds").chain(FoldMetrics::COLUMNS).collect();
    if header.split(',').collect::<Vec<_>>() != expected {
        return Err(Error::Schema(format!("unexpected fold table header '{header}'")));
    }
    let mut rows = Vec::new();
    let mut average = None;
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected 7 fields, found {}", cells.len()),
            });
        }
        let mut values = [0.0; 6];
        for (j, cell) in cells[1..].iter().enumerate() {
            values[j] = cell.parse().map_err(|_| Error::Parse {
                row,
                column: FoldMetrics::COLUMNS[j].to_string(),
                message: format!("'{cell}' is not a number"),
            })?;
        }
        let metrics = FoldMetrics::from_values(values);
        if cells[0] == "Ave" {
            average = Some(metrics);
        } else if cells[0] == (rows.len() + 1).to_string() && average.is_none() {
            rows.push(metrics);
        } else {
            return Err(Error::Parse {
                row,
                column: "Folds".into(),
                message: format!("unexpected fold label '{}'", cells[0]),
            });
        }
    }
    let average = average.ok_or_else(|| Error::Schema("fold table has no Ave row".into()))?;
    Ok(FoldTable { rows, average })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub variant: Variant,
    pub category: FeatureSet,
    pub k: usize,
    pub table: String,
    pub average: FoldMetrics,
    pub flagged_folds: Vec<usize>,
}

/// Categories of one variant ordered by a metric, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryOrder {
    pub variant: Variant,
    pub by_auc: Vec<FeatureSet>,
    pub by_accuracy: Vec<FeatureSet>,
}

/// Averaged metrics for every grid cell: the data behind the comparison figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub cells: Vec<SummaryCell>,
    pub category_order: Vec<CategoryOrder>,
    pub random_forest_reference: ReferenceScores,
}

fn order_by(cells: &[&SummaryCell], key: impl Fn(&FoldMetrics) -> f64) -> Vec<FeatureSet> {
    let mut sorted: Vec<&SummaryCell> = cells.to_vec();
    // Stable sort keeps request order among exact ties.
    sorted.sort_by(|a, b| key(&b.average).total_cmp(&key(&a.average)));
    sorted.iter().map(|c| c.category).collect()
}

impl AblationSummary {
    pub fn from_report(report: &AblationReport) -> Self {
        let cells: Vec<SummaryCell> = report
            .cells
            .iter()
            .map(|c| SummaryCell {
                variant: c.variant,
                category: c.category,
                k: c.report.meta.k,
                table: fold_table_name(c.variant, c.category),
                average: c.report.average,
                flagged_folds: c.report.meta.flagged_folds.clone(),
            })
            .collect();
        let mut variants: Vec<Variant> = cells.iter().map(|c| c.variant).collect();
        variants.dedup();
        let category_order = variants
            .into_iter()
            .map(|variant| {
                let mine: Vec<&SummaryCell> = cells.iter().filter(|c| c.variant == variant).collect();
                CategoryOrder {
                    variant,
                    by_auc: order_by(&mine, |m| m.auc),
                    by_accuracy: order_by(&mine, |m| m.accuracy),
                }
            })
            .collect();
        AblationSummary {
            cells,
            category_order,
            random_forest_reference: RANDOM_FOREST_REFERENCE,
        }
    }

    pub fn get(&self, variant: Variant, category: FeatureSet) -> Option<&SummaryCell> {
        self.cells.iter().find(|c| c.variant == variant && c.category == category)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub fold_seed: u64,
    pub model_seed: u64,
    pub dataset_fingerprint: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
