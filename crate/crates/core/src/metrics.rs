//! Confusion statistics and rank-based AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::Tensor;

/// Default decision threshold on the positive-class probability.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Scores for one held-out fold (or the average over folds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub loss: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

impl FoldMetrics {
    pub const COLUMNS: [&'static str; 6] = ["Loss", "Acc", "Precision", "Recall", "F1-score", "Auc"];

    pub fn values(&self) -> [f64; 6] {
        [self.loss, self.accuracy, self.precision, self.recall, self.f1, self.auc]
    }

    pub fn from_values(v: [f64; 6]) -> Self {
        FoldMetrics {
            loss: v[0],
            accuracy: v[1],
            precision: v[2],
            recall: v[3],
            f1: v[4],
            auc: v[5],
        }
    }

    /// Unweighted column means.
    pub fn mean(rows: &[FoldMetrics]) -> Result<FoldMetrics> {
        if rows.is_empty() {
            return Err(Error::Contract("cannot average zero folds".into()));
        }
        let mut sums = [0.0; 6];
        for r in rows {
            for (s, v) in sums.iter_mut().zip(r.values()) {
                *s += v;
            }
        }
        Ok(FoldMetrics::from_values(sums.map(|s| s / rows.len() as f64)))
    }
}

/// Thresholds the positive-class column (`probs[:, 1] >= threshold`).
pub fn confusion(probs: &Tensor, labels: &[u8], threshold: f64) -> Result<Confusion> {
    let (rows, cols) = probs.dims2()?;
    if cols != 2 {
        return Err(Error::Shape(format!("expected B×2 probabilities, got {:?}", probs.shape())));
    }
    if rows == 0 {
        return Err(Error::Contract("confusion on an empty batch".into()));
    }
    if rows != labels.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", rows, labels.len())));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let mut c = Confusion::default();
    for (row, &label) in probs.rows().zip(labels) {
        match (row[1] >= threshold, label == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Accuracy, precision, recall and F1 for the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a zero denominator forced precision, recall or F1 to 0.
    pub degenerate: bool,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn classification_metrics(c: &Confusion) -> Result<Classification> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Contract("confusion matrix is empty".into()));
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let (p, r) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
    let f1 = if p + r > 0.0 { Some(2.0 * p * r / (p + r)) } else { None };
    Ok(Classification {
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        precision: p,
        recall: r,
        f1: f1.unwrap_or(0.0),
        degenerate: precision.is_none() || recall.is_none() || f1.is_none(),
    })
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half, computed from average ranks (Mann–Whitney U).
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::Contract(format!("score {s} is not comparable")));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 {
        return Err(Error::Contract("AUC needs at least one positive label".into()));
    }
    if n_neg == 0 {
        return Err(Error::Contract("AUC needs at least one negative label".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 1-based average ranks of the positives. Ranks are kept doubled
    // so tied groups stay integral.
    let mut pos_rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let doubled_avg_rank = (i + 1 + j + 1) as u128;
        let pos_in_group = order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u128;
        pos_rank_sum2 += doubled_avg_rank * pos_in_group;
        i = j + 1;
    }
    let n_pos = n_pos as u128;
    // U = R_pos − n_pos(n_pos+1)/2, doubled.
    let u2 = pos_rank_sum2 - n_pos * (n_pos + 1);
    Ok(u2 as f64 / (2 * n_pos * n_neg as u128) as f64)
}
