use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::SeededRng;

pub const DEFAULT_K: usize = 10;
pub const MIN_K: usize = 2;

/// Fold index for every sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.indices_where(|f| f == fold)
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.indices_where(|f| f != fold)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    fn indices_where(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| keep(f))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Shuffles each class with `seed` and deals its samples round-robin into
/// `k` folds.
///
/// Dealing continues from where the previous class stopped (negatives
/// first, then positives), so fold sizes differ by at most one overall as
/// well as within each class.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < MIN_K {
        return Err(Error::Config(format!("k must be at least {MIN_K}, got {k}")));
    }
    let mut rng = SeededRng::new(seed);
    let mut assignments = vec![usize::MAX; labels.len()];
    let mut next = 0usize;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < k {
            return Err(Error::Contract(format!(
                "class {} has {} samples, fewer than k = {}",
                class,
                members.len(),
                k
            )));
        }
        rng.shuffle(&mut members);
        for idx in members {
            assignments[idx] = next;
            next = (next + 1) % k;
        }
    }
    if let Some(i) = assignments.iter().position(|&f| f == usize::MAX) {
        return Err(Error::Contract(format!(
            "label {} at row {} is not 0 or 1",
            labels[i],
            i + 1
        )));
    }
    Ok(FoldPlan { k, assignments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(neg: usize, pos: usize) -> Vec<u8> {
        let mut y = vec![0u8; neg];
        y.extend(vec![1u8; pos]);
        y
    }

    fn class_counts(plan: &FoldPlan, y: &[u8]) -> Vec<(usize, usize)> {
        let mut counts = vec![(0, 0); plan.k()];
        for (&f, &l) in plan.assignments().iter().zip(y) {
            if l == 1 {
                counts[f].1 += 1;
            } else {
                counts[f].0 += 1;
            }
        }
        counts
    }

    #[test]
    fn exact_divisibility() {
        let y = labels(20, 20);
        let plan = stratified_kfold(&y, 10, 1).unwrap();
        assert!(class_counts(&plan, &y).iter().all(|&c| c == (2, 2)));
    }

    #[test]
    fn full_size_class_counts() {
        // 5,168 per class: 516 or 517 of each class per fold, 1033 or 1034 overall.
        let y = labels(5168, 5168);
        let plan = stratified_kfold(&y, 10, 7).unwrap();
        assert!(plan.fold_sizes().iter().all(|s| [1033, 1034].contains(s)), "{:?}", plan.fold_sizes());
        for (neg, pos) in class_counts(&plan, &y) {
            assert!([516, 517].contains(&neg) && [516, 517].contains(&pos));
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let y = labels(30, 25);
        assert_eq!(stratified_kfold(&y, 5, 3).unwrap(), stratified_kfold(&y, 5, 3).unwrap());
        assert_ne!(stratified_kfold(&y, 5, 3).unwrap(), stratified_kfold(&y, 5, 4).unwrap());
    }

    #[test]
    fn too_few_samples() {
        let y = labels(20, 9);
        assert!(matches!(stratified_kfold(&y, 10, 0), Err(Error::Contract(_))));
        assert!(matches!(stratified_kfold(&labels(5, 5), 1, 0), Err(Error::Config(_))));
    }

    #[test]
    fn train_and_test_are_complementary() {
        let y = labels(13, 11);
        let plan = stratified_kfold(&y, 4, 2).unwrap();
        for f in 0..4 {
            let mut all = plan.train_indices(f);
            all.extend(plan.test_indices(f));
            all.sort_unstable();
            assert_eq!(all, (0..24).collect::<Vec<_>>());
        }
    }

    proptest! {
        #[test]
        fn partition_and_stratification(neg in 10usize..200, pos in 10usize..200, k in 2usize..11, seed in any::<u64>()) {
            let y = labels(neg, pos);
            let plan = stratified_kfold(&y, k, seed).unwrap();
            let mut seen = vec![0usize; y.len()];
            for f in 0..k {
                for i in plan.test_indices(f) {
                    seen[i] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            for (n, p) in class_counts(&plan, &y) {
                prop_assert!((n as f64 - neg as f64 / k as f64).abs() <= 1.0);
                prop_assert!((p as f64 - pos as f64 / k as f64).abs() <= 1.0);
            }
            let sizes = plan.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}
