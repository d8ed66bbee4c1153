//! Stratified k-fold cross-validation and the variant × feature-set grid.
//!
//! Folds (and grid cells) are independent: each owns its standardizer,
//! model and generator, so they run on the rayon pool and are reassembled
//! by index. Results do not depend on scheduling.

mod ablate;
mod cv;
mod folds;

pub use ablate::{ablate, AblationCell, AblationReport};
pub use cv::{cross_validate, cross_validate_with_plan, fit_full, CvMeta, CvReport};
pub use folds::{stratified_kfold, FoldPlan, DEFAULT_K, MIN_K};
