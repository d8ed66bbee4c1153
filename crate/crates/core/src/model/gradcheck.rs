use super::network::{build_model, cross_entropy, forward, loss_and_gradients, TrainedModel};
use super::spec::ModelSpec;
use crate::error::{Error, Result};
use crate::numkernel::{SeededRng, Tensor};

/// `|a − b| / max(|a|, |b|, 1)`: relative for large values, absolute below 1.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Compares analytic gradients with central finite differences over every
/// parameter of a model.
#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    pub epsilon: f64,
    /// Added to every analytic gradient entry before comparison. Non-zero
    /// only when exercising the failure path.
    pub corruption: f64,
}

impl Default for GradCheck {
    fn default() -> Self {
        GradCheck {
            epsilon: 1e-5,
            corruption: 0.0,
        }
    }
}

impl GradCheck {
    /// Maximum [`relative_error`] between backprop and finite differences.
    pub fn run(&self, model: &TrainedModel, batch: &Tensor, targets: &Tensor) -> Result<f64> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        let (_, _, analytic) = loss_and_gradients(model, batch, targets)?;
        let loss_at = |m: &TrainedModel| -> Result<f64> { cross_entropy(&forward(m, batch)?, targets) };

        let mut probe = model.clone();
        let mut worst: f64 = 0.0;
        for (block, grad) in analytic.iter().enumerate() {
            for j in 0..grad.len() {
                let original = probe.parameters()[block].data()[j];
                probe.parameters_mut()[block].data_mut()[j] = original + self.epsilon;
                let plus = loss_at(&probe)?;
                probe.parameters_mut()[block].data_mut()[j] = original - self.epsilon;
                let minus = loss_at(&probe)?;
                probe.parameters_mut()[block].data_mut()[j] = original;

                let numeric = (plus - minus) / (2.0 * self.epsilon);
                worst = worst.max(relative_error(grad.data()[j] + self.corruption, numeric));
            }
        }
        Ok(worst)
    }
}

/// Builds a model from `spec.seed` and checks its gradients on `batch`.
pub fn grad_check(spec: &ModelSpec, batch: &Tensor, targets: &Tensor, epsilon: f64) -> Result<f64> {
    let (_, width) = batch.dims2()?;
    let model = build_model(spec, width, &mut SeededRng::new(spec.seed))?;
    GradCheck {
        epsilon,
        ..GradCheck::default()
    }
    .run(&model, batch, targets)
}
