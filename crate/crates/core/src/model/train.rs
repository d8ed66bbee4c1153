use serde::{Deserialize, Serialize};

use super::network::{build_model, loss_and_gradients, one_hot, TrainedModel};
use super::optim::{adam_step, AdamState};
use super::spec::ModelSpec;
use crate::error::{Error, Result};
use crate::numkernel::{SeededRng, Tensor};

/// End-of-epoch training loss and accuracy, one entry per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub per_epoch_loss: Vec<f64>,
    pub per_epoch_accuracy: Vec<f64>,
}

/// Builds a model from `rng` and runs `spec.epochs` epochs of mini-batch Adam.
///
/// Each epoch reshuffles the sample order with `rng`; the last batch may be
/// short. The recorded loss and accuracy are sample-weighted means over the
/// epoch's batches, measured before each batch's update.
pub fn train(spec: &ModelSpec, x: &Tensor, y: &[u8], rng: &mut SeededRng) -> Result<(TrainedModel, TrainHistory)> {
    spec.validate()?;
    let (n, width) = x.dims2()?;
    if n == 0 {
        return Err(Error::Contract("training set is empty".into()));
    }
    if y.len() != n {
        return Err(Error::Shape(format!("{} rows but {} labels", n, y.len())));
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::Contract(format!("label {bad} is not 0 or 1")));
    }

    let mut model = build_model(spec, width, rng)?;
    let mut state = AdamState::new(&model.parameters());
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = TrainHistory {
        per_epoch_loss: Vec::with_capacity(spec.epochs),
        per_epoch_accuracy: Vec::with_capacity(spec.epochs),
    };

    for _ in 0..spec.epochs {
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(spec.batch_size) {
            let batch = x.select_rows(chunk);
            let labels: Vec<u8> = chunk.iter().map(|&i| y[i]).collect();
            let (loss, probs, grads) = loss_and_gradients(&model, &batch, &one_hot(&labels))?;
            loss_sum += loss * chunk.len() as f64;
            correct += probs
                .rows()
                .zip(&labels)
                .filter(|(p, &l)| u8::from(p[1] >= p[0]) == l)
                .count();
            adam_step(spec, &mut model.parameters_mut(), &grads, &mut state)?;
        }
        history.per_epoch_loss.push(loss_sum / n as f64);
        history.per_epoch_accuracy.push(correct as f64 / n as f64);
    }
    Ok((model, history))
}
