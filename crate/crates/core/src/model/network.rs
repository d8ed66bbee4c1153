use serde::{Deserialize, Serialize};

use super::spec::{ModelSpec, Variant};
use crate::error::{Error, Result};
use crate::numkernel::{conv1d_backward, conv1d_forward, matmul, relu, relu_grad, softmax, SeededRng, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
}

/// One parameter block of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Layer {
    /// `z = a · weights + bias` with `weights` stored `in × out`.
    Dense {
        weights: Tensor,
        bias: Tensor,
        activation: Activation,
    },
    /// Stride-1 valid convolution over a `width × channels` view of each
    /// row, followed by ReLU and row-major flattening to `positions · filters`.
    Conv1d { kernels: Tensor, bias: Tensor },
}

impl Layer {
    fn params(&self) -> [&Tensor; 2] {
        match self {
            Layer::Dense { weights, bias, .. } => [weights, bias],
            Layer::Conv1d { kernels, bias } => [kernels, bias],
        }
    }

    fn params_mut(&mut self) -> [&mut Tensor; 2] {
        match self {
            Layer::Dense { weights, bias, .. } => [weights, bias],
            Layer::Conv1d { kernels, bias } => [kernels, bias],
        }
    }
}

/// A network ready for [`forward`]; `f(x) = f_n(…f_2(f_1(x)))` over `layers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub input_width: usize,
    pub layers: Vec<Layer>,
}

impl TrainedModel {
    /// Parameters in layer order, each layer contributing `[weights, bias]`.
    pub fn parameters(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn parameter_shapes(&self) -> Vec<Vec<usize>> {
        self.parameters().iter().map(|t| t.shape().to_vec()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    /// Positive-class probability for each row.
    pub fn predict_positive(&self, batch: &Tensor) -> Result<Vec<f64>> {
        let probs = forward(self, batch)?;
        Ok(probs.rows().map(|r| r[1]).collect())
    }
}

/// Parameter shapes implied by `spec` and `input_width`.
pub(crate) fn expected_shapes(spec: &ModelSpec, input_width: usize) -> Result<Vec<Vec<usize>>> {
    spec.validate()?;
    if input_width == 0 {
        return Err(Error::Config("input_width must be positive".into()));
    }
    let mut shapes = Vec::new();
    match spec.variant {
        Variant::Dpnn => {
            let mut fan_in = input_width;
            for _ in 0..spec.hidden_layers {
                shapes.push(vec![fan_in, spec.hidden_units]);
                shapes.push(vec![spec.hidden_units]);
                fan_in = spec.hidden_units;
            }
            shapes.push(vec![fan_in, spec.output_units]);
            shapes.push(vec![spec.output_units]);
        }
        Variant::Conv1d => {
            if input_width < spec.conv_kernel_width {
                return Err(Error::Config(format!(
                    "input width {} is smaller than conv kernel width {}",
                    input_width, spec.conv_kernel_width
                )));
            }
            let positions = input_width - spec.conv_kernel_width + 1;
            shapes.push(vec![spec.conv_filters, spec.conv_kernel_width, 1]);
            shapes.push(vec![spec.conv_filters]);
            shapes.push(vec![positions * spec.conv_filters, spec.output_units]);
            shapes.push(vec![spec.output_units]);
        }
    }
    Ok(shapes)
}

fn glorot_uniform(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut SeededRng) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.uniform(-limit, limit)).collect();
    Tensor::new(shape.to_vec(), data).expect("shape and length agree")
}

/// Fresh network with Glorot-uniform weights drawn from `rng` and zero biases.
pub fn build_model(spec: &ModelSpec, input_width: usize, rng: &mut SeededRng) -> Result<TrainedModel> {
    let shapes = expected_shapes(spec, input_width)?;
    let mut layers = Vec::with_capacity(shapes.len() / 2);
    for (i, pair) in shapes.chunks(2).enumerate() {
        let (wshape, bshape) = (&pair[0], &pair[1]);
        let bias = Tensor::zeros(bshape);
        let is_output = i == shapes.len() / 2 - 1;
        let layer = match (spec.variant, i) {
            (Variant::Conv1d, 0) => {
                let (filters, width, channels) = (wshape[0], wshape[1], wshape[2]);
                let kernels = glorot_uniform(wshape, width * channels, width * filters, rng);
                Layer::Conv1d { kernels, bias }
            }
            _ => Layer::Dense {
                weights: glorot_uniform(wshape, wshape[0], wshape[1], rng),
                bias,
                activation: if is_output {
                    Activation::Softmax
                } else {
                    Activation::Relu
                },
            },
        };
        layers.push(layer);
    }
    Ok(TrainedModel {
        spec: spec.clone(),
        input_width,
        layers,
    })
}

fn add_bias(z: &mut Tensor, bias: &Tensor) {
    let cols = bias.len();
    for row in z.data_mut().chunks_mut(cols) {
        for (v, b) in row.iter_mut().zip(bias.data()) {
            *v += b;
        }
    }
}

fn conv_layer_forward(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (batch, width) = input.dims2()?;
    let channels = kernels.shape()[2];
    let mut out = Vec::new();
    let mut out_width = 0;
    for b in 0..batch {
        let sample = Tensor::new(vec![width / channels, channels], input.row(b).to_vec())?;
        let z = conv1d_forward(&sample, kernels, bias)?;
        out_width = z.len();
        out.extend(z.into_data());
    }
    if batch == 0 {
        let positions = (width / channels + 1).saturating_sub(kernels.shape()[1]);
        out_width = positions * kernels.shape()[0];
    }
    Tensor::new(vec![batch, out_width], out)
}

/// Intermediate values of one forward pass, kept for backpropagation.
struct Trace {
    /// Input to each layer.
    inputs: Vec<Tensor>,
    /// Pre-activation output of each layer.
    preacts: Vec<Tensor>,
    probs: Tensor,
}

fn check_batch(model: &TrainedModel, batch: &Tensor) -> Result<()> {
    let (_, width) = batch.dims2()?;
    if width != model.input_width {
        return Err(Error::Shape(format!(
            "batch has {} columns, model expects {}",
            width, model.input_width
        )));
    }
    Ok(())
}

fn forward_trace(model: &TrainedModel, batch: &Tensor) -> Result<Trace> {
    check_batch(model, batch)?;
    let mut inputs = Vec::with_capacity(model.layers.len());
    let mut preacts = Vec::with_capacity(model.layers.len());
    let mut a = batch.clone();
    let mut probs = None;
    for layer in &model.layers {
        let (z, act) = match layer {
            Layer::Dense {
                weights,
                bias,
                activation,
            } => {
                let mut z = matmul(&a, weights)?;
                add_bias(&mut z, bias);
                (z, *activation)
            }
            Layer::Conv1d { kernels, bias } => (conv_layer_forward(&a, kernels, bias)?, Activation::Relu),
        };
        let next = match act {
            Activation::Relu => relu(&z),
            Activation::Softmax => {
                let p = softmax(&z)?;
                probs = Some(p.clone());
                p
            }
        };
        inputs.push(std::mem::replace(&mut a, next));
        preacts.push(z);
    }
    let probs = probs.ok_or_else(|| Error::Config("network has no softmax output layer".into()))?;
    Ok(Trace {
        inputs,
        preacts,
        probs,
    })
}

/// Class probabilities, one `[p_neg, p_pos]` row per input row.
pub fn forward(model: &TrainedModel, batch: &Tensor) -> Result<Tensor> {
    Ok(forward_trace(model, batch)?.probs)
}

/// Smallest |pre-activation| feeding any ReLU for `batch`. Finite
/// differences are only meaningful when perturbations stay well inside
/// this distance of the kink.
pub fn relu_margin(model: &TrainedModel, batch: &Tensor) -> Result<f64> {
    let trace = forward_trace(model, batch)?;
    let mut margin = f64::INFINITY;
    for (layer, z) in model.layers.iter().zip(&trace.preacts) {
        let relu = match layer {
            Layer::Dense { activation, .. } => *activation == Activation::Relu,
            Layer::Conv1d { .. } => true,
        };
        if relu {
            margin = z.data().iter().fold(margin, |m, v| m.min(v.abs()));
        }
    }
    Ok(margin)
}

/// One-hot `B × 2` targets from 0/1 labels.
pub fn one_hot(labels: &[u8]) -> Tensor {
    let mut t = Tensor::zeros(&[labels.len(), 2]);
    for (i, &y) in labels.iter().enumerate() {
        t.data_mut()[i * 2 + usize::from(y.min(1))] = 1.0;
    }
    t
}

const PROB_FLOOR: f64 = 1e-12;

/// Mean negative log-likelihood of the targets, probabilities clamped to
/// `[1e-12, 1]`.
///
/// Targets are normally one-hot; soft rows are accepted and contribute
/// `−Σ_c t_c ln p_c`.
pub fn cross_entropy(probs: &Tensor, targets: &Tensor) -> Result<f64> {
    if probs.shape() != targets.shape() {
        return Err(Error::Shape(format!(
            "cross_entropy: probs {:?} vs targets {:?}",
            probs.shape(),
            targets.shape()
        )));
    }
    let (batch, _) = probs.dims2()?;
    if batch == 0 {
        return Err(Error::Contract("cross_entropy on an empty batch".into()));
    }
    let total: f64 = probs
        .data()
        .iter()
        .zip(targets.data())
        .filter(|(_, &t)| t != 0.0)
        .map(|(&p, &t)| -t * p.clamp(PROB_FLOOR, 1.0).ln())
        .sum();
    Ok(total / batch as f64)
}

/// Loss, probabilities and one gradient per parameter block (same order as
/// [`TrainedModel::parameters`]).
pub(crate) fn loss_and_gradients(
    model: &TrainedModel,
    batch: &Tensor,
    targets: &Tensor,
) -> Result<(f64, Tensor, Vec<Tensor>)> {
    let trace = forward_trace(model, batch)?;
    let loss = cross_entropy(&trace.probs, targets)?;
    let (b, _) = batch.dims2()?;

    // Fused softmax + cross-entropy: dL/dz = (p − t) / B.
    let scale = 1.0 / b as f64;
    let mut delta = Tensor::new(
        trace.probs.shape().to_vec(),
        trace
            .probs
            .data()
            .iter()
            .zip(targets.data())
            .map(|(p, t)| (p - t) * scale)
            .collect(),
    )?;

    let mut grads: Vec<Tensor> = Vec::with_capacity(model.layers.len() * 2);
    for (idx, layer) in model.layers.iter().enumerate().rev() {
        let input = &trace.inputs[idx];
        let grad_input = match layer {
            Layer::Dense { weights, .. } => {
                let gw = matmul(&input.transpose()?, &delta)?;
                let (_, cols) = delta.dims2()?;
                let mut gb = vec![0.0; cols];
                for row in delta.rows() {
                    for (acc, v) in gb.iter_mut().zip(row) {
                        *acc += v;
                    }
                }
                grads.push(Tensor::new(vec![cols], gb)?);
                grads.push(gw);
                if idx > 0 {
                    Some(matmul(&delta, &weights.transpose()?)?)
                } else {
                    None
                }
            }
            Layer::Conv1d { kernels, bias } => {
                let (rows, width) = input.dims2()?;
                let channels = kernels.shape()[2];
                let filters = kernels.shape()[0];
                let mut gk = Tensor::zeros(kernels.shape());
                let mut gb = Tensor::zeros(bias.shape());
                let mut gx = Vec::with_capacity(rows * width);
                for r in 0..rows {
                    let sample = Tensor::new(vec![width / channels, channels], input.row(r).to_vec())?;
                    let up_row = delta.row(r);
                    let upstream = Tensor::new(vec![up_row.len() / filters, filters], up_row.to_vec())?;
                    let g = conv1d_backward(&sample, kernels, &upstream)?;
                    for (acc, v) in gk.data_mut().iter_mut().zip(g.kernels.data()) {
                        *acc += v;
                    }
                    for (acc, v) in gb.data_mut().iter_mut().zip(g.bias.data()) {
                        *acc += v;
                    }
                    gx.extend(g.input.into_data());
                }
                grads.push(gb);
                grads.push(gk);
                if idx > 0 {
                    Some(Tensor::new(vec![rows, width], gx)?)
                } else {
                    None
                }
            }
        };
        if let Some(g) = grad_input {
            // Every non-output layer is followed by ReLU.
            let mask = relu_grad(&trace.preacts[idx - 1]);
            let data = g.data().iter().zip(mask.data()).map(|(a, m)| a * m).collect();
            delta = Tensor::new(g.shape().to_vec(), data)?;
        }
    }
    grads.reverse();
    Ok((loss, trace.probs, grads))
}

/// Exact gradients of `cross_entropy(forward(model, batch), targets)`.
pub fn backward(model: &TrainedModel, batch: &Tensor, targets: &Tensor) -> Result<Vec<Tensor>> {
    if targets.dims2()? != (batch.dims2()?.0, 2) {
        return Err(Error::Shape(format!(
            "targets {:?} do not match batch {:?}",
            targets.shape(),
            batch.shape()
        )));
    }
    Ok(loss_and_gradients(model, batch, targets)?.2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_batch(rows: usize, cols: usize, seed: u64) -> Tensor {
        let mut rng = SeededRng::new(seed);
        Tensor::new(vec![rows, cols], (0..rows * cols).map(|_| rng.normal()).collect()).unwrap()
    }

    #[test]
    fn dpnn_default_shapes() {
        let m = build_model(&ModelSpec::default(), 45, &mut SeededRng::new(0)).unwrap();
        assert_eq!(m.parameter_shapes(), vec![vec![45, 16], vec![16], vec![16, 2], vec![2]]);
    }

    #[test]
    fn dpnn_deeper_shapes() {
        let spec = ModelSpec {
            hidden_layers: 3,
            ..ModelSpec::default()
        };
        let m = build_model(&spec, 10, &mut SeededRng::new(0)).unwrap();
        assert_eq!(
            m.parameter_shapes(),
            vec![vec![10, 16], vec![16], vec![16, 16], vec![16], vec![16, 16], vec![16], vec![16, 2], vec![2]]
        );
    }

    #[test]
    fn conv_default_shapes() {
        let spec = ModelSpec::with_variant(Variant::Conv1d);
        let m = build_model(&spec, 45, &mut SeededRng::new(0)).unwrap();
        assert_eq!(m.parameter_shapes(), vec![vec![16, 3, 1], vec![16], vec![688, 2], vec![2]]);
    }

    #[test]
    fn conv_rejects_narrow_input() {
        let spec = ModelSpec::with_variant(Variant::Conv1d);
        assert!(matches!(
            build_model(&spec, 2, &mut SeededRng::new(0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn build_is_deterministic() {
        for variant in Variant::ALL {
            let spec = ModelSpec::with_variant(variant);
            let a = build_model(&spec, 45, &mut SeededRng::new(9)).unwrap();
            let b = build_model(&spec, 45, &mut SeededRng::new(9)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn glorot_bounds() {
        let m = build_model(&ModelSpec::default(), 45, &mut SeededRng::new(1)).unwrap();
        let limit = (6.0f64 / 61.0).sqrt();
        assert!(m.parameters()[0].data().iter().all(|w| w.abs() <= limit));
        assert!(m.parameters()[1].data().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn forward_rows_are_distributions() {
        for variant in Variant::ALL {
            let m = build_model(&ModelSpec::with_variant(variant), 45, &mut SeededRng::new(2)).unwrap();
            let p = forward(&m, &random_batch(7, 45, 3)).unwrap();
            assert_eq!(p.shape(), &[7, 2]);
            for row in p.rows() {
                assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn forward_empty_batch() {
        for variant in Variant::ALL {
            let m = build_model(&ModelSpec::with_variant(variant), 45, &mut SeededRng::new(2)).unwrap();
            let p = forward(&m, &Tensor::zeros(&[0, 45])).unwrap();
            assert_eq!(p.shape(), &[0, 2]);
        }
    }

    #[test]
    fn forward_width_mismatch() {
        let m = build_model(&ModelSpec::default(), 45, &mut SeededRng::new(2)).unwrap();
        assert!(matches!(forward(&m, &Tensor::zeros(&[1, 44])), Err(Error::Shape(_))));
    }

    #[test]
    fn zeroed_network_is_uniform() {
        for variant in Variant::ALL {
            let mut m = build_model(&ModelSpec::with_variant(variant), 45, &mut SeededRng::new(2)).unwrap();
            for p in m.parameters_mut() {
                p.data_mut().fill(0.0);
            }
            let p = forward(&m, &random_batch(3, 45, 4)).unwrap();
            assert!(p.data().iter().all(|&v| v == 0.5));
        }
    }

    #[test]
    fn relu_margin_ignores_the_output_layer() {
        let mut m = build_model(&ModelSpec::default(), 3, &mut SeededRng::new(5)).unwrap();
        let x = random_batch(2, 3, 6);
        let w = m.parameters()[0].clone();
        let mut expected = f64::INFINITY;
        for r in 0..2 {
            for j in 0..16 {
                let z: f64 = (0..3).map(|i| x.data()[r * 3 + i] * w.data()[i * 16 + j]).sum();
                expected = expected.min(z.abs());
            }
        }
        assert!((relu_margin(&m, &x).unwrap() - expected).abs() < 1e-15);
        // Zero output logits do not count; a zero hidden bias with zero weights does.
        m.parameters_mut()[2].data_mut().fill(0.0);
        assert!((relu_margin(&m, &x).unwrap() - expected).abs() < 1e-15);
        m.parameters_mut()[0].data_mut().fill(0.0);
        assert_eq!(relu_margin(&m, &x).unwrap(), 0.0);
    }

    #[test]
    fn cross_entropy_cases() {
        let perfect = Tensor::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(cross_entropy(&perfect, &one_hot(&[1, 0])).unwrap(), 0.0);

        let uniform = Tensor::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert!((cross_entropy(&uniform, &one_hot(&[1])).unwrap() - 2f64.ln()).abs() < 1e-15);

        let mixed = Tensor::from_rows(&[vec![0.25, 0.75], vec![0.5, 0.5]]).unwrap();
        let expected = (-(0.75f64.ln()) - 0.5f64.ln()) / 2.0;
        assert!((cross_entropy(&mixed, &one_hot(&[1, 0])).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn cross_entropy_clamps_and_rejects_empty() {
        let zero = Tensor::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let loss = cross_entropy(&zero, &one_hot(&[1])).unwrap();
        assert!((loss - (-(1e-12f64).ln())).abs() < 1e-9);
        assert!(matches!(
            cross_entropy(&Tensor::zeros(&[0, 2]), &Tensor::zeros(&[0, 2])),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn stationary_point_has_zero_gradient() {
        // Zero weights with output bias [0, 1000] give probabilities exactly [0, 1].
        for variant in Variant::ALL {
            let mut m = build_model(&ModelSpec::with_variant(variant), 9, &mut SeededRng::new(5)).unwrap();
            for p in m.parameters_mut() {
                p.data_mut().fill(0.0);
            }
            let last = m.parameters_mut().pop().unwrap();
            last.data_mut()[1] = 1000.0;
            let batch = random_batch(4, 9, 6);
            let targets = one_hot(&[1, 1, 1, 1]);
            assert_eq!(forward(&m, &batch).unwrap(), targets);
            let grads = backward(&m, &batch, &targets).unwrap();
            assert!(grads.iter().all(|g| g.data().iter().all(|&v| v == 0.0)));
        }
    }

    #[test]
    fn backward_shape_errors() {
        let m = build_model(&ModelSpec::default(), 5, &mut SeededRng::new(0)).unwrap();
        assert!(backward(&m, &random_batch(3, 5, 1), &one_hot(&[0, 1])).is_err());
        assert!(backward(&m, &random_batch(2, 4, 1), &one_hot(&[0, 1])).is_err());
    }
}
