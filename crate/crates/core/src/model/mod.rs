//! The two classifiers: a dense network (DPNN) and a single-layer 1-D
//! convolutional network, trained with softmax cross-entropy and Adam.

mod gradcheck;
mod network;
mod optim;
mod persist;
mod spec;
mod train;

pub use gradcheck::{grad_check, relative_error, GradCheck};
pub use network::{backward, build_model, cross_entropy, forward, one_hot, relu_margin, Activation, Layer, TrainedModel};
pub use optim::{adam_step, AdamState};
pub use persist::{ModelDocument, MODEL_FORMAT_VERSION};
pub use spec::{ModelSpec, Variant};
pub use train::{train, TrainHistory};
