//! Deterministic dense numeric primitives.
//!
//! Everything is 64-bit floating point and single-threaded; all operations
//! are pure functions of their inputs.

mod ops;
mod rng;
mod tensor;

pub use ops::{conv1d_backward, conv1d_forward, matmul, relu, relu_grad, softmax, Conv1dGrads};
pub use rng::SeededRng;
pub use tensor::Tensor;
