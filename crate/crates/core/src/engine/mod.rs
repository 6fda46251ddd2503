//! Dense numeric core.
//!
//! Every layer is a pair of free functions: a forward pass that returns its
//! output together with a cache, and a backward pass that consumes the cache
//! and an upstream gradient and returns a [`LayerGrad`]. Tensors are
//! row-major `f64` buffers; feature maps use `H x W x C` layout and
//! convolution filters use `f x f x Cin x Cout`.

mod adam;
pub mod checkpoint;
mod layers;
mod loss;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, dropout, dropout_backward,
    embedding_backward, embedding_backward_into, embedding_forward, maxpool2d_backward, maxpool2d_forward, same_padding,
    Conv2dCache, DenseCache, DropoutMask, LayerGrad, MaxPoolCache,
};
pub use loss::{log_softmax, mse_consistency, softmax, softmax_cross_entropy};
pub use tensor::Tensor;
