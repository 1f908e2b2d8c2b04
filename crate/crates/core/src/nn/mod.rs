//! Numerical kernels with hand-written backward passes.

mod activation;
mod adam;
mod conv;
mod dense;
mod init;
mod loss;
mod pool;

pub use activation::{relu, relu_backward};
pub use adam::{adam_step, AdamState};
pub use conv::{causal_conv1d, causal_conv1d_backward, ConvGrads, ConvParams};
pub use dense::{dense, dense_backward, DenseGrads, DenseParams};
pub use init::he_normal;
pub use loss::{softmax, softmax_xent};
pub use pool::{global_avg_pool, global_avg_pool_backward};
