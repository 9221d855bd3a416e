//! Dense `f64` layers with hand-written backward passes, the pinball loss,
//! Adam, and finite-difference gradient checking.

mod adam;
pub mod grad_check;
mod layers;
mod loss;
mod tensor;

pub use adam::AdamState;
pub use layers::{
    batch_norm, batch_norm_backward, conv1d_causal, conv1d_causal_backward, conv1d_causal_batched,
    dense, dense_backward, embed_backward, embed_lookup, relu, relu_backward, BatchNormCache,
    BatchNormGrads, BatchNormState, ConvGrads, ConvParams, DenseGrads, DenseParams,
    EmbeddingTable, Mode, DAYS_PER_WEEK,
};
pub use loss::pinball_loss;
pub use tensor::Tensor;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("{op}: dimension `{dim}` mismatch (expected {expected}, got {actual})")]
    ShapeMismatch {
        op: &'static str,
        dim: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("batch_norm: training mode needs at least 2 rows, got {0}")]
    BatchTooSmall(usize),
    #[error("day-of-week index {0} outside 0..=6")]
    DayOutOfRange(usize),
    #[error("{0}")]
    InvalidArgument(String),
}
