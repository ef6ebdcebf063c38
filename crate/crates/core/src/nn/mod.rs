//! Small deterministic neural-network engine in 64-bit floats: tensors, the
//! LSTM layer, word attention, the sigmoid output head, binary cross-entropy
//! and Adam. Gradients are derived by hand for this fixed architecture.

pub mod adam;
pub mod attention;
pub mod dense;
pub mod lstm;
pub mod network;
pub mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use attention::{attention_forward, AttentionParams};
pub use dense::{bce_loss, dense_sigmoid_forward, PredictionVector};
pub use lstm::{lstm_cell_forward, lstm_sequence_forward, DropoutMasks, LstmParams};
pub use network::{backward, forward, forward_with_cache, ForwardCache, ModelParams, PAD_INDEX};
pub use tensor::{glorot_init, Matrix, Vector};
