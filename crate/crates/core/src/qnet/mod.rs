//! Convolutional Q-function approximator with hand-written backpropagation,
//! Adam, finite-difference gradient checking and binary checkpoints.

pub mod arch;
pub mod checkpoint;
pub mod gradcheck;
pub mod net;
pub mod train;

use thiserror::Error;

pub use arch::{Arch, LayerSpec};
pub use checkpoint::{load_params, load_params_for, save_params};
pub use gradcheck::{grad_check, grad_check_against, GradCheckConfig};
pub use net::{bytes_to_input, QParams, Real};
pub use train::{loss_and_grad, train_batch, AdamState, Batch};

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Deep copy of the online parameters into a target network.
pub fn sync_target<T: Real>(online: &QParams<T>) -> QParams<T> {
    online.clone()
}
