//! Feedforward networks with trainable activations.

mod activation;
mod index;
mod memorize;
mod network;
mod train;

pub use activation::{activation_eval, activation_partials, ActivationKind, ScalarFn};
pub use index::{decode, encode, param_count, Decomposed, HiddenLayer, HiddenOffsets, MultiIndex, ReadoutOffsets};
pub use memorize::{hypernetwork_size, memorize_sequence, Memorizer};
pub use network::{Network, Trace};
pub use train::{dataset_loss, init_network, loss_and_grad, train_from, train_regression, Loss, TrainConfig, Trained};
