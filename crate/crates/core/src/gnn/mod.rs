//! Unsupervised graph-convolutional relaxation solver.
//!
//! Two GCN layers map trainable node embeddings to one logit per node,
//!
//! ```text
//! p = sigmoid( Â · ReLU(Â · E · W1) · W2 )
//! ```
//!
//! and training minimizes the relaxed QUBO energy `pᵀQp` with Adam.
//! Gradients are derived by hand; there is no autodiff engine.

mod model;
mod train;

pub use model::{
    forward, loss_and_gradients, normalized_adjacency, propagation_matrix, Gradients, GnnModel,
    ProbabilityVector,
};
pub use train::{project, train_and_project, Adam, GnnConfig, GnnOutcome};
