//! Message-passing VTG surrogate: features, network, training and policy.

pub mod checkpoint;
pub mod features;
pub mod network;
pub mod policy;
pub mod train;

pub use checkpoint::{load_model, model_from_json, model_to_json, save_model};
pub use features::{encode_state, FeatureGraph, NodeRef, FEATURE_DIM};
pub use network::{Model, ModelConfig};
pub use policy::{choose, neural_action, BoundEstimator, EstimatorPolicy, ExactEstimator, VtgEstimator};
pub use train::{generate_training_set, loss_and_grad, samples_for_instance, train, TrainConfig, TrainOutcome, TrainingSample};
