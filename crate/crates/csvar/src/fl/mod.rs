//! Desk-scale federated learning on the reference MLP classifier.

mod model;
mod sim;

pub use model::{forward, init_model, loss_and_grad, per_example_losses, Gradients, ModelParams};
pub use sim::{
    evaluate_accuracy, fedavg, local_train, per_sample_losses, reports_to_csv, run_federated,
    run_federated_with_checkpoints, write_reports_csv, FederatedRun, Protection, RoundReport,
    TrainConfig,
};
