//! Round-based federated training: local SGD per client on that round's
//! protected inputs, sample-weighted averaging at the server, evaluation
//! on a held-out test set.
//!
//! Seed domains (all folded from the master seed with `mix_seed`):
//! tag 1 = model init, tag 2 = per-client batch order (round, client),
//! tag 3 = per-image DP noise (round, image index).

use crate::data::{ClientPartition, LabeledDataset, VariantSet};
use crate::error::{Error, Result};
use crate::fl::model::{
    init_model, loss_and_grad, per_example_losses, ModelParams,
};
use crate::shuffle::{gaussian_obfuscate, mix_seed, permutation, ShuffleMode};
use crate::tensor::ImageTensor;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

const TAG_INIT: u64 = 1;
const TAG_BATCH: u64 = 2;
const TAG_DP: u64 = 3;

/// Input protection applied before local training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Protection {
    /// Raw images (vanilla federated learning).
    None,
    /// Gaussian pixel noise, re-drawn every round.
    Dp { sigma: f64 },
    /// Pre-generated per-epoch shuffled variants; round r uses epoch
    /// `r mod generated_epochs`.
    Csvar { mode: ShuffleMode },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub rounds: usize,
    pub clients: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub protection: Protection,
    pub master_seed: u64,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidConfig("hidden must be >= 1".into()));
        }
        if self.clients == 0 {
            return Err(Error::EmptyClientList);
        }
        Ok(())
    }
}

/// One server round's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub test_accuracy: f64,
    pub mean_train_loss: f64,
    pub client_sample_counts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FederatedRun {
    pub reports: Vec<RoundReport>,
    pub model: ModelParams,
}

/// Flatten images to normalized f64 rows (value / 255, applied after any
/// obfuscation).
fn normalize_images(images: &[&ImageTensor]) -> Vec<f64> {
    let mut out = Vec::new();
    for img in images {
        out.extend(img.data().iter().map(|&v| v as f64 / 255.0));
    }
    out
}

/// `local_epochs` passes of seeded mini-batch SGD over one client's data.
/// Returns the updated parameters and the mean per-sample training loss
/// observed across all batches.
pub fn local_train(
    params: &ModelParams,
    images: &[&ImageTensor],
    labels: &[u32],
    config: &TrainConfig,
    seed: u64,
) -> Result<(ModelParams, f64)> {
    config.validate()?;
    if images.len() != labels.len() || images.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "client data has {} images and {} labels",
            images.len(),
            labels.len()
        )));
    }
    let n = images.len();
    let d = params.input_dim();
    let x = normalize_images(images);
    if x.len() != n * d {
        return Err(Error::ShapeMismatch(format!(
            "image shape product {} does not match model input_dim {d}",
            x.len() / n
        )));
    }

    let mut model = params.clone();
    let mut loss_sum = 0.0f64;
    let mut loss_count = 0usize;
    let mut xb = Vec::new();
    let mut yb = Vec::new();
    for epoch in 0..config.local_epochs {
        let order = permutation(n, mix_seed(seed, &[epoch as u64]));
        for chunk in order.chunks(config.batch_size) {
            xb.clear();
            yb.clear();
            for &i in chunk {
                let i = i as usize;
                xb.extend_from_slice(&x[i * d..(i + 1) * d]);
                yb.push(labels[i]);
            }
            let (loss, grads) = loss_and_grad(&model, &xb, &yb)?;
            model.apply_sgd(&grads, config.learning_rate);
            loss_sum += loss * chunk.len() as f64;
            loss_count += chunk.len();
        }
    }
    let mean_loss = if loss_count > 0 {
        loss_sum / loss_count as f64
    } else {
        0.0
    };
    Ok((model, mean_loss))
}

/// Sample-count-weighted parameter average.
pub fn fedavg(client_params: &[ModelParams], sample_counts: &[usize]) -> Result<ModelParams> {
    if client_params.is_empty() {
        return Err(Error::EmptyClientList);
    }
    if client_params.len() != sample_counts.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} models vs {} sample counts",
            client_params.len(),
            sample_counts.len()
        )));
    }
    if sample_counts.contains(&0) {
        return Err(Error::InvalidConfig("sample counts must be >= 1".into()));
    }
    let first = &client_params[0];
    let dims = (first.input_dim(), first.hidden(), first.num_classes());
    if client_params
        .iter()
        .any(|p| (p.input_dim(), p.hidden(), p.num_classes()) != dims)
    {
        return Err(Error::ShapeMismatch(
            "client models have differing shapes".into(),
        ));
    }
    let total: usize = sample_counts.iter().sum();
    let mut acc = vec![0.0f64; first.len()];
    for (params, &count) in client_params.iter().zip(sample_counts) {
        let weight = count as f64 / total as f64;
        for (a, v) in acc.iter_mut().zip(params.to_flat()) {
            *a += weight * v;
        }
    }
    ModelParams::from_flat(dims.0, dims.1, dims.2, &acc)
}

/// Fraction of test samples whose argmax prediction matches the label.
pub fn evaluate_accuracy(params: &ModelParams, dataset: &LabeledDataset) -> Result<f64> {
    let k = params.num_classes();
    let mut correct = 0usize;
    let chunk_size = 256;
    let mut i = 0;
    while i < dataset.len() {
        let end = (i + chunk_size).min(dataset.len());
        let refs: Vec<&ImageTensor> = (i..end).map(|j| dataset.image(j)).collect();
        let x = normalize_images(&refs);
        let probs = crate::fl::model::forward(params, &x)?;
        for (row, j) in probs.chunks(k).zip(i..end) {
            let pred = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(idx, _)| idx as u32)
                .unwrap();
            if pred == dataset.label(j) {
                correct += 1;
            }
        }
        i = end;
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Per-example cross-entropy losses on the listed dataset indices,
/// order-preserving. The attacker-facing signal for membership inference.
pub fn per_sample_losses(
    params: &ModelParams,
    dataset: &LabeledDataset,
    indices: &[usize],
) -> Result<Vec<f64>> {
    if indices.is_empty() {
        return Ok(Vec::new());
    }
    let refs: Vec<&ImageTensor> = indices.iter().map(|&i| dataset.image(i)).collect();
    let labels: Vec<u32> = indices.iter().map(|&i| dataset.label(i)).collect();
    let x = normalize_images(&refs);
    per_example_losses(params, &x, &labels)
}

/// Run the full federated protocol. All clients participate every round;
/// round `r` trains on raw, freshly noised, or epoch-`r mod E` shuffled
/// inputs depending on the protection. Deterministic in the config.
pub fn run_federated(
    train: &LabeledDataset,
    test: &LabeledDataset,
    partition: &ClientPartition,
    config: &TrainConfig,
    variants: Option<&VariantSet>,
) -> Result<FederatedRun> {
    let (run, _) = run_federated_with_checkpoints(train, test, partition, config, variants, &[])?;
    Ok(run)
}

/// Like [`run_federated`], additionally snapshotting the global model after
/// each round listed in `checkpoints` (1-based round numbers).
pub fn run_federated_with_checkpoints(
    train: &LabeledDataset,
    test: &LabeledDataset,
    partition: &ClientPartition,
    config: &TrainConfig,
    variants: Option<&VariantSet>,
    checkpoints: &[usize],
) -> Result<(FederatedRun, Vec<(usize, ModelParams)>)> {
    config.validate()?;
    if partition.num_clients() != config.clients {
        return Err(Error::ShapeMismatch(format!(
            "partition has {} clients, config expects {}",
            partition.num_clients(),
            config.clients
        )));
    }
    if train.shape() != test.shape() || train.num_classes() != test.num_classes() {
        return Err(Error::ShapeMismatch(
            "train and test sets must share shape and classes".into(),
        ));
    }
    if let Some(bad) = partition
        .assignments()
        .iter()
        .flatten()
        .find(|&&i| i >= train.len())
    {
        return Err(Error::ShapeMismatch(format!(
            "partition index {bad} out of range for {} samples",
            train.len()
        )));
    }
    let variants = match config.protection {
        Protection::Csvar { .. } => {
            let v = variants.ok_or(Error::MissingVariant { epoch: 0 })?;
            if v.num_epochs() == 0 {
                return Err(Error::MissingVariant { epoch: 0 });
            }
            for e in 0..v.num_epochs() {
                if v.epoch(e).len() != train.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "variant epoch {e} has {} images, dataset has {}",
                        v.epoch(e).len(),
                        train.len()
                    )));
                }
            }
            Some(v)
        }
        _ => None,
    };

    let (h, w, c) = train.shape();
    let input_dim = (h * w * c) as usize;
    let mut global = init_model(
        input_dim,
        config.hidden,
        train.num_classes() as usize,
        mix_seed(config.master_seed, &[TAG_INIT]),
    );

    let counts = partition.sample_counts();
    let total: usize = counts.iter().sum();
    let mut reports = Vec::with_capacity(config.rounds);
    let mut snapshots = Vec::new();

    for round in 0..config.rounds {
        let mut client_models = Vec::with_capacity(config.clients);
        let mut weighted_loss = 0.0f64;
        for (client, indices) in partition.assignments().iter().enumerate() {
            let labels: Vec<u32> = indices.iter().map(|&i| train.label(i)).collect();
            // hold per-round noised images alive while borrowed
            let mut owned: Vec<ImageTensor> = Vec::new();
            let refs: Vec<&ImageTensor> = match config.protection {
                Protection::None => indices.iter().map(|&i| train.image(i)).collect(),
                Protection::Csvar { .. } => {
                    let set = variants.expect("validated above");
                    let epoch = round % set.num_epochs();
                    indices.iter().map(|&i| set.image(epoch, i)).collect()
                }
                Protection::Dp { sigma } => {
                    owned = indices
                        .iter()
                        .map(|&i| {
                            gaussian_obfuscate(
                                train.image(i),
                                sigma,
                                mix_seed(
                                    config.master_seed,
                                    &[TAG_DP, round as u64, i as u64],
                                ),
                            )
                        })
                        .collect::<Result<Vec<_>>>()?;
                    owned.iter().collect()
                }
            };
            let seed = mix_seed(
                config.master_seed,
                &[TAG_BATCH, round as u64, client as u64],
            );
            let (model, loss) = local_train(&global, &refs, &labels, config, seed)?;
            drop(refs);
            drop(owned);
            weighted_loss += loss * indices.len() as f64;
            client_models.push(model);
        }
        global = fedavg(&client_models, &counts)?;
        global.assert_finite()?;

        reports.push(RoundReport {
            round: round + 1,
            test_accuracy: evaluate_accuracy(&global, test)?,
            mean_train_loss: weighted_loss / total as f64,
            client_sample_counts: counts.clone(),
        });
        if checkpoints.contains(&(round + 1)) {
            snapshots.push((round + 1, global.clone()));
        }
    }

    Ok((
        FederatedRun {
            reports,
            model: global,
        },
        snapshots,
    ))
}

/// Serialize round reports as `round,accuracy,mean_loss` CSV.
pub fn reports_to_csv(reports: &[RoundReport]) -> String {
    let mut out = String::from("round,accuracy,mean_loss\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{}\n",
            r.round, r.test_accuracy, r.mean_train_loss
        ));
    }
    out
}

pub fn write_reports_csv(reports: &[RoundReport], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(reports_to_csv(reports).as_bytes())?;
    Ok(())
}
