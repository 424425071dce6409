//! Overfitting-driven membership leakage, measured: train on a small
//! member set, then ask the loss-threshold attack whether it can tell
//! members from held-out samples. Leakage grows with training rounds and
//! shrinks under per-epoch shuffling.
//!
//! Run with: cargo run --example membership_inference

use csvar::data::{partition_clients, VariantSet};
use csvar::fl::{
    per_sample_losses, run_federated, run_federated_with_checkpoints, ModelParams, Protection,
    TrainConfig,
};
use csvar::metrics::mia_threshold_attack;
use csvar::shuffle::{ShuffleConfig, ShuffleMode};
use csvar::synth::digits_dataset;

fn main() -> csvar::Result<()> {
    // deliberately small member set: 300 samples invite memorization
    let members = digits_dataset(300, 31);
    let test = digits_dataset(600, 32);
    let member_idx: Vec<usize> = (0..members.len()).collect();
    let nonmember_idx: Vec<usize> = (0..members.len()).collect();
    let seed = 8u64;
    let partition = partition_clients(&members, 2, None, seed)?;

    let config = |rounds, protection| TrainConfig {
        rounds,
        clients: 2,
        local_epochs: 1,
        batch_size: 32,
        learning_rate: 0.1,
        hidden: 64,
        protection,
        master_seed: seed,
    };

    let auc = |model: &ModelParams| -> csvar::Result<f64> {
        let member_losses = per_sample_losses(model, &members, &member_idx)?;
        let nonmember_losses = per_sample_losses(model, &test, &nonmember_idx)?;
        Ok(mia_threshold_attack(&member_losses, &nonmember_losses)?.auc)
    };

    // vanilla training, probed at increasing degrees of overfitting
    let (run, checkpoints) = run_federated_with_checkpoints(
        &members,
        &test,
        &partition,
        &config(60, Protection::None),
        None,
        &[5, 20, 60],
    )?;
    println!("attack AUC against vanilla training (0.5 = random guess):");
    for (round, model) in &checkpoints {
        println!("  after {round:>2} rounds: {:.4}", auc(model)?);
    }

    // the protections, at the most overfit point
    let dp = run_federated(
        &members,
        &test,
        &partition,
        &config(60, Protection::Dp { sigma: 50.0 }),
        None,
    )?;
    let variants = VariantSet::generate(
        &members,
        &ShuffleConfig::new(seed, 0, ShuffleMode::ChannelWise),
        60,
    )?;
    let shuffled = run_federated(
        &members,
        &test,
        &partition,
        &config(
            60,
            Protection::Csvar {
                mode: ShuffleMode::ChannelWise,
            },
        ),
        Some(&variants),
    )?;

    println!("\nafter 60 rounds:");
    println!("  vanilla : AUC {:.4}", auc(&run.model)?);
    println!("  dp σ=50 : AUC {:.4}", auc(&dp.model)?);
    println!("  shuffled: AUC {:.4}", auc(&shuffled.model)?);
    Ok(())
}
