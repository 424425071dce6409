//! Quantifying visual obfuscation: residual cross-correlation with the
//! original, inter-channel correlation (color structure), and histogram
//! distortion, for Gaussian noise versus the two shuffle modes.
//!
//! Run with: cargo run --example obfuscation_metrics

use csvar::metrics::{inter_channel_correlation, obfuscation_report};
use csvar::shuffle::{csvar_shuffle, gaussian_obfuscate, ShuffleConfig, ShuffleMode};
use csvar::synth::natural_image;

fn main() -> csvar::Result<()> {
    let image = natural_image(64, 64, 3, 505);
    println!(
        "original inter-channel correlation: {:.4}\n",
        inter_channel_correlation(&image)?
    );

    let noised = gaussian_obfuscate(&image, 50.0, 1)?;
    let spatial = csvar_shuffle(
        &image,
        &ShuffleConfig::new(1, 0, ShuffleMode::SpatialOnly),
        0,
    )?;
    let channel_wise = csvar_shuffle(
        &image,
        &ShuffleConfig::new(1, 0, ShuffleMode::ChannelWise),
        0,
    )?;

    println!("transform      ncc     ic-delta   hist-L1");
    for (name, transformed) in [
        ("dp σ=50", &noised),
        ("spatial", &spatial),
        ("channel-wise", &channel_wise),
    ] {
        let report = obfuscation_report(&image, transformed)?;
        println!(
            "{name:<12} {:+.4}   {:+.4}    {:.4}",
            report.mean_ncc,
            report.inter_channel_corr_delta.unwrap_or(f64::NAN),
            report.per_channel_histogram_l1
        );
    }
    println!();
    println!("readings: noise keeps the image recognizable (high ncc) and");
    println!("perturbs histograms; shuffling zeroes histogram distortion and");
    println!("kills recognizability; only channel-wise mode breaks color");
    println!("structure (positive ic-delta).");
    Ok(())
}
