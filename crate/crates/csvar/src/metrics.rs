//! Membership-inference evaluation (loss-threshold attack, ROC/AUC) and
//! visual obfuscation metrics comparing original against protected images.

use crate::error::{Error, Result};
use crate::tensor::ImageTensor;
use serde::{Deserialize, Serialize};

/// ROC curve and AUC of a loss-threshold membership inference attack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiaReport {
    /// (false-positive rate, true-positive rate) pairs from (0,0) to (1,1).
    pub roc_points: Vec<(f64, f64)>,
    pub auc: f64,
    pub member_count: usize,
    pub nonmember_count: usize,
}

impl MiaReport {
    /// ROC points as `fpr,tpr` CSV.
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (fpr, tpr) in &self.roc_points {
            out.push_str(&format!("{fpr},{tpr}\n"));
        }
        out
    }
}

/// Quantified visual obfuscation of a transformed image versus its
/// original.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObfuscationReport {
    /// Channel-averaged zero-mean normalized cross-correlation between
    /// original and transformed pixels; 1 means untouched.
    pub mean_ncc: f64,
    /// Inter-channel correlation of the original minus that of the
    /// transformed image; positive when the transform decorrelated
    /// channels. `None` for grayscale input.
    pub inter_channel_corr_delta: Option<f64>,
    /// Per-channel 256-bin histogram L1 distance, normalized by sample
    /// count; 0 means histograms are untouched.
    pub per_channel_histogram_l1: f64,
}

/// The loss-threshold attack: members should have lower loss, so the score
/// is the negated loss and the ROC sweeps every distinct threshold.
///
/// The AUC is computed twice — trapezoidal integration of the ROC and the
/// rank statistic (probability that a random member outscores a random
/// non-member, ties counted 1/2) — and the two must agree to 1e-9.
pub fn mia_threshold_attack(
    member_losses: &[f64],
    nonmember_losses: &[f64],
) -> Result<MiaReport> {
    if member_losses.is_empty() {
        return Err(Error::EmptyCohort("no member losses"));
    }
    if nonmember_losses.is_empty() {
        return Err(Error::EmptyCohort("no non-member losses"));
    }
    if member_losses
        .iter()
        .chain(nonmember_losses)
        .any(|l| !l.is_finite())
    {
        return Err(Error::NonFinite("loss values".into()));
    }

    // score = -loss; higher score = more member-like
    let mut scored: Vec<(f64, bool)> = member_losses
        .iter()
        .map(|&l| (-l, true))
        .chain(nonmember_losses.iter().map(|&l| (-l, false)))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("scores are finite"));

    let m = member_losses.len() as f64;
    let n = nonmember_losses.len() as f64;
    let mut roc_points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0usize;
    while i < scored.len() {
        // consume the whole tie group at this threshold
        let score = scored[i].0;
        while i < scored.len() && scored[i].0 == score {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        roc_points.push((fp as f64 / n, tp as f64 / m));
    }

    let trapezoid = {
        let mut auc = 0.0;
        for pair in roc_points.windows(2) {
            let (x0, y0) = pair[0];
            let (x1, y1) = pair[1];
            auc += (x1 - x0) * (y0 + y1) / 2.0;
        }
        auc
    };
    let rank = rank_statistic_auc(member_losses, nonmember_losses);
    if (trapezoid - rank).abs() > 1e-9 {
        return Err(Error::Internal(format!(
            "AUC routes disagree: trapezoid {trapezoid} vs rank {rank}"
        )));
    }

    Ok(MiaReport {
        roc_points,
        auc: trapezoid,
        member_count: member_losses.len(),
        nonmember_count: nonmember_losses.len(),
    })
}

/// Probability that a random member outscores a random non-member, ties
/// counted half. Score is the negated loss, so a member wins when its loss
/// is strictly smaller.
fn rank_statistic_auc(member_losses: &[f64], nonmember_losses: &[f64]) -> f64 {
    let mut wins = 0.0f64;
    for &ml in member_losses {
        for &nl in nonmember_losses {
            if ml < nl {
                wins += 1.0;
            } else if ml == nl {
                wins += 0.5;
            }
        }
    }
    wins / (member_losses.len() as f64 * nonmember_losses.len() as f64)
}

/// Exact per-channel pixel sums used by the correlation metrics. All
/// quantities are integers well below 2^53, so accumulation order cannot
/// perturb the result.
struct ChannelSums {
    n: i128,
    sum_a: i128,
    sum_b: i128,
    sum_aa: i128,
    sum_bb: i128,
    sum_ab: i128,
}

fn channel_sums(a: &ImageTensor, b: &ImageTensor, ch_a: u32, ch_b: u32) -> ChannelSums {
    let (h, w, _) = a.shape();
    let mut s = ChannelSums {
        n: (h as i128) * (w as i128),
        sum_a: 0,
        sum_b: 0,
        sum_aa: 0,
        sum_bb: 0,
        sum_ab: 0,
    };
    for y in 0..h {
        for x in 0..w {
            let va = a.get(x, y, ch_a) as i128;
            let vb = b.get(x, y, ch_b) as i128;
            s.sum_a += va;
            s.sum_b += vb;
            s.sum_aa += va * va;
            s.sum_bb += vb * vb;
            s.sum_ab += va * vb;
        }
    }
    s
}

/// Pearson correlation from exact sums; `None` when either side has zero
/// variance.
fn pearson(s: &ChannelSums) -> Option<f64> {
    let cov = s.n * s.sum_ab - s.sum_a * s.sum_b;
    let var_a = s.n * s.sum_aa - s.sum_a * s.sum_a;
    let var_b = s.n * s.sum_bb - s.sum_b * s.sum_b;
    if var_a == 0 || var_b == 0 {
        return None;
    }
    Some(cov as f64 / ((var_a as f64).sqrt() * (var_b as f64).sqrt()))
}

/// Zero-mean normalized cross-correlation per channel, averaged over
/// channels. A channel with zero variance on either side contributes 0.
pub fn ncc(original: &ImageTensor, other: &ImageTensor) -> Result<f64> {
    if original.shape() != other.shape() {
        return Err(Error::ShapeMismatch(format!(
            "ncc shapes {:?} vs {:?}",
            original.shape(),
            other.shape()
        )));
    }
    let c = original.channels();
    let total: f64 = (0..c)
        .map(|ch| pearson(&channel_sums(original, other, ch, ch)).unwrap_or(0.0))
        .sum();
    Ok(total / c as f64)
}

/// Mean absolute Pearson correlation over the three channel pairs of an
/// RGB image. Constant channels contribute 0 to their pairs.
pub fn inter_channel_correlation(image: &ImageTensor) -> Result<f64> {
    if image.channels() != 3 {
        return Err(Error::NotColorImage {
            channels: image.channels(),
        });
    }
    let pairs = [(0u32, 1u32), (0, 2), (1, 2)];
    let total: f64 = pairs
        .iter()
        .map(|&(a, b)| {
            pearson(&channel_sums(image, image, a, b))
                .map(f64::abs)
                .unwrap_or(0.0)
        })
        .sum();
    Ok(total / 3.0)
}

/// Sum over channels of the L1 distance between 256-bin histograms,
/// normalized by total sample count (pixels × channels). Identical
/// histograms give 0; fully disjoint ones give 2.
pub fn per_channel_histogram_l1(a: &ImageTensor, b: &ImageTensor) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "histogram shapes {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let (h, w, c) = a.shape();
    let mut l1_total = 0u64;
    for ch in 0..c {
        let mut hist_a = [0u64; 256];
        let mut hist_b = [0u64; 256];
        for y in 0..h {
            for x in 0..w {
                hist_a[a.get(x, y, ch) as usize] += 1;
                hist_b[b.get(x, y, ch) as usize] += 1;
            }
        }
        for (ca, cb) in hist_a.iter().zip(&hist_b) {
            l1_total += ca.abs_diff(*cb);
        }
    }
    Ok(l1_total as f64 / (h as u64 * w as u64 * c as u64) as f64)
}

/// Full obfuscation report for a transformed image.
pub fn obfuscation_report(
    original: &ImageTensor,
    transformed: &ImageTensor,
) -> Result<ObfuscationReport> {
    let mean_ncc = ncc(original, transformed)?;
    let inter_channel_corr_delta = if original.channels() == 3 {
        Some(inter_channel_correlation(original)? - inter_channel_correlation(transformed)?)
    } else {
        None
    };
    let per_channel_histogram_l1 = per_channel_histogram_l1(original, transformed)?;
    Ok(ObfuscationReport {
        mean_ncc,
        inter_channel_corr_delta,
        per_channel_histogram_l1,
    })
}
