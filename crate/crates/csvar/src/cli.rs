//! Command implementations behind the `csvar` binary. Every command
//! validates and loads its inputs first, computes in memory, and only then
//! writes output files, so error paths leave no partial artifacts.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage/input error.

use crate::data::{
    generate_epoch_variants, load_cifar_bin, load_idx, partition_clients, read_image,
    write_image, write_variance_heatmap, DatasetManifest, LabeledDataset, VariantSet,
};
use crate::error::{Error, Result};
use crate::fl::{
    evaluate_accuracy, per_sample_losses, run_federated, write_reports_csv, ModelParams,
    Protection, TrainConfig,
};
use crate::metrics::{mia_threshold_attack, obfuscation_report, ObfuscationReport};
use crate::shuffle::{csvar_shuffle, mix_seed, permutation, ShuffleConfig, ShuffleMode};
use crate::synth;
use crate::tensor::{partition_regions, reflect_pad_to_multiple, region_size, variance_map};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

const TEST_SPLIT_TAG: u64 = 0x7e57;
const COHORT_TAG: u64 = 0xc0;

/// Library error plus the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Input/validation failures: exit code 2.
fn usage<T>(r: Result<T>) -> CliResult<T> {
    r.map_err(|error| CliError { code: 2, error })
}

/// Failures after inputs were validated (e.g. writing outputs): exit 1.
fn internal<T>(r: Result<T>) -> CliResult<T> {
    r.map_err(|error| CliError { code: 1, error })
}

/// Declarative experiment description; a flat JSON document with CLI
/// overrides applied on top. The fully resolved copy is written next to
/// every run's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// "synth", "idx", or "cifar".
    pub dataset_kind: String,
    pub train_images: Option<String>,
    pub train_labels: Option<String>,
    pub test_images: Option<String>,
    pub test_labels: Option<String>,
    pub cifar_train: Vec<String>,
    pub cifar_test: Vec<String>,
    pub synth_samples: usize,
    pub synth_test_samples: usize,
    pub synth_seed: u64,
    /// Truncate the training set to this many samples.
    pub subset: Option<usize>,
    /// "none", "dp", or "csvar".
    pub protection: String,
    pub dp_sigma: f64,
    pub shuffle_mode: ShuffleMode,
    /// Directory holding a variant manifest; required when protection is
    /// "csvar".
    pub variants_dir: Option<String>,
    pub rounds: usize,
    pub clients: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub master_seed: u64,
    /// Dirichlet concentration; absent means an IID split.
    pub partition_alpha: Option<f64>,
    /// When set, also emit `mia_cohort.json` with this many members.
    pub mia_members: Option<usize>,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset_kind: "synth".into(),
            train_images: None,
            train_labels: None,
            test_images: None,
            test_labels: None,
            cifar_train: Vec::new(),
            cifar_test: Vec::new(),
            synth_samples: 2000,
            synth_test_samples: 500,
            synth_seed: 7,
            subset: None,
            protection: "none".into(),
            dp_sigma: 50.0,
            shuffle_mode: ShuffleMode::ChannelWise,
            variants_dir: None,
            rounds: 20,
            clients: 4,
            local_epochs: 1,
            batch_size: 32,
            learning_rate: 0.1,
            hidden: 128,
            master_seed: 42,
            partition_alpha: None,
            mia_members: None,
            out_dir: "runs/experiment".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    fn protection(&self) -> Result<Protection> {
        match self.protection.as_str() {
            "none" => Ok(Protection::None),
            "dp" => Ok(Protection::Dp {
                sigma: self.dp_sigma,
            }),
            "csvar" => Ok(Protection::Csvar {
                mode: self.shuffle_mode,
            }),
            other => Err(Error::InvalidConfig(format!(
                "unknown protection {other:?} (expected none, dp, or csvar)"
            ))),
        }
    }

    fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            rounds: self.rounds,
            clients: self.clients,
            local_epochs: self.local_epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            hidden: self.hidden,
            protection: self.protection()?,
            master_seed: self.master_seed,
        })
    }
}

/// Load the configured train/test pair, reflect-padded to the adaptive
/// region size.
pub fn load_dataset_pair(cfg: &ExperimentConfig) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = match cfg.dataset_kind.as_str() {
        "synth" => {
            let train = synth::digits_dataset(cfg.synth_samples, cfg.synth_seed);
            let test = synth::digits_dataset(
                cfg.synth_test_samples,
                mix_seed(cfg.synth_seed, &[TEST_SPLIT_TAG]),
            );
            (train, test)
        }
        "idx" => {
            let paths: [&Option<String>; 4] = [
                &cfg.train_images,
                &cfg.train_labels,
                &cfg.test_images,
                &cfg.test_labels,
            ];
            if paths.iter().any(|p| p.is_none()) {
                return Err(Error::InvalidConfig(
                    "idx dataset needs train_images, train_labels, test_images, test_labels"
                        .into(),
                ));
            }
            let train = load_idx(
                Path::new(cfg.train_images.as_ref().unwrap()),
                Path::new(cfg.train_labels.as_ref().unwrap()),
            )?;
            let test = load_idx(
                Path::new(cfg.test_images.as_ref().unwrap()),
                Path::new(cfg.test_labels.as_ref().unwrap()),
            )?;
            (train, test)
        }
        "cifar" => {
            if cfg.cifar_train.is_empty() || cfg.cifar_test.is_empty() {
                return Err(Error::InvalidConfig(
                    "cifar dataset needs cifar_train and cifar_test paths".into(),
                ));
            }
            let train = load_cifar_bin(&cfg.cifar_train)?;
            let test = load_cifar_bin(&cfg.cifar_test)?;
            (train, test)
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown dataset kind {other:?} (expected synth, idx, or cifar)"
            )))
        }
    };
    let mut train = train.pad_to_region_multiple();
    let test = test.pad_to_region_multiple();
    if let Some(subset) = cfg.subset {
        if subset == 0 {
            return Err(Error::InvalidConfig("subset must be >= 1".into()));
        }
        train = train.take(subset)?;
    }
    Ok((train, test))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceStats {
    pub region_size: u32,
    pub rows: u32,
    pub cols: u32,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// `variance-map`: write the per-region variance heatmap of an image plus
/// its summary statistics.
pub fn cmd_variance_map(
    input: &Path,
    out: &Path,
    stats_out: Option<&Path>,
) -> CliResult<VarianceStats> {
    let image = usage(read_image(input))?;
    let s = region_size(image.height(), image.width());
    let padded = reflect_pad_to_multiple(&image, s);
    let grid = usage(partition_regions(&padded, s))?;
    let vmap = usage(variance_map(&padded, &grid))?;
    let stats = VarianceStats {
        region_size: s,
        rows: vmap.rows(),
        cols: vmap.cols(),
        median: vmap.median(),
        min: vmap.min(),
        max: vmap.max(),
    };
    internal(write_variance_heatmap(&vmap, out))?;
    let stats_path = match stats_out {
        Some(p) => p.to_path_buf(),
        None => out.with_extension("json"),
    };
    internal(write_json(&stats_path, &stats))?;
    Ok(stats)
}

/// `shuffle`: obfuscate one image, optionally pinning a uniform block size
/// to reproduce granularity sweeps.
pub fn cmd_shuffle(
    input: &Path,
    out: &Path,
    seed: u64,
    epoch: u64,
    mode: ShuffleMode,
    block_size: Option<u32>,
) -> CliResult<()> {
    let image = usage(read_image(input))?;
    let s = region_size(image.height(), image.width());
    let padded = reflect_pad_to_multiple(&image, s);
    let mut cfg = ShuffleConfig::new(seed, epoch, mode);
    cfg.block_size_override = block_size;
    let shuffled = usage(csvar_shuffle(&padded, &cfg, 0))?;
    internal(write_image(&shuffled, out))
}

/// `generate`: persist per-epoch shuffled variants of the configured
/// training set.
pub fn cmd_generate(
    cfg: &ExperimentConfig,
    epochs: usize,
    out_dir: &Path,
) -> CliResult<DatasetManifest> {
    let (train, _) = usage(load_dataset_pair(cfg))?;
    let shuffle_cfg = ShuffleConfig::new(cfg.master_seed, 0, cfg.shuffle_mode);
    let source = match cfg.dataset_kind.as_str() {
        "synth" => format!("synth:{}:{}", cfg.synth_samples, cfg.synth_seed),
        _ => cfg.dataset_kind.clone(),
    };
    internal(generate_epoch_variants(
        &train,
        &shuffle_cfg,
        epochs,
        out_dir,
        &source,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiaCohort {
    /// Indices into the training set.
    pub members: Vec<usize>,
    /// Indices into the test set.
    pub nonmembers: Vec<usize>,
}

/// Seeded cohort: a fixed random subset of training data as members and an
/// equal-sized subset of held-out test data as non-members.
pub fn build_cohort(
    train_len: usize,
    test_len: usize,
    members: usize,
    master_seed: u64,
) -> Result<MiaCohort> {
    if members == 0 || members > train_len || members > test_len {
        return Err(Error::InvalidConfig(format!(
            "cohort of {members} members does not fit train {train_len} / test {test_len}"
        )));
    }
    let train_order = permutation(train_len, mix_seed(master_seed, &[COHORT_TAG, 1]));
    let test_order = permutation(test_len, mix_seed(master_seed, &[COHORT_TAG, 2]));
    Ok(MiaCohort {
        members: train_order[..members].iter().map(|&i| i as usize).collect(),
        nonmembers: test_order[..members].iter().map(|&i| i as usize).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub config: ExperimentConfig,
    pub initial_accuracy: f64,
    pub final_accuracy: Option<f64>,
    pub final_mean_loss: Option<f64>,
    pub rounds_csv: String,
    pub model_file: String,
}

/// `simulate`: run the federated protocol described by `cfg`, writing the
/// resolved config, per-round CSV, summary JSON, and the final model.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> CliResult<SimSummary> {
    let train_cfg = usage(cfg.train_config())?;
    let (train, test) = usage(load_dataset_pair(cfg))?;
    let partition = usage(partition_clients(
        &train,
        cfg.clients,
        cfg.partition_alpha,
        cfg.master_seed,
    ))?;

    let variants = match train_cfg.protection {
        Protection::Csvar { .. } => {
            let dir = usage(cfg.variants_dir.clone().ok_or(Error::MissingVariant {
                epoch: 0,
            }))?;
            let manifest_path = Path::new(&dir).join("manifest.json");
            if !manifest_path.exists() {
                return Err(CliError {
                    code: 2,
                    error: Error::MissingVariant { epoch: 0 },
                });
            }
            let (set, _manifest) = usage(VariantSet::load(&manifest_path))?;
            Some(set)
        }
        _ => None,
    };

    let cohort = match cfg.mia_members {
        Some(m) => Some(usage(build_cohort(
            train.len(),
            test.len(),
            m,
            cfg.master_seed,
        ))?),
        None => None,
    };

    let initial = crate::fl::init_model(
        {
            let (h, w, c) = train.shape();
            (h * w * c) as usize
        },
        cfg.hidden,
        train.num_classes() as usize,
        mix_seed(cfg.master_seed, &[1]),
    );
    let initial_accuracy = usage(evaluate_accuracy(&initial, &test))?;

    let run = usage(run_federated(
        &train,
        &test,
        &partition,
        &train_cfg,
        variants.as_ref(),
    ))?;

    // all computation done; now write artifacts
    let out_dir = PathBuf::from(&cfg.out_dir);
    internal(fs::create_dir_all(&out_dir).map_err(Error::from))?;
    internal(write_json(&out_dir.join("config.json"), cfg))?;
    internal(write_reports_csv(&run.reports, &out_dir.join("rounds.csv")))?;
    internal(write_json(&out_dir.join("rounds.json"), &run.reports))?;
    internal(run.model.save(&out_dir.join("model.bin")))?;
    if let Some(cohort) = &cohort {
        internal(write_json(&out_dir.join("mia_cohort.json"), cohort))?;
    }

    let summary = SimSummary {
        config: cfg.clone(),
        initial_accuracy,
        final_accuracy: run.reports.last().map(|r| r.test_accuracy),
        final_mean_loss: run.reports.last().map(|r| r.mean_train_loss),
        rounds_csv: out_dir.join("rounds.csv").display().to_string(),
        model_file: out_dir.join("model.bin").display().to_string(),
    };
    internal(write_json(&out_dir.join("summary.json"), &summary))?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct MiaSummary {
    pub auc: f64,
    pub member_count: usize,
    pub nonmember_count: usize,
    pub roc_csv: String,
}

/// `attack-mia`: loss-threshold membership inference against a trained
/// model, given a cohort file naming member/non-member indices.
pub fn cmd_attack_mia(
    model_path: &Path,
    cfg: &ExperimentConfig,
    cohort_path: &Path,
    out_dir: &Path,
) -> CliResult<MiaSummary> {
    let model = usage(ModelParams::load(model_path))?;
    let (train, test) = usage(load_dataset_pair(cfg))?;
    let cohort: MiaCohort = usage(
        fs::read(cohort_path)
            .map_err(Error::from)
            .and_then(|bytes| serde_json::from_slice(&bytes).map_err(Error::from)),
    )?;
    if let Some(&bad) = cohort.members.iter().find(|&&i| i >= train.len()) {
        return Err(CliError {
            code: 2,
            error: Error::ShapeMismatch(format!(
                "member index {bad} out of range for {} training samples",
                train.len()
            )),
        });
    }
    if let Some(&bad) = cohort.nonmembers.iter().find(|&&i| i >= test.len()) {
        return Err(CliError {
            code: 2,
            error: Error::ShapeMismatch(format!(
                "non-member index {bad} out of range for {} test samples",
                test.len()
            )),
        });
    }
    let member_losses = usage(per_sample_losses(&model, &train, &cohort.members))?;
    let nonmember_losses = usage(per_sample_losses(&model, &test, &cohort.nonmembers))?;
    let report = usage(mia_threshold_attack(&member_losses, &nonmember_losses))?;

    internal(fs::create_dir_all(out_dir).map_err(Error::from))?;
    let roc_path = out_dir.join("roc.csv");
    internal(fs::write(&roc_path, report.roc_csv()).map_err(Error::from))?;
    internal(write_json(&out_dir.join("mia.json"), &report))?;
    Ok(MiaSummary {
        auc: report.auc,
        member_count: report.member_count,
        nonmember_count: report.nonmember_count,
        roc_csv: roc_path.display().to_string(),
    })
}

/// `metrics`: obfuscation metrics between two same-shaped images.
pub fn cmd_metrics(
    original: &Path,
    transformed: &Path,
    out: &Path,
) -> CliResult<ObfuscationReport> {
    let a = usage(read_image(original))?;
    let b = usage(read_image(transformed))?;
    let report = usage(obfuscation_report(&a, &b))?;
    internal(write_json(out, &report))?;
    Ok(report)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}
