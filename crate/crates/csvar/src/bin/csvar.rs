//! Thin command-line front end; all logic lives in the library.

use clap::{Args, Parser, Subcommand, ValueEnum};
use csvar::cli::{
    cmd_attack_mia, cmd_generate, cmd_metrics, cmd_shuffle, cmd_simulate, cmd_variance_map,
    CliError, ExperimentConfig,
};
use csvar::shuffle::ShuffleMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "csvar",
    about = "Variance-guided adaptive image shuffling, federated simulation, and privacy metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "spatial-only")]
    SpatialOnly,
    #[value(name = "channel-wise")]
    ChannelWise,
}

impl From<ModeArg> for ShuffleMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::SpatialOnly => ShuffleMode::SpatialOnly,
            ModeArg::ChannelWise => ShuffleMode::ChannelWise,
        }
    }
}

/// Dataset selection shared by the data-consuming subcommands; mirrors the
/// corresponding config-file fields.
#[derive(Args, Clone)]
struct DatasetArgs {
    /// Dataset kind: synth, idx, or cifar
    #[arg(long, value_name = "KIND")]
    dataset: Option<String>,
    #[arg(long, value_name = "PATH")]
    train_images: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    train_labels: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    test_images: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    test_labels: Option<PathBuf>,
    /// CIFAR training batch files (repeatable)
    #[arg(long, value_name = "PATH")]
    cifar_train: Vec<PathBuf>,
    /// CIFAR test batch files (repeatable)
    #[arg(long, value_name = "PATH")]
    cifar_test: Vec<PathBuf>,
    /// Synthetic training set size
    #[arg(long)]
    synth_samples: Option<usize>,
    /// Synthetic test set size
    #[arg(long)]
    synth_test_samples: Option<usize>,
    /// Synthetic data seed
    #[arg(long)]
    synth_seed: Option<u64>,
    /// Use only the first N training samples
    #[arg(long)]
    subset: Option<usize>,
}

impl DatasetArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        let path_str = |p: &PathBuf| p.display().to_string();
        if let Some(kind) = &self.dataset {
            cfg.dataset_kind = kind.clone();
        }
        if let Some(p) = &self.train_images {
            cfg.train_images = Some(path_str(p));
        }
        if let Some(p) = &self.train_labels {
            cfg.train_labels = Some(path_str(p));
        }
        if let Some(p) = &self.test_images {
            cfg.test_images = Some(path_str(p));
        }
        if let Some(p) = &self.test_labels {
            cfg.test_labels = Some(path_str(p));
        }
        if !self.cifar_train.is_empty() {
            cfg.cifar_train = self.cifar_train.iter().map(path_str).collect();
        }
        if !self.cifar_test.is_empty() {
            cfg.cifar_test = self.cifar_test.iter().map(path_str).collect();
        }
        if let Some(n) = self.synth_samples {
            cfg.synth_samples = n;
        }
        if let Some(n) = self.synth_test_samples {
            cfg.synth_test_samples = n;
        }
        if let Some(s) = self.synth_seed {
            cfg.synth_seed = s;
        }
        if let Some(n) = self.subset {
            cfg.subset = Some(n);
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the per-region variance heatmap and stats for an image
    VarianceMap {
        #[arg(long, value_name = "IMAGE")]
        input: PathBuf,
        #[arg(long, value_name = "PGM")]
        out: PathBuf,
        /// Stats JSON path (defaults to the heatmap path with .json)
        #[arg(long, value_name = "JSON")]
        stats: Option<PathBuf>,
    },
    /// Shuffle one image and write the obfuscated copy
    Shuffle {
        #[arg(long, value_name = "IMAGE")]
        input: PathBuf,
        #[arg(long, value_name = "IMAGE")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        epoch: u64,
        #[arg(long, value_enum, default_value = "channel-wise")]
        mode: ModeArg,
        /// Uniform block size, bypassing variance-guided partitioning
        #[arg(long)]
        block_size: Option<u32>,
    },
    /// Generate per-epoch shuffled dataset variants plus a manifest
    Generate {
        #[command(flatten)]
        dataset: DatasetArgs,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "channel-wise")]
        mode: ModeArg,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Run a federated training experiment
    Simulate {
        /// Experiment config JSON; flags below override its fields
        #[arg(long, value_name = "JSON")]
        config: Option<PathBuf>,
        #[command(flatten)]
        dataset: DatasetArgs,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        clients: Option<usize>,
        #[arg(long)]
        local_epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Protection: none, dp, or csvar
        #[arg(long)]
        protection: Option<String>,
        #[arg(long)]
        dp_sigma: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Variant directory (required for csvar protection)
        #[arg(long, value_name = "DIR")]
        variants_dir: Option<PathBuf>,
        /// Dirichlet concentration for a non-IID split (omit for IID)
        #[arg(long)]
        alpha: Option<f64>,
        /// Also write an MIA cohort file with this many members
        #[arg(long)]
        mia_members: Option<usize>,
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Membership inference attack against a trained model
    AttackMia {
        #[arg(long, value_name = "MODEL")]
        model: PathBuf,
        #[command(flatten)]
        dataset: DatasetArgs,
        /// Cohort JSON ({"members": [...], "nonmembers": [...]})
        #[arg(long, value_name = "JSON")]
        cohort: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Obfuscation metrics between an original and a transformed image
    Metrics {
        #[arg(long, value_name = "IMAGE")]
        original: PathBuf,
        #[arg(long, value_name = "IMAGE")]
        transformed: PathBuf,
        #[arg(long, value_name = "JSON")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::VarianceMap { input, out, stats } => {
            let s = cmd_variance_map(&input, &out, stats.as_deref())?;
            println!(
                "variance map: S={} grid={}x{} median={:.3} min={:.3} max={:.3}",
                s.region_size, s.rows, s.cols, s.median, s.min, s.max
            );
            println!("heatmap written to {}", out.display());
        }
        Command::Shuffle {
            input,
            out,
            seed,
            epoch,
            mode,
            block_size,
        } => {
            cmd_shuffle(&input, &out, seed, epoch, mode.into(), block_size)?;
            println!("shuffled image written to {}", out.display());
        }
        Command::Generate {
            dataset,
            epochs,
            seed,
            mode,
            out_dir,
        } => {
            let mut cfg = ExperimentConfig::default();
            dataset.apply(&mut cfg);
            cfg.master_seed = seed;
            cfg.shuffle_mode = mode.into();
            let manifest = cmd_generate(&cfg, epochs, &out_dir)?;
            println!(
                "wrote {} epoch variants ({} images each) to {}",
                manifest.epochs,
                manifest
                    .files
                    .first()
                    .map(|_| "see manifest")
                    .unwrap_or("0"),
                out_dir.display()
            );
        }
        Command::Simulate {
            config,
            dataset,
            rounds,
            clients,
            local_epochs,
            batch_size,
            learning_rate,
            hidden,
            seed,
            protection,
            dp_sigma,
            mode,
            variants_dir,
            alpha,
            mia_members,
            out_dir,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_file(&path)
                    .map_err(|error| CliError { code: 2, error })?,
                None => ExperimentConfig::default(),
            };
            dataset.apply(&mut cfg);
            if let Some(v) = rounds {
                cfg.rounds = v;
            }
            if let Some(v) = clients {
                cfg.clients = v;
            }
            if let Some(v) = local_epochs {
                cfg.local_epochs = v;
            }
            if let Some(v) = batch_size {
                cfg.batch_size = v;
            }
            if let Some(v) = learning_rate {
                cfg.learning_rate = v;
            }
            if let Some(v) = hidden {
                cfg.hidden = v;
            }
            if let Some(v) = seed {
                cfg.master_seed = v;
            }
            if let Some(v) = protection {
                cfg.protection = v;
            }
            if let Some(v) = dp_sigma {
                cfg.dp_sigma = v;
            }
            if let Some(v) = mode {
                cfg.shuffle_mode = v.into();
            }
            if let Some(v) = variants_dir {
                cfg.variants_dir = Some(v.display().to_string());
            }
            if let Some(v) = alpha {
                cfg.partition_alpha = Some(v);
            }
            if let Some(v) = mia_members {
                cfg.mia_members = Some(v);
            }
            if let Some(v) = out_dir {
                cfg.out_dir = v.display().to_string();
            }
            let summary = cmd_simulate(&cfg)?;
            println!("initial accuracy: {:.4}", summary.initial_accuracy);
            match summary.final_accuracy {
                Some(acc) => println!("final accuracy:   {acc:.4}"),
                None => println!("no training rounds were run"),
            }
            println!("outputs in {}", cfg.out_dir);
        }
        Command::AttackMia {
            model,
            dataset,
            cohort,
            out_dir,
        } => {
            let mut cfg = ExperimentConfig::default();
            dataset.apply(&mut cfg);
            let summary = cmd_attack_mia(&model, &cfg, &cohort, &out_dir)?;
            println!(
                "MIA AUC: {:.4} ({} members vs {} non-members)",
                summary.auc, summary.member_count, summary.nonmember_count
            );
            println!("ROC written to {}", summary.roc_csv);
        }
        Command::Metrics {
            original,
            transformed,
            out,
        } => {
            let report = cmd_metrics(&original, &transformed, &out)?;
            println!("ncc: {:.4}", report.mean_ncc);
            match report.inter_channel_corr_delta {
                Some(d) => println!("inter-channel correlation delta: {d:.4}"),
                None => println!("inter-channel correlation delta: n/a (grayscale)"),
            }
            println!("histogram L1: {:.4}", report.per_channel_histogram_l1);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
