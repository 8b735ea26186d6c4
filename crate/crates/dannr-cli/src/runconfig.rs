//! Run configuration: one JSON document drives every subcommand, and
//! command-line flags override individual values.
//!
//! Each subcommand reads the sections it needs, fills the rest with
//! defaults, and writes the fully resolved result back as
//! `config.resolved.json` next to its outputs. That file is itself a valid
//! `--config` document: rerunning the same subcommand with it reproduces the
//! directory's contents byte for byte. The `out` path is deliberately not
//! part of the resolved document — it locates the artifacts but does not
//! determine their contents.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dannr_core::{FleetSpec, LambdaSchedule, MatrixMode, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::jsonio;

/// Which trainer a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// Plain regression on labeled source data; the discriminator is kept
    /// at its initialization.
    Baseline,
    /// Domain-adversarial training on labeled source plus unlabeled target
    /// data.
    Dannr,
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::Baseline => "baseline",
            TrainMode::Dannr => "dannr",
        })
    }
}

/// Adversarial-weight schedule shapes selectable from the command line.
/// The flag picks the shape with its stock parameters; tuned parameters
/// (a different endpoint, ramp scale, …) go in the config document instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScheduleKind {
    /// λ fixed at 1 for the whole run.
    #[value(name = "constant")]
    Constant,
    /// λ falling linearly from 1 to 0 (the default trainer behavior).
    #[value(name = "linear_decay")]
    LinearDecay,
    /// λ rising from 0 and saturating at 1 on a logistic ramp.
    #[value(name = "dann_ramp")]
    DannRamp,
}

impl ScheduleKind {
    /// The schedule this flag value stands for, with stock parameters.
    pub fn stock(self) -> LambdaSchedule {
        match self {
            ScheduleKind::Constant => LambdaSchedule::Constant { value: 1.0 },
            ScheduleKind::LinearDecay => LambdaSchedule::LinearDecay { start: 1.0, end: 0.0 },
            ScheduleKind::DannRamp => LambdaSchedule::DannRamp { scale: 1.0 },
        }
    }
}

/// Flags shared by every subcommand. Each command applies the ones that are
/// meaningful for it (for example only `bench` consults `--jobs`) and
/// ignores the rest.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonArgs {
    /// Config document (JSON); flags override its individual values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Root seed override (generate: fleet seed; train: trainer seed;
    /// bench: single-entry seed list).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Directory the run writes its artifacts into.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Upper bound on concurrently running benchmark cells.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,

    /// Trainer selection for `train`.
    #[arg(long, value_enum, value_name = "MODE")]
    pub mode: Option<TrainMode>,

    /// Adversarial-weight schedule override (stock parameters).
    #[arg(long, value_enum, value_name = "KIND")]
    pub lambda_schedule: Option<ScheduleKind>,
}

/// The config document. Every field is optional; each subcommand validates
/// that the sections it requires are present (or have defaults). Unknown
/// keys are rejected so typos surface as errors instead of silently applying
/// defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Stamped by the tool when it writes a resolved config; informational
    /// on input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,

    /// Synthetic fleet description (`generate`, `bench`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fleet: Option<FleetSpec>,

    /// Trainer hyper-parameters (`train`, `bench`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,

    /// Hidden widths of the feature extractor (`train`, `bench`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_layers: Option<Vec<usize>>,

    /// Trainer selection (`train`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<TrainMode>,

    /// Experiment-matrix modes to run (`bench`); defaults to both.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<MatrixMode>>,

    /// Seeds the benchmark repeats every cell over (`bench`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,

    /// Concurrency bound for benchmark cells (`bench`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,

    /// Output directory; never serialized into resolved configs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Labeled source-domain dataset (`train`, `eval`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<PathBuf>,

    /// Target-domain dataset (`train` in dannr mode, `eval`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<PathBuf>,

    /// Checkpoint of the source-only model (`eval`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_checkpoint: Option<PathBuf>,

    /// Checkpoint of the adversarially trained model (`eval`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dannr_checkpoint: Option<PathBuf>,

    /// CSV schema: feature column names (`train`, `eval`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_names: Option<Vec<String>>,

    /// CSV schema: target column name (`train`, `eval`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_name: Option<String>,
}

impl RunConfig {
    /// Loads the document `--config` points at, or an empty one.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let cfg: RunConfig = jsonio::read_json(p)
                    .with_context(|| format!("invalid config document {}", p.display()))?;
                Ok(cfg)
            }
            None => Ok(RunConfig::default()),
        }
    }

    /// Trainer config with flag overrides applied (`--seed`,
    /// `--lambda-schedule`); defaults fill anything the document omits.
    pub fn resolve_train(&self, args: &CommonArgs) -> TrainConfig {
        let mut cfg = self.train.clone().unwrap_or_default();
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(kind) = args.lambda_schedule {
            cfg.lambda_schedule = kind.stock();
        }
        cfg
    }

    /// CSV schema with the synthetic fleet's column names as the default.
    pub fn resolve_schema(&self) -> (Vec<String>, String) {
        let features = self.feature_names.clone().unwrap_or_else(|| {
            dannr_core::fleet::FEATURE_NAMES
                .iter()
                .map(|s| s.to_string())
                .collect()
        });
        let target = self
            .target_name
            .clone()
            .unwrap_or_else(|| dannr_core::fleet::TARGET_NAME.to_string());
        (features, target)
    }

    /// Feature-extractor widths; one hidden layer of 60 by default.
    pub fn resolve_feature_layers(&self) -> Vec<usize> {
        self.feature_layers.clone().unwrap_or_else(|| vec![60])
    }
}

/// The output directory for a run: flag wins over config; there is no
/// default because every command writes files.
pub fn resolve_out(args: &CommonArgs, cfg: &RunConfig) -> Result<PathBuf> {
    args.out
        .clone()
        .or_else(|| cfg.out.clone())
        .context("no output directory: pass --out DIR or set \"out\" in the config")
}

/// Picks a path from flag-over-config, naming the field when both are empty.
pub fn resolve_path(
    flag: &Option<PathBuf>,
    config_value: &Option<PathBuf>,
    what: &str,
) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| config_value.clone())
        .with_context(|| format!("missing {what}: pass --{what} PATH or set it in the config"))
}

/// File name of the resolved-config echo every run writes.
pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.json";
