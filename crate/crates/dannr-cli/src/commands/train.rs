//! `dannr train` — fits a model on CSV datasets and writes a checkpoint,
//! a per-epoch trace, and the resolved configuration.
//!
//! `--mode baseline` trains the regression path on the labeled source only.
//! `--mode dannr` additionally needs a target dataset, whose labels — if the
//! file has any — are stripped before training ever sees it; target labels
//! are never read by any trainer.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use dannr_core::data::{apply_normalizer, fit_normalizer};
use dannr_core::trainer::{init_model, train_baseline, train_dannr};
use dannr_core::{Dataset, DomainLabel, ModelShape, TrainTrace};

use crate::checkpoint::Checkpoint;
use crate::csvio::{load_dataset_csv, save_trace_csv};
use crate::jsonio::write_json;
use crate::runconfig::{
    resolve_out, resolve_path, CommonArgs, RunConfig, TrainMode, RESOLVED_CONFIG_FILE,
};

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Labeled source-domain CSV.
    #[arg(long, value_name = "PATH")]
    pub source: Option<PathBuf>,

    /// Target-domain CSV (required in dannr mode; labels are ignored).
    #[arg(long, value_name = "PATH")]
    pub target: Option<PathBuf>,
}

pub fn run(args: &TrainArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mode = args
        .common
        .mode
        .or(cfg.mode)
        .context("missing trainer selection: pass --mode baseline|dannr or set \"mode\"")?;
    let train_cfg = cfg.resolve_train(&args.common);
    let feature_layers = cfg.resolve_feature_layers();
    let (feature_names, target_name) = cfg.resolve_schema();
    let source_path = resolve_path(&args.source, &cfg.source, "source")?;
    let out = resolve_out(&args.common, &cfg)?;

    let source_raw = load_dataset_csv(
        &source_path,
        &feature_names,
        &target_name,
        DomainLabel::Source,
    )?
    .dataset;
    if source_raw.is_empty() {
        bail!("source dataset {} has no usable rows", source_path.display());
    }
    if !source_raw.all_labeled() {
        bail!(
            "source dataset {} must be fully labeled (every row needs a {target_name} value)",
            source_path.display()
        );
    }

    let norm = fit_normalizer(&source_raw)?;
    let source = apply_normalizer(&norm, &source_raw)?;
    let shape = ModelShape::new(source.feature_dim(), feature_layers.clone());
    shape.validate()?;

    let mut target_path: Option<PathBuf> = None;
    let target: Option<Dataset> = match mode {
        TrainMode::Baseline => None,
        TrainMode::Dannr => {
            let path = resolve_path(&args.target, &cfg.target, "target")?;
            let raw = load_dataset_csv(&path, &feature_names, &target_name, DomainLabel::Target)?
                .dataset;
            if raw.is_empty() {
                bail!("target dataset {} has no usable rows", path.display());
            }
            target_path = Some(path);
            // The data-access rule: training never sees target labels.
            Some(apply_normalizer(&norm, &raw)?.without_targets())
        }
    };

    log::info!(
        "training mode={mode} on {} source rows (seed {})",
        source.len(),
        train_cfg.seed
    );
    let (model, trace): (_, TrainTrace) = match (&mode, &target) {
        (TrainMode::Baseline, _) => train_baseline(&shape, &source, &train_cfg)
            .with_context(|| format!("baseline training failed (seed {})", train_cfg.seed))?,
        (TrainMode::Dannr, Some(tgt)) => train_dannr(
            init_model(&shape, train_cfg.seed)?,
            &source,
            tgt,
            &train_cfg,
        )
        .with_context(|| format!("adversarial training failed (seed {})", train_cfg.seed))?,
        (TrainMode::Dannr, None) => unreachable!("dannr mode resolved a target above"),
    };

    fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    Checkpoint::new(mode, &model, norm, train_cfg.clone()).save(&out.join("checkpoint.json"))?;
    save_trace_csv(&out.join("trace.csv"), &trace)?;
    let resolved = RunConfig {
        command: Some("train".into()),
        mode: Some(mode),
        train: Some(train_cfg),
        feature_layers: Some(feature_layers),
        source: Some(source_path),
        target: target_path,
        feature_names: Some(feature_names),
        target_name: Some(target_name),
        ..RunConfig::default()
    };
    write_json(&out.join(RESOLVED_CONFIG_FILE), &resolved)?;

    if let Some(last) = trace.last() {
        log::info!(
            "finished {} epochs; final source loss {:.6e}, domain loss {:.6e}",
            trace.len(),
            last.source_regression_loss,
            last.domain_loss
        );
    }
    Ok(())
}
