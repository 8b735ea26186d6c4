//! `dannr eval` — scores a (baseline, adversarial) checkpoint pair on a
//! source/target dataset pair and writes the transfer-table artifacts:
//! `report.csv` (table layout), `report.json` (full records), and
//! `plot_data.csv` (per-sample ground truth and both predictions on the
//! target set).
//!
//! Both checkpoints must carry identical normalization statistics — that is
//! what makes their MSE columns comparable; a disagreement is a schema
//! mismatch and the command refuses to mix them. Datasets are normalized
//! with the checkpoints' stored statistics, never refitted, so evaluating a
//! checkpoint on its own training source reproduces the final trace loss.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use dannr_core::data::apply_normalizer;
use dannr_core::eval::{config_digest, mse, probe_domain_accuracy, transfer_ratio};
use dannr_core::{Dataset, DomainLabel, EvalReport, MatrixMode};

use crate::checkpoint::Checkpoint;
use crate::csvio::{load_dataset_csv, save_plot_csv, save_report_csv};
use crate::jsonio::write_json;
use crate::runconfig::{
    resolve_out, resolve_path, CommonArgs, RunConfig, TrainMode, RESOLVED_CONFIG_FILE,
};

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Checkpoint of the source-only model ("without TL" columns).
    #[arg(long, value_name = "PATH")]
    pub baseline_checkpoint: Option<PathBuf>,

    /// Checkpoint of the adversarially trained model ("using TL" columns).
    #[arg(long, value_name = "PATH")]
    pub dannr_checkpoint: Option<PathBuf>,

    /// Labeled source-domain CSV.
    #[arg(long, value_name = "PATH")]
    pub source: Option<PathBuf>,

    /// Labeled target-domain CSV (labels are needed here: this is scoring,
    /// not training).
    #[arg(long, value_name = "PATH")]
    pub target: Option<PathBuf>,
}

pub fn run(args: &EvalArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let baseline_path = resolve_path(
        &args.baseline_checkpoint,
        &cfg.baseline_checkpoint,
        "baseline-checkpoint",
    )?;
    let dannr_path = resolve_path(
        &args.dannr_checkpoint,
        &cfg.dannr_checkpoint,
        "dannr-checkpoint",
    )?;
    let source_path = resolve_path(&args.source, &cfg.source, "source")?;
    let target_path = resolve_path(&args.target, &cfg.target, "target")?;
    let (feature_names, target_name) = cfg.resolve_schema();
    let out = resolve_out(&args.common, &cfg)?;

    let ckpt_baseline = Checkpoint::load(&baseline_path)?;
    let ckpt_dannr = Checkpoint::load(&dannr_path)?;
    if ckpt_baseline.mode != TrainMode::Baseline {
        log::warn!(
            "{} was trained in {} mode but is used for the \"without TL\" columns",
            baseline_path.display(),
            ckpt_baseline.mode
        );
    }
    if ckpt_dannr.mode != TrainMode::Dannr {
        log::warn!(
            "{} was trained in {} mode but is used for the \"using TL\" columns",
            dannr_path.display(),
            ckpt_dannr.mode
        );
    }
    if ckpt_baseline.shape != ckpt_dannr.shape {
        bail!(
            "checkpoint schema mismatch: shapes {:?} and {:?} cannot be compared",
            ckpt_baseline.shape,
            ckpt_dannr.shape
        );
    }
    if ckpt_baseline.norm != ckpt_dannr.norm {
        bail!(
            "checkpoint schema mismatch: {} and {} carry different normalization statistics, \
             so their errors are not on a common scale (were they trained on the same source?)",
            baseline_path.display(),
            dannr_path.display()
        );
    }

    let load = |path: &PathBuf, domain| -> Result<Dataset> {
        let ds = load_dataset_csv(path, &feature_names, &target_name, domain)?.dataset;
        if ds.is_empty() {
            bail!("dataset {} has no usable rows", path.display());
        }
        if !ds.all_labeled() {
            bail!(
                "dataset {} must be fully labeled to score MSE against it",
                path.display()
            );
        }
        Ok(ds)
    };
    let source_raw = load(&source_path, DomainLabel::Source)?;
    let target_raw = load(&target_path, DomainLabel::Target)?;

    let norm = &ckpt_baseline.norm;
    let source = apply_normalizer(norm, &source_raw)?;
    let target = apply_normalizer(norm, &target_raw)?;

    let baseline = ckpt_baseline.to_model()?;
    let dannr = ckpt_dannr.to_model()?;
    if baseline.input_dim() != source.feature_dim() {
        bail!(
            "checkpoint schema mismatch: model expects {} features, datasets have {}",
            baseline.input_dim(),
            source.feature_dim()
        );
    }

    let target_mse_no_tl = mse(&baseline, &target)?;
    let target_mse_tl = mse(&dannr, &target)?;
    let target_unlabeled = target.without_targets();
    let report = EvalReport {
        target_name: target.origin().to_string(),
        source_name: source.origin().to_string(),
        source_mse_no_tl: mse(&baseline, &source)?,
        source_mse_tl: mse(&dannr, &source)?,
        target_mse_no_tl,
        target_mse_tl,
        transfer_ratio: transfer_ratio(target_mse_no_tl, target_mse_tl)?,
        probe_accuracy_baseline: probe_domain_accuracy(
            &baseline,
            &source,
            &target_unlabeled,
            &ckpt_dannr.train,
        )?,
        probe_accuracy_dannr: probe_domain_accuracy(
            &dannr,
            &source,
            &target_unlabeled,
            &ckpt_dannr.train,
        )?,
        seed: ckpt_dannr.train.seed,
        // An explicit source/target pair is a single one-to-one cell.
        config_digest: config_digest(&ckpt_dannr.shape, &ckpt_dannr.train, MatrixMode::OneToOne),
    };
    report.validate()?;

    let mut truth = Vec::with_capacity(target.len());
    let mut pred_baseline = Vec::with_capacity(target.len());
    let mut pred_dannr = Vec::with_capacity(target.len());
    for s in target.samples() {
        truth.push(s.target.expect("checked all_labeled above"));
        pred_baseline.push(baseline.predict(&s.features)?);
        pred_dannr.push(dannr.predict(&s.features)?);
    }

    fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    save_report_csv(&out.join("report.csv"), std::slice::from_ref(&report), None)?;
    write_json(&out.join("report.json"), &vec![report.clone()])?;
    save_plot_csv(&out.join("plot_data.csv"), &truth, &pred_baseline, &pred_dannr)?;
    let resolved = RunConfig {
        command: Some("eval".into()),
        baseline_checkpoint: Some(baseline_path),
        dannr_checkpoint: Some(dannr_path),
        source: Some(source_path),
        target: Some(target_path),
        feature_names: Some(feature_names),
        target_name: Some(target_name),
        ..RunConfig::default()
    };
    write_json(&out.join(RESOLVED_CONFIG_FILE), &resolved)?;

    log::info!(
        "target MSE without TL {:.6e}, using TL {:.6e}, transfer ratio {:.3}",
        report.target_mse_no_tl,
        report.target_mse_tl,
        report.transfer_ratio
    );
    Ok(())
}
