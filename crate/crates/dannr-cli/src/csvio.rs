//! CSV formats: datasets, training traces, evaluation reports, and plot
//! data.
//!
//! All files are UTF-8, comma-separated, one header row, one record per
//! line. Reals are written as the shortest decimal that parses back to the
//! identical 64-bit value, so save→load round-trips are value-exact.

use std::path::Path;

use anyhow::{bail, Context, Result};
use csv::{ReaderBuilder, Trim, WriterBuilder};
use dannr_core::{Dataset, DomainLabel, EpochRecord, EvalReport, FleetAverage, Sample, TrainTrace};

/// Shortest decimal encoding that round-trips the exact value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Header of the evaluation-report CSV: the transfer table's six columns
/// (row label, two source MSEs, two target MSEs, ratio) followed by
/// provenance.
pub const REPORT_HEADER: [&str; 9] = [
    "target",
    "source_mse_no_tl",
    "source_mse_tl",
    "target_mse_no_tl",
    "target_mse_tl",
    "transfer_ratio",
    "source",
    "seed",
    "config_digest",
];

/// Header of the training-trace CSV.
pub const TRACE_HEADER: [&str; 5] = [
    "epoch",
    "lambda",
    "source_regression_loss",
    "domain_loss",
    "seconds",
];

/// Header of the per-run plot-data CSV (ground truth and both models'
/// predictions over one dataset, in file order).
pub const PLOT_HEADER: [&str; 4] = [
    "index",
    "ground_truth",
    "baseline_prediction",
    "dannr_prediction",
];

/// Result of loading a dataset: the accepted rows plus how many were
/// rejected (non-numeric or wrong-arity records).
#[derive(Debug)]
pub struct LoadOutcome {
    pub dataset: Dataset,
    pub rejected_rows: usize,
}

/// Writes one sample per row: feature columns, the target column (empty for
/// unlabeled samples), and a `domain` column.
pub fn save_dataset_csv(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = WriterBuilder::new()
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(ds.target_name());
    header.push("domain");
    w.write_record(&header)?;
    for s in ds.samples() {
        let mut row: Vec<String> = s.features.iter().map(|v| fmt_f64(*v)).collect();
        row.push(s.target.map(fmt_f64).unwrap_or_default());
        row.push(s.domain.name().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a dataset against an explicit schema.
///
/// The header must contain every feature column and the target column;
/// anything missing is a schema error. Rows whose cells do not parse as
/// finite reals (the target cell may be empty, meaning unlabeled) and rows
/// with the wrong number of fields are rejected individually — logged with
/// their line number and counted, never silently dropped. An optional
/// `domain` column ("source"/"target") overrides `default_domain` per row.
pub fn load_dataset_csv(
    path: &Path,
    feature_names: &[String],
    target_name: &str,
    default_domain: DomainLabel,
) -> Result<LoadOutcome> {
    let mut r = ReaderBuilder::new()
        .trim(Trim::All)
        .flexible(false)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;

    let headers = r
        .headers()
        .with_context(|| format!("cannot read the header row of {}", path.display()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut feature_idx = Vec::with_capacity(feature_names.len());
    for name in feature_names {
        feature_idx.push(column(name).with_context(|| {
            format!("{}: schema error: missing column {name:?}", path.display())
        })?);
    }
    let target_idx = column(target_name).with_context(|| {
        format!(
            "{}: schema error: missing column {target_name:?}",
            path.display()
        )
    })?;
    let domain_idx = headers
        .iter()
        .position(|h| h == "domain")
        .filter(|i| *i != target_idx && !feature_idx.contains(i));

    let origin = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let mut dataset = Dataset::new(feature_names.to_vec(), target_name.to_string(), origin)?;
    let mut rejected = 0usize;

    for record in r.records() {
        let record = match record {
            Ok(rec) => rec,
            Err(e) => {
                let line = e
                    .position()
                    .map(|p| p.line().to_string())
                    .unwrap_or_else(|| "?".into());
                log::warn!("{}:{line}: rejected row: {e}", path.display());
                rejected += 1;
                continue;
            }
        };
        let line = record
            .position()
            .map(|p| p.line().to_string())
            .unwrap_or_else(|| "?".into());
        match parse_sample(&record, &feature_idx, target_idx, domain_idx, default_domain) {
            Ok(sample) => {
                if let Err(e) = dataset.push(sample) {
                    log::warn!("{}:{line}: rejected row: {e}", path.display());
                    rejected += 1;
                }
            }
            Err(e) => {
                log::warn!("{}:{line}: rejected row: {e}", path.display());
                rejected += 1;
            }
        }
    }

    log::info!(
        "{}: loaded {} rows ({rejected} rejected)",
        path.display(),
        dataset.len()
    );
    Ok(LoadOutcome {
        dataset,
        rejected_rows: rejected,
    })
}

fn parse_sample(
    record: &csv::StringRecord,
    feature_idx: &[usize],
    target_idx: usize,
    domain_idx: Option<usize>,
    default_domain: DomainLabel,
) -> Result<Sample> {
    let cell = |i: usize| -> Result<&str> {
        record
            .get(i)
            .with_context(|| format!("missing field {i}"))
    };
    let mut features = Vec::with_capacity(feature_idx.len());
    for &i in feature_idx {
        let raw = cell(i)?;
        let v: f64 = raw
            .parse()
            .with_context(|| format!("cannot parse {raw:?} as a real"))?;
        features.push(v);
    }
    let raw_target = cell(target_idx)?;
    let target = if raw_target.is_empty() {
        None
    } else {
        Some(
            raw_target
                .parse::<f64>()
                .with_context(|| format!("cannot parse {raw_target:?} as a real"))?,
        )
    };
    let domain = match domain_idx {
        Some(i) => {
            let raw = cell(i)?;
            DomainLabel::from_name(raw)
                .with_context(|| format!("unknown domain {raw:?}, expected source or target"))?
        }
        None => default_domain,
    };
    Ok(Sample {
        features,
        target,
        domain,
    })
}

/// Writes the per-epoch training trace.
pub fn save_trace_csv(path: &Path, trace: &TrainTrace) -> Result<()> {
    let mut w = WriterBuilder::new()
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(TRACE_HEADER)?;
    for rec in trace.records() {
        w.write_record([
            rec.epoch.to_string(),
            fmt_f64(rec.lambda),
            fmt_f64(rec.source_regression_loss),
            fmt_f64(rec.domain_loss),
            fmt_f64(rec.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace written by [`save_trace_csv`].
pub fn load_trace_csv(path: &Path) -> Result<Vec<EpochRecord>> {
    let mut r = ReaderBuilder::new()
        .trim(Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != TRACE_HEADER {
        bail!(
            "{}: unexpected trace header {:?}",
            path.display(),
            headers
        );
    }
    let mut out = Vec::new();
    for record in r.records() {
        let rec = record?;
        let field = |i: usize| -> Result<&str> {
            rec.get(i)
                .with_context(|| format!("{}: short record", path.display()))
        };
        out.push(EpochRecord {
            epoch: field(0)?.parse()?,
            lambda: field(1)?.parse()?,
            source_regression_loss: field(2)?.parse()?,
            domain_loss: field(3)?.parse()?,
            seconds: field(4)?.parse()?,
        });
    }
    Ok(out)
}

/// Writes evaluation reports in the transfer table's column order, one row
/// per cell, optionally followed by an `Average` row (whose ratio column is
/// the mean of the per-row ratios, not a quotient — matching how summary
/// rows of such tables are conventionally computed).
pub fn save_report_csv(
    path: &Path,
    reports: &[EvalReport],
    average: Option<&FleetAverage>,
) -> Result<()> {
    let mut w = WriterBuilder::new()
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.target_name.clone(),
            fmt_f64(r.source_mse_no_tl),
            fmt_f64(r.source_mse_tl),
            fmt_f64(r.target_mse_no_tl),
            fmt_f64(r.target_mse_tl),
            fmt_f64(r.transfer_ratio),
            r.source_name.clone(),
            r.seed.to_string(),
            r.config_digest.clone(),
        ])?;
    }
    if let Some(avg) = average {
        w.write_record([
            "Average".to_string(),
            fmt_f64(avg.source_mse_no_tl),
            fmt_f64(avg.source_mse_tl),
            fmt_f64(avg.target_mse_no_tl),
            fmt_f64(avg.target_mse_tl),
            fmt_f64(avg.mean_transfer_ratio),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the plot-data CSV: one row per sample of the plotted dataset, in
/// file order, with the ground truth and both models' predictions on the
/// normalized scale the models operate on.
pub fn save_plot_csv(
    path: &Path,
    truth: &[f64],
    baseline_predictions: &[f64],
    dannr_predictions: &[f64],
) -> Result<()> {
    if truth.len() != baseline_predictions.len() || truth.len() != dannr_predictions.len() {
        bail!(
            "plot columns disagree on length: {} truths, {} baseline predictions, {} adversarial predictions",
            truth.len(),
            baseline_predictions.len(),
            dannr_predictions.len()
        );
    }
    let mut w = WriterBuilder::new()
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(PLOT_HEADER)?;
    for (i, ((t, b), d)) in truth
        .iter()
        .zip(baseline_predictions)
        .zip(dannr_predictions)
        .enumerate()
    {
        w.write_record([i.to_string(), fmt_f64(*t), fmt_f64(*b), fmt_f64(*d)])?;
    }
    w.flush()?;
    Ok(())
}
