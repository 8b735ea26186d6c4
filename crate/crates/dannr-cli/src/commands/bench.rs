//! `dannr bench` — runs the full transfer experiment matrix over a synthetic
//! fleet: every plant once as the target domain, for each requested matrix
//! mode, repeated over a list of seeds.
//!
//! Every (mode, target, seed) cell is independent — own RNG streams, own
//! model, own result file `cells/<mode>-t<target>-s<seed>.json` written the
//! moment the cell finishes — so an interrupted run keeps its completed
//! cells and a rerun resumes by skipping every cell whose file already holds
//! a valid result for the same resolved configuration. Cells run in
//! parallel up to `--jobs`. The command exits 0 only if every requested
//! cell completed; summary files (`report.csv`, `report.json`,
//! `aggregate.csv`, `aggregate.json`) are assembled after the last cell.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dannr_core::eval::{config_digest, fleet_average, run_matrix_cell};
use dannr_core::fleet::generate_fleet;
use dannr_core::{Dataset, EvalReport, FleetAverage, MatrixMode, ModelShape, TrainConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvio::{fmt_f64, save_report_csv};
use crate::jsonio::{read_json, write_json};
use crate::runconfig::{resolve_out, CommonArgs, RunConfig, RESOLVED_CONFIG_FILE};

/// Per-mode summary: the usual table "Average" row plus the spread of the
/// transfer ratios across all of the mode's cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAggregate {
    pub mode: MatrixMode,
    pub cells: usize,
    pub average: FleetAverage,
    /// Sample standard deviation of the per-cell transfer ratios (0 for a
    /// single cell).
    pub ratio_std: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

struct CellSpec {
    mode: MatrixMode,
    target: usize,
    cfg: TrainConfig,
    id: String,
}

pub fn run(args: &CommonArgs) -> Result<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let fleet_spec = cfg.fleet.clone().unwrap_or_default();
    let feature_layers = cfg.resolve_feature_layers();
    let train_template = {
        let mut t = cfg.train.clone().unwrap_or_default();
        if let Some(kind) = args.lambda_schedule {
            t.lambda_schedule = kind.stock();
        }
        t
    };
    let seeds: Vec<u64> = match args.seed {
        Some(s) => vec![s],
        None => cfg.seeds.clone().unwrap_or_else(|| vec![train_template.seed]),
    };
    let modes: Vec<MatrixMode> = cfg
        .modes
        .clone()
        .unwrap_or_else(|| vec![MatrixMode::OneToOne, MatrixMode::RestToOne]);
    let jobs = args
        .jobs
        .or(cfg.jobs)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);
    let out = resolve_out(args, &cfg)?;

    if seeds.is_empty() {
        bail!("the benchmark needs at least one seed");
    }
    if modes.is_empty() {
        bail!("the benchmark needs at least one matrix mode");
    }
    fleet_spec.validate().context("invalid fleet description")?;
    train_template.validate()?;

    let fleet: Vec<Dataset> = generate_fleet(&fleet_spec)?;
    let shape = ModelShape::new(fleet[0].feature_dim(), feature_layers.clone());
    shape.validate()?;

    let cells_dir = out.join("cells");
    fs::create_dir_all(&cells_dir)
        .with_context(|| format!("cannot create output directory {}", cells_dir.display()))?;

    // Canonical cell order: modes, then targets, then seeds.
    let mut specs = Vec::new();
    for &mode in &modes {
        for target in 0..fleet.len() {
            for &seed in &seeds {
                let mut cell_cfg = train_template.clone();
                cell_cfg.seed = seed;
                specs.push(CellSpec {
                    mode,
                    target,
                    cfg: cell_cfg,
                    id: format!("{mode}-t{target}-s{seed}"),
                });
            }
        }
    }
    log::info!(
        "{} cells ({} modes x {} targets x {} seeds), {} parallel",
        specs.len(),
        modes.len(),
        fleet.len(),
        seeds.len(),
        jobs
    );

    let mut results: Vec<Option<EvalReport>> = vec![None; specs.len()];
    let mut pending: Vec<usize> = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        match load_completed_cell(&cells_dir, spec, &shape) {
            Some(report) => {
                log::info!("cell {}: reusing completed result", spec.id);
                results[i] = Some(report);
            }
            None => pending.push(i),
        }
    }

    if !pending.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("cannot build the worker pool")?;
        let outcomes: Vec<(usize, Result<EvalReport>)> = pool.install(|| {
            pending
                .par_iter()
                .map(|&i| {
                    let spec = &specs[i];
                    let res = run_cell(&cells_dir, spec, &fleet, &shape);
                    (i, res)
                })
                .collect()
        });
        let mut first_error: Option<anyhow::Error> = None;
        for (i, outcome) in outcomes {
            match outcome {
                Ok(report) => results[i] = Some(report),
                Err(e) => {
                    log::error!("cell {}: {e:#}", specs[i].id);
                    if first_error.is_none() {
                        first_error = Some(e.context(format!("cell {} failed", specs[i].id)));
                    }
                }
            }
        }
        if let Some(e) = first_error {
            let done = results.iter().filter(|r| r.is_some()).count();
            return Err(e.context(format!(
                "benchmark incomplete: {done}/{} cells on disk; rerun to resume",
                specs.len()
            )));
        }
    }

    let reports: Vec<EvalReport> = results
        .into_iter()
        .map(|r| r.expect("all cells completed or we bailed above"))
        .collect();

    let mut aggregates = Vec::with_capacity(modes.len());
    for &mode in &modes {
        let of_mode: Vec<EvalReport> = specs
            .iter()
            .zip(&reports)
            .filter(|(s, _)| s.mode == mode)
            .map(|(_, r)| r.clone())
            .collect();
        aggregates.push(aggregate_mode(mode, &of_mode)?);
    }

    save_report_csv(&out.join("report.csv"), &reports, None)?;
    write_json(&out.join("report.json"), &reports)?;
    save_aggregate_csv(&out.join("aggregate.csv"), &aggregates)?;
    write_json(&out.join("aggregate.json"), &aggregates)?;
    let resolved = RunConfig {
        command: Some("bench".into()),
        fleet: Some(fleet_spec),
        feature_layers: Some(feature_layers),
        train: Some(train_template),
        modes: Some(modes),
        seeds: Some(seeds),
        jobs: Some(jobs),
        ..RunConfig::default()
    };
    write_json(&out.join(RESOLVED_CONFIG_FILE), &resolved)?;

    for agg in &aggregates {
        log::info!(
            "{}: mean transfer ratio {:.3} +- {:.3} over {} cells (min {:.3}, max {:.3})",
            agg.mode,
            agg.average.mean_transfer_ratio,
            agg.ratio_std,
            agg.cells,
            agg.ratio_min,
            agg.ratio_max
        );
    }
    Ok(())
}

/// Returns the cell's prior result if its file holds a valid report produced
/// under the same resolved configuration; anything else (missing, partial
/// write from a killed run, stale config) means the cell is recomputed.
fn load_completed_cell(
    cells_dir: &Path,
    spec: &CellSpec,
    shape: &ModelShape,
) -> Option<EvalReport> {
    let path = cells_dir.join(format!("{}.json", spec.id));
    if !path.exists() {
        return None;
    }
    let report: EvalReport = match read_json(&path) {
        Ok(r) => r,
        Err(e) => {
            log::warn!(
                "cell {}: discarding unreadable result ({e:#}); recomputing",
                spec.id
            );
            return None;
        }
    };
    let expected_digest = config_digest(shape, &spec.cfg, spec.mode);
    if report.validate().is_err()
        || report.seed != spec.cfg.seed
        || report.config_digest != expected_digest
    {
        log::warn!(
            "cell {}: discarding result from a different configuration; recomputing",
            spec.id
        );
        return None;
    }
    Some(report)
}

fn run_cell(
    cells_dir: &Path,
    spec: &CellSpec,
    fleet: &[Dataset],
    shape: &ModelShape,
) -> Result<EvalReport> {
    let report = run_matrix_cell(fleet, spec.mode, spec.target, shape, &spec.cfg)?;
    write_json(&cells_dir.join(format!("{}.json", spec.id)), &report)?;
    log::info!(
        "cell {}: transfer ratio {:.3}",
        spec.id,
        report.transfer_ratio
    );
    Ok(report)
}

fn aggregate_mode(mode: MatrixMode, reports: &[EvalReport]) -> Result<ModeAggregate> {
    let average = fleet_average(reports)?;
    let ratios: Vec<f64> = reports.iter().map(|r| r.transfer_ratio).collect();
    let mean = average.mean_transfer_ratio;
    let ratio_std = if ratios.len() > 1 {
        let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (ratios.len() - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    let ratio_min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio_max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ModeAggregate {
        mode,
        cells: reports.len(),
        average,
        ratio_std,
        ratio_min,
        ratio_max,
    })
}

fn save_aggregate_csv(path: &Path, aggregates: &[ModeAggregate]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record([
        "mode",
        "cells",
        "source_mse_no_tl",
        "source_mse_tl",
        "target_mse_no_tl",
        "target_mse_tl",
        "mean_transfer_ratio",
        "std_transfer_ratio",
        "min_transfer_ratio",
        "max_transfer_ratio",
        "probe_accuracy_baseline",
        "probe_accuracy_dannr",
    ])?;
    for a in aggregates {
        w.write_record([
            a.mode.to_string(),
            a.cells.to_string(),
            fmt_f64(a.average.source_mse_no_tl),
            fmt_f64(a.average.source_mse_tl),
            fmt_f64(a.average.target_mse_no_tl),
            fmt_f64(a.average.target_mse_tl),
            fmt_f64(a.average.mean_transfer_ratio),
            fmt_f64(a.ratio_std),
            fmt_f64(a.ratio_min),
            fmt_f64(a.ratio_max),
            fmt_f64(a.average.probe_accuracy_baseline),
            fmt_f64(a.average.probe_accuracy_dannr),
        ])?;
    }
    w.flush()?;
    Ok(())
}
