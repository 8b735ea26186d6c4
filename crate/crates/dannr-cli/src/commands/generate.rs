//! `dannr generate` — writes the synthetic turbine-fleet benchmark to disk:
//! one labeled CSV per plant plus the resolved fleet description.

use std::fs;

use anyhow::{Context, Result};
use dannr_core::fleet::generate_fleet;
use dannr_core::FleetSpec;

use crate::csvio::save_dataset_csv;
use crate::jsonio::write_json;
use crate::runconfig::{resolve_out, CommonArgs, RunConfig, RESOLVED_CONFIG_FILE};

pub fn run(args: &CommonArgs) -> Result<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let mut fleet: FleetSpec = cfg.fleet.clone().unwrap_or_default();
    if let Some(seed) = args.seed {
        fleet.seed = seed;
    }
    let out = resolve_out(args, &cfg)?;

    // Validate before touching the filesystem so a bad spec leaves no
    // half-written fleet behind.
    fleet.validate().context("invalid fleet description")?;
    let datasets = generate_fleet(&fleet)?;

    fs::create_dir_all(&out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    for ds in &datasets {
        let path = out.join(format!("{}.csv", ds.origin()));
        save_dataset_csv(&path, ds)?;
        log::info!("wrote {} ({} rows)", path.display(), ds.len());
    }

    let resolved = RunConfig {
        command: Some("generate".into()),
        fleet: Some(fleet),
        ..RunConfig::default()
    };
    write_json(&out.join(RESOLVED_CONFIG_FILE), &resolved)?;
    log::info!(
        "generated {} plants into {}",
        datasets.len(),
        out.display()
    );
    Ok(())
}
