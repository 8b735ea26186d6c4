//! Command-line workbench around [`dannr_core`]: dataset file formats,
//! model checkpoints, run configuration, and the four subcommands of the
//! `dannr` binary (`generate`, `train`, `eval`, `bench`).
//!
//! The core crate is IO-free; everything that touches the filesystem, the
//! clock, or a thread pool lives here. All artifacts are plain text (CSV and
//! JSON) and every run directory receives a resolved copy of its effective
//! configuration, so any output can be reproduced from the directory alone.

pub mod checkpoint;
pub mod commands;
pub mod csvio;
pub mod jsonio;
pub mod runconfig;
