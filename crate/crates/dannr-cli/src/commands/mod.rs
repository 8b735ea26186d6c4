//! The four subcommands of the `dannr` binary.
//!
//! Each command resolves its configuration (config document plus flag
//! overrides), performs its work, and writes its artifacts together with a
//! `config.resolved.json` echo sufficient to reproduce them.

pub mod bench;
pub mod eval;
pub mod generate;
pub mod train;
