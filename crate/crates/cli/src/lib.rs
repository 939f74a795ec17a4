// Copyright 2026 The infodyn Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment runner behind the `infodyn` binary.
//!
//! A run reads one TOML config, validates every parameter up front, executes
//! the experiment and writes `<out>/<kind>.csv` plus `<out>/summary.json`.
//! Output bytes depend only on the config bytes and the seed.

pub mod config;
pub mod runner;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind, Violation};
pub use runner::{execute, run, validate, RunError, RunOptions};
pub use table::ResultTable;
