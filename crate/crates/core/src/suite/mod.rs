//! Benchmark orchestration: solver presets, suite files, the cell runner,
//! result tables and rank statistics over run records.

pub mod config;
pub mod preset;
pub mod report;
pub mod runner;
pub mod tables;

pub use config::{InstanceSpec, SuiteConfig};
pub use preset::{Budget, Preset, SolveOutcome, SolverSpec};
pub use report::{rank_table, stats_report, BlockMode, RankMetric, RankTable, StatsReport};
pub use runner::{cell_file_name, cell_seed, run_single, run_suite, RunOptions, SuiteOutcome};
pub use tables::{summarize, CellSummary, InstanceRow, SummaryTables, TableMetric};
