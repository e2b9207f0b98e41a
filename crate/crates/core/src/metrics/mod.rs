//! Approximation ratios, run records, resource measurement and rank
//! statistics.

pub mod ar;
pub mod memory;
pub mod record;
pub mod stats;

pub use ar::{approximation_ratio, mean_std, reference_optimum, OptimumSource};
pub use memory::{
    measure_run, measure_run_estimated, tracking_installed, Measured, TrackingAllocator};
pub use record::{
    parse_jsonl, read_records, to_jsonl, write_atomic, write_records, MemMode, RunStatus,
    SolverRunRecord,
};
pub use stats::{
    cd_diagram_data, cd_groups, chi_square_sf, emit_cd_diagram_data, friedman_test, nemenyi_cd,
    nemenyi_q, rank_row, CdDiagram, FriedmanResult,
};
