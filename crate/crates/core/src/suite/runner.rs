use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{WeightedGraph, BRUTE_FORCE_LIMIT};
use crate::metrics::{
    measure_run, measure_run_estimated, write_atomic, write_records, MemMode, RunStatus,
    SolverRunRecord,
};
use crate::rng::fnv1a;
use crate::suite::config::SuiteConfig;
use crate::suite::preset::{Preset, SolverSpec};
use crate::suite::tables::{summarize, SummaryTables};

/// `base_seed ⊕ fnv1a(instance_id 0x00 solver_id 0x00 run_index_le)`.
pub fn cell_seed(base_seed: u64, instance_id: &str, solver_id: &str, run_index: usize) -> u64 {
    let mut bytes = Vec::with_capacity(instance_id.len() + solver_id.len() + 10);
    bytes.extend_from_slice(instance_id.as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(solver_id.as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(&(run_index as u64).to_le_bytes());
    base_seed ^ fnv1a(&bytes)
}

/// Runs one solver once and captures the outcome as a record; solver
/// errors become `failed` records.
pub fn run_single(
    instance_id: &str,
    solver_id: &str,
    g: &WeightedGraph,
    spec: &SolverSpec,
    run_index: usize,
    track_memory: bool,
) -> SolverRunRecord {
    let estimate = spec.footprint_bytes(g.n()) as u64;
    let solve = || spec.validate().and_then(|_| spec.solve(g));
    let measured = if track_memory {
        measure_run(estimate, solve)
    } else {
        measure_run_estimated(estimate, solve)
    };
    let (best_cut, energy, status, error) = match measured.value {
        Ok(out) => (out.assignment.cut_value(), out.energy, RunStatus::Ok, None),
        Err(e) => (0.0, None, RunStatus::Failed, Some(e.to_string())),
    };
    SolverRunRecord {
        instance_id: instance_id.to_string(),
        solver_id: solver_id.to_string(),
        params: spec.params(),
        run_index,
        seed: spec.seed(),
        best_cut,
        energy,
        time_ms: measured.time_ms,
        peak_mem_bytes: measured.peak_mem_bytes,
        mem_mode: measured.mem_mode,
        status,
        error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Use the tracking allocator when installed; forces serial cells.
    pub track_memory: bool,
    /// Run cells concurrently; ignored while tracking memory.
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            track_memory: true,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub output_dir: PathBuf,
    pub records: Vec<SolverRunRecord>,
    pub tables: SummaryTables,
    pub total_cells: usize,
    /// Cells where every run failed.
    pub failed_cells: usize,
}

/// File name of one cell's records.
pub fn cell_file_name(instance_id: &str, preset: Preset) -> String {
    format!("{instance_id}__{}.jsonl", preset.id())
}

/// Runs every (instance, preset) cell `cfg.runs` times and writes
/// `cells/<instance>__<preset>.jsonl`, `records.jsonl`, `tables.md` and
/// `tables.json` under the output directory (relative to `base_dir`).
pub fn run_suite(cfg: &SuiteConfig, base_dir: &Path, opts: RunOptions) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let graphs: Vec<(String, WeightedGraph)> = cfg
        .instances
        .iter()
        .map(|inst| Ok((inst.id.clone(), inst.load(base_dir)?)))
        .collect::<Result<_>>()?;
    let out_dir = base_dir.join(&cfg.output_dir);
    let cells_dir = out_dir.join("cells");
    std::fs::create_dir_all(&cells_dir).map_err(|e| Error::io(&cells_dir, e))?;

    let cells: Vec<(usize, Preset)> = (0..graphs.len())
        .flat_map(|i| cfg.presets.iter().map(move |&p| (i, p)))
        .collect();
    let run_cell = |&(i, preset): &(usize, Preset)| -> Result<Vec<SolverRunRecord>> {
        let (id, g) = &graphs[i];
        let track = opts.track_memory;
        let records: Vec<SolverRunRecord> = (1..=cfg.runs)
            .map(|r| {
                let seed = cell_seed(cfg.base_seed, id, preset.id(), r);
                let spec = preset.resolve(g.n(), seed, &cfg.budget);
                run_single(id, preset.id(), g, &spec, r, track)
            })
            .collect();
        write_records(&cells_dir.join(cell_file_name(id, preset)), &records)?;
        Ok(records)
    };
    let per_cell: Vec<Vec<SolverRunRecord>> = if opts.parallel && !opts.track_memory {
        cells.par_iter().map(run_cell).collect::<Result<_>>()?
    } else {
        cells.iter().map(run_cell).collect::<Result<_>>()?
    };

    let failed_cells = per_cell
        .iter()
        .filter(|rs| rs.iter().all(|r| r.status == RunStatus::Failed))
        .count();
    let records: Vec<SolverRunRecord> = per_cell.into_iter().flatten().collect();
    write_records(&out_dir.join("records.jsonl"), &records)?;

    let mut exact = BTreeMap::new();
    for (id, g) in &graphs {
        if g.n() <= BRUTE_FORCE_LIMIT {
            exact.insert(id.clone(), crate::instance::brute_force_optimum(g)?.cut_value());
        }
    }
    let solvers: Vec<String> = cfg.presets.iter().map(|p| p.id().to_string()).collect();
    let tables = summarize(&records, &solvers, &exact)?;
    write_atomic(&out_dir.join("tables.md"), tables.to_markdown().as_bytes())?;
    write_atomic(
        &out_dir.join("tables.json"),
        serde_json::to_string_pretty(&tables)?.as_bytes(),
    )?;
    Ok(SuiteOutcome {
        output_dir: out_dir,
        records,
        tables,
        total_cells: cells.len(),
        failed_cells,
    })
}

/// Whether a record's memory figure came from the allocator.
pub fn is_tracked(r: &SolverRunRecord) -> bool {
    r.mem_mode == MemMode::Tracked
}
