use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{approximation_ratio, mean_std, OptimumSource, SolverRunRecord};

/// Aggregates of one (instance, solver) cell over its successful runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub runs: usize,
    pub ok_runs: usize,
    pub best_cut_mean: f64,
    /// `None` when the optimum is zero.
    pub ar: Option<(f64, f64)>,
    pub time_ms: (f64, f64),
    pub peak_mem_bytes: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub instance_id: String,
    pub optimum: f64,
    pub optimum_source: OptimumSource,
    /// Parallel to [`SummaryTables::solvers`]; `None` if every run failed.
    pub cells: Vec<Option<CellSummary>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTables {
    pub solvers: Vec<String>,
    pub rows: Vec<InstanceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMetric {
    ApproximationRatio,
    TimeMs,
    PeakMemory,
}

impl TableMetric {
    fn title(self) -> &'static str {
        match self {
            TableMetric::ApproximationRatio => "Approximation ratio (mean, std)",
            TableMetric::TimeMs => "Execution time in ms (mean, std)",
            TableMetric::PeakMemory => "Peak memory in bytes (mean, std)",
        }
    }

    fn higher_is_better(self) -> bool {
        self == TableMetric::ApproximationRatio
    }

    fn pick(self, c: &CellSummary) -> Option<(f64, f64)> {
        match self {
            TableMetric::ApproximationRatio => c.ar,
            TableMetric::TimeMs => Some(c.time_ms),
            TableMetric::PeakMemory => Some(c.peak_mem_bytes),
        }
    }
}

/// Builds per-cell aggregates. Instances in `exact` use that optimum;
/// the rest use the best cut any run reached.
pub fn summarize(
    records: &[SolverRunRecord],
    solvers: &[String],
    exact: &BTreeMap<String, f64>,
) -> Result<SummaryTables> {
    let mut instances: Vec<String> = Vec::new();
    for r in records {
        if !instances.contains(&r.instance_id) {
            instances.push(r.instance_id.clone());
        }
    }
    let mut rows = Vec::with_capacity(instances.len());
    for id in instances {
        let mine: Vec<&SolverRunRecord> = records.iter().filter(|r| r.instance_id == id).collect();
        let (optimum, optimum_source) = match exact.get(&id) {
            Some(&v) => (v, OptimumSource::Exact),
            None => (
                mine.iter()
                    .filter(|r| r.is_ok())
                    .map(|r| r.best_cut)
                    .fold(0.0, f64::max),
                OptimumSource::BestKnown,
            ),
        };
        let mut cells = Vec::with_capacity(solvers.len());
        for s in solvers {
            let runs: Vec<&&SolverRunRecord> = mine.iter().filter(|r| &r.solver_id == s).collect();
            let ok: Vec<&&SolverRunRecord> = runs.iter().copied().filter(|r| r.is_ok()).collect();
            if ok.is_empty() {
                cells.push(None);
                continue;
            }
            let cuts: Vec<f64> = ok.iter().map(|r| r.best_cut).collect();
            let ar = if optimum > 0.0 {
                Some(approximation_ratio(&cuts, optimum)?)
            } else {
                None
            };
            let times: Vec<f64> = ok.iter().map(|r| r.time_ms).collect();
            let mems: Vec<f64> = ok.iter().map(|r| r.peak_mem_bytes as f64).collect();
            cells.push(Some(CellSummary {
                runs: runs.len(),
                ok_runs: ok.len(),
                best_cut_mean: mean_std(&cuts).0,
                ar,
                time_ms: mean_std(&times),
                peak_mem_bytes: mean_std(&mems),
            }));
        }
        rows.push(InstanceRow {
            instance_id: id,
            optimum,
            optimum_source,
            cells,
        });
    }
    Ok(SummaryTables {
        solvers: solvers.to_vec(),
        rows,
    })
}

impl SummaryTables {
    /// Column indices holding the best mean in each row (ties included).
    pub fn best_per_row(&self, metric: TableMetric) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| {
                let means: Vec<Option<f64>> = row
                    .cells
                    .iter()
                    .map(|c| c.as_ref().and_then(|c| metric.pick(c)).map(|v| v.0))
                    .collect();
                let best = means.iter().flatten().copied().reduce(|a, b| {
                    if metric.higher_is_better() {
                        a.max(b)
                    } else {
                        a.min(b)
                    }
                });
                match best {
                    Some(b) => (0..means.len()).filter(|&j| means[j] == Some(b)).collect(),
                    None => Vec::new(),
                }
            })
            .collect()
    }

    /// Three Markdown tables (AR, time, memory) with the best cell of each
    /// row in bold.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let any_best_known = self
            .rows
            .iter()
            .any(|r| r.optimum_source == OptimumSource::BestKnown);
        for metric in [
            TableMetric::ApproximationRatio,
            TableMetric::TimeMs,
            TableMetric::PeakMemory,
        ] {
            let _ = writeln!(out, "## {}\n", metric.title());
            let _ = writeln!(out, "| instance | {} |", self.solvers.join(" | "));
            let _ = writeln!(out, "|---|{}", "---|".repeat(self.solvers.len()));
            let best = self.best_per_row(metric);
            for (row, best) in self.rows.iter().zip(best) {
                let mark = if row.optimum_source == OptimumSource::BestKnown
                    && metric == TableMetric::ApproximationRatio
                {
                    "*"
                } else {
                    ""
                };
                let _ = write!(out, "| {}{mark} |", row.instance_id);
                for (j, cell) in row.cells.iter().enumerate() {
                    let text = match cell.as_ref().map(|c| metric.pick(c)) {
                        None => "failed".to_string(),
                        Some(None) => "n/a".to_string(),
                        Some(Some((m, s))) => match metric {
                            TableMetric::ApproximationRatio => format!("({m:.3}, {s:.3})"),
                            TableMetric::TimeMs => format!("({m:.1}, {s:.1})"),
                            TableMetric::PeakMemory => format!("({m:.0}, {s:.0})"),
                        },
                    };
                    if best.contains(&j) {
                        let _ = write!(out, " **{text}** |");
                    } else {
                        let _ = write!(out, " {text} |");
                    }
                }
                out.push('\n');
            }
            if metric == TableMetric::ApproximationRatio && any_best_known {
                out.push_str("\n\\* normalized by the best cut found by any solver (best-known mode)\n");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{MemMode, RunStatus};

    fn rec(inst: &str, solver: &str, r: usize, cut: f64, ok: bool) -> SolverRunRecord {
        SolverRunRecord {
            instance_id: inst.into(),
            solver_id: solver.into(),
            params: serde_json::Value::Null,
            run_index: r,
            seed: 0,
            best_cut: cut,
            energy: None,
            time_ms: cut,
            peak_mem_bytes: 100,
            mem_mode: MemMode::Estimated,
            status: if ok { RunStatus::Ok } else { RunStatus::Failed },
            error: None,
        }
    }

    #[test]
    fn aggregates_and_bolds() {
        let records = vec![
            rec("a", "x", 1, 9.0, true),
            rec("a", "x", 2, 10.0, true),
            rec("a", "y", 1, 8.0, true),
            rec("a", "y", 2, 0.0, false),
            rec("b", "x", 1, 5.0, true),
            rec("b", "y", 1, 6.0, true),
        ];
        let solvers = vec!["x".to_string(), "y".to_string()];
        let exact = BTreeMap::from([("a".to_string(), 10.0)]);
        let t = summarize(&records, &solvers, &exact).unwrap();
        let a = t.rows[0].cells[0].as_ref().unwrap();
        let (m, s) = a.ar.unwrap();
        assert!((m - 0.95).abs() < 1e-12 && (s - 0.05).abs() < 1e-12);
        let ay = t.rows[0].cells[1].as_ref().unwrap();
        assert_eq!((ay.runs, ay.ok_runs), (2, 1));
        assert_eq!(t.rows[1].optimum_source, OptimumSource::BestKnown);
        assert_eq!(t.rows[1].optimum, 6.0);
        assert_eq!(t.best_per_row(TableMetric::ApproximationRatio), vec![vec![0], vec![1]]);
        assert_eq!(t.best_per_row(TableMetric::TimeMs), vec![vec![1], vec![0]]);
        let md = t.to_markdown();
        assert!(md.contains("| a | **(0.950, 0.050)** | (0.800, 0.000) |"));
        assert!(md.contains("| b* |"));
    }

    #[test]
    fn failed_cell_is_marked() {
        let records = vec![rec("a", "x", 1, 3.0, true), rec("a", "y", 1, 0.0, false)];
        let t = summarize(&records, &["x".into(), "y".into()], &BTreeMap::new()).unwrap();
        assert!(t.rows[0].cells[1].is_none());
        assert!(t.to_markdown().contains("failed"));
    }
}
