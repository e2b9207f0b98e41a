use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{cd_diagram_data, friedman_test, mean_std, nemenyi_cd, CdDiagram, SolverRunRecord};

/// Quantity ranked across solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMetric {
    /// Best cut, higher is better. Per instance this ranks exactly like
    /// the approximation ratio.
    Cut,
    TimeMs,
    PeakMemory,
}

impl RankMetric {
    fn value(self, r: &SolverRunRecord) -> f64 {
        match self {
            RankMetric::Cut => r.best_cut,
            RankMetric::TimeMs => r.time_ms,
            RankMetric::PeakMemory => r.peak_mem_bytes as f64,
        }
    }

    fn higher_is_better(self) -> bool {
        self == RankMetric::Cut
    }
}

/// What one block of the rank test is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockMode {
    /// One block per instance, cell means.
    Instance,
    /// One block per (instance, run index), raw run values.
    Run,
}

/// Statistics report; field names are stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    #[serde(rename = "chi2_F")]
    pub chi2_f: f64,
    pub chi2_f_uncorrected: f64,
    pub p_value: f64,
    /// Solver ids, parallel to `avg_ranks`.
    pub solvers: Vec<String>,
    pub avg_ranks: Vec<f64>,
    /// `None` when the number of solvers is outside the tabulated range.
    pub cd: Option<f64>,
    pub groups: Vec<Vec<String>>,
    pub blocks: usize,
    pub block_mode: BlockMode,
    pub metric: RankMetric,
}

/// Solver names, block ids and `table[block][solver]`.
pub type RankTable = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

/// `(solvers, block ids, table[block][solver])` from successful runs.
/// Every block must have a value for every solver seen anywhere.
pub fn rank_table(
    records: &[SolverRunRecord],
    metric: RankMetric,
    mode: BlockMode,
) -> Result<RankTable> {
    let ok: Vec<&SolverRunRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let solvers: Vec<String> = ok
        .iter()
        .map(|r| r.solver_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    // block id -> solver -> values
    let mut cells: BTreeMap<String, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for r in &ok {
        let block = match mode {
            BlockMode::Instance => r.instance_id.clone(),
            BlockMode::Run => format!("{}#{}", r.instance_id, r.run_index),
        };
        cells
            .entry(block)
            .or_default()
            .entry(r.solver_id.as_str())
            .or_default()
            .push(metric.value(r));
    }
    // Instances whose runs all failed still count as blocks with gaps.
    if mode == BlockMode::Instance {
        for r in records {
            cells.entry(r.instance_id.clone()).or_default();
        }
    }
    let mut table = Vec::with_capacity(cells.len());
    for (block, by_solver) in &cells {
        let mut row = Vec::with_capacity(solvers.len());
        for s in &solvers {
            match by_solver.get(s.as_str()) {
                Some(v) => row.push(mean_std(v).0),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "solver '{s}' has no successful runs on block '{block}'"
                    )))
                }
            }
        }
        table.push(row);
    }
    Ok((solvers, cells.into_keys().collect(), table))
}

/// Friedman test, Nemenyi CD and CD-diagram data for a set of records.
pub fn stats_report(
    records: &[SolverRunRecord],
    metric: RankMetric,
    mode: BlockMode,
) -> Result<(StatsReport, Option<CdDiagram>)> {
    let (solvers, _, table) = rank_table(records, metric, mode)?;
    let f = friedman_test(&table, metric.higher_is_better())?;
    let cd = nemenyi_cd(solvers.len(), table.len(), 0.05).ok();
    let diagram = cd
        .map(|cd| cd_diagram_data(&solvers, &f.avg_ranks, cd))
        .transpose()?;
    Ok((
        StatsReport {
            chi2_f: f.chi2_f,
            chi2_f_uncorrected: f.chi2_f_uncorrected,
            p_value: f.p_value,
            solvers,
            avg_ranks: f.avg_ranks,
            cd,
            groups: diagram.as_ref().map(|d| d.groups.clone()).unwrap_or_default(),
            blocks: table.len(),
            block_mode: mode,
            metric,
        },
        diagram,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{MemMode, RunStatus};

    fn rec(inst: &str, solver: &str, r: usize, cut: f64) -> SolverRunRecord {
        SolverRunRecord {
            instance_id: inst.into(),
            solver_id: solver.into(),
            params: serde_json::Value::Null,
            run_index: r,
            seed: 0,
            best_cut: cut,
            energy: None,
            time_ms: 1.0,
            peak_mem_bytes: 0,
            mem_mode: MemMode::Estimated,
            status: RunStatus::Ok,
            error: None,
        }
    }

    #[test]
    fn identical_columns_give_zero() {
        let recs: Vec<_> = (0..4)
            .flat_map(|i| ["a", "b", "c"].map(|s| rec(&format!("g{i}"), s, 1, 5.0)))
            .collect();
        let (rep, _) = stats_report(&recs, RankMetric::Cut, BlockMode::Instance).unwrap();
        assert_eq!(rep.chi2_f, 0.0);
        assert_eq!(rep.avg_ranks, vec![2.0; 3]);
        let json = serde_json::to_value(&rep).unwrap();
        for k in ["chi2_F", "p_value", "avg_ranks", "cd", "groups"] {
            assert!(json.get(k).is_some(), "{k}");
        }
    }

    #[test]
    fn dominant_solver_stands_alone() {
        let mut recs = Vec::new();
        for i in 0..20 {
            let g = format!("g{i}");
            recs.push(rec(&g, "best", 1, 100.0));
            recs.push(rec(&g, "mid1", 1, 50.0 + (i % 3) as f64));
            recs.push(rec(&g, "mid2", 1, 50.0 + ((i + 1) % 3) as f64));
            recs.push(rec(&g, "mid3", 1, 50.0 + ((i + 2) % 3) as f64));
        }
        let (rep, diagram) = stats_report(&recs, RankMetric::Cut, BlockMode::Instance).unwrap();
        let d = diagram.unwrap();
        assert_eq!(d.solvers[0], "best");
        assert_eq!(d.groups[0], vec!["best".to_string()]);
        assert!(rep.p_value < 1e-6);
    }

    #[test]
    fn per_run_blocks() {
        let recs = vec![
            rec("g", "a", 1, 3.0),
            rec("g", "b", 1, 2.0),
            rec("g", "a", 2, 1.0),
            rec("g", "b", 2, 2.0),
        ];
        let (solvers, blocks, table) = rank_table(&recs, RankMetric::Cut, BlockMode::Run).unwrap();
        assert_eq!(solvers, ["a", "b"]);
        assert_eq!(blocks, ["g#1", "g#2"]);
        assert_eq!(table, vec![vec![3.0, 2.0], vec![1.0, 2.0]]);
        let (_, _, means) = rank_table(&recs, RankMetric::Cut, BlockMode::Instance).unwrap();
        assert_eq!(means, vec![vec![2.0, 2.0]]);
    }

    #[test]
    fn gaps_are_named() {
        let recs = vec![rec("g1", "a", 1, 1.0), rec("g1", "b", 1, 1.0), rec("g2", "a", 1, 1.0)];
        let err = rank_table(&recs, RankMetric::Cut, BlockMode::Instance).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("'b'") && msg.contains("'g2'"), "{msg}");
    }
}
