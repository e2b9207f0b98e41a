use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Ranks one block; rank 1 is the best value, ties share the average rank.
pub fn rank_row(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let c = values[a].total_cmp(&values[b]);
        if higher_is_better {
            c.reverse()
        } else {
            c
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    /// Tie-corrected statistic.
    #[serde(rename = "chi2_F")]
    pub chi2_f: f64,
    /// `12n/(k(k+1)) · (Σ R̄_j² − k(k+1)²/4)` without the tie correction.
    pub chi2_f_uncorrected: f64,
    pub p_value: f64,
    pub avg_ranks: Vec<f64>,
    pub blocks: usize,
    pub treatments: usize,
}

/// Friedman rank test over `table[block][treatment]`.
pub fn friedman_test(table: &[Vec<f64>], higher_is_better: bool) -> Result<FriedmanResult> {
    let n = table.len();
    let k = table.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(Error::InvalidArgument(format!(
            "Friedman test needs at least 2 blocks and 2 treatments, got {n}x{k}"
        )));
    }
    if let Some(i) = table.iter().position(|r| r.len() != k) {
        return Err(Error::InvalidArgument(format!(
            "row {i} has {} entries, expected {k}",
            table[i].len()
        )));
    }
    if table.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("table contains NaN".into()));
    }
    let (nf, kf) = (n as f64, k as f64);
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in table {
        let ranks = rank_row(row, higher_is_better);
        for (s, r) in rank_sums.iter_mut().zip(&ranks) {
            *s += r;
        }
        let mut sorted = row.clone();
        sorted.sort_by(f64::total_cmp);
        for group in sorted.chunk_by(|a, b| a == b) {
            let t = group.len() as f64;
            tie_term += t * t * t - t;
        }
    }
    let avg_ranks: Vec<f64> = rank_sums.iter().map(|s| s / nf).collect();
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let uncorrected = 12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0);
    let denom = 1.0 - tie_term / (nf * kf * (kf * kf - 1.0));
    let chi2_f = if denom > 1e-12 {
        (uncorrected / denom).max(0.0)
    } else {
        0.0
    };
    Ok(FriedmanResult {
        chi2_f,
        chi2_f_uncorrected: uncorrected.max(0.0),
        p_value: chi_square_sf(chi2_f, k - 1)?,
        avg_ranks,
        blocks: n,
        treatments: k,
    })
}

/// `P(X ≥ x)` for `X ~ χ²(dof)`.
pub fn chi_square_sf(x: f64, dof: usize) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidArgument(format!("chi-square with {dof} dof: {e}")))?;
    Ok(if x <= 0.0 { 1.0 } else { dist.sf(x) })
}

/// Two-tailed Nemenyi critical values `q_{0.05,k}` for `k = 2..=10`.
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];

pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64> {
    if alpha != 0.05 {
        return Err(Error::InvalidArgument(format!(
            "only alpha = 0.05 is tabulated, got {alpha}"
        )));
    }
    if !(2..=10).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "Nemenyi constants are tabulated for 2 <= k <= 10, got {k}"
        )));
    }
    Ok(Q_05[k - 2])
}

/// `q_{α,k} · sqrt(k(k+1)/(6n))`.
pub fn nemenyi_cd(k: usize, n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("critical difference needs n >= 1".into()));
    }
    let q = nemenyi_q(k, alpha)?;
    let kf = k as f64;
    Ok(q * (kf * (kf + 1.0) / (6.0 * n as f64)).sqrt())
}

/// Maximal runs of rank-sorted treatments whose spread is below `cd`.
/// Indices refer to `avg_ranks`; groups come out ordered by best rank.
pub fn cd_groups(avg_ranks: &[f64], cd: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..avg_ranks.len()).collect();
    order.sort_by(|&a, &b| avg_ranks[a].total_cmp(&avg_ranks[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last_end = 0;
    for start in 0..order.len() {
        let mut end = start;
        while end + 1 < order.len() && avg_ranks[order[end + 1]] - avg_ranks[order[start]] < cd {
            end += 1;
        }
        if start == 0 || end > last_end {
            groups.push(order[start..=end].to_vec());
            last_end = end;
        }
    }
    groups
}

/// Data behind a critical-difference diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdDiagram {
    /// Sorted by ascending average rank.
    pub solvers: Vec<String>,
    pub avg_ranks: Vec<f64>,
    pub cd: f64,
    pub groups: Vec<Vec<String>>,
}

pub fn cd_diagram_data(solvers: &[String], avg_ranks: &[f64], cd: f64) -> Result<CdDiagram> {
    if solvers.len() != avg_ranks.len() {
        return Err(Error::InvalidArgument(format!(
            "{} solver ids for {} ranks",
            solvers.len(),
            avg_ranks.len()
        )));
    }
    let mut order: Vec<usize> = (0..avg_ranks.len()).collect();
    order.sort_by(|&a, &b| avg_ranks[a].total_cmp(&avg_ranks[b]).then(a.cmp(&b)));
    Ok(CdDiagram {
        solvers: order.iter().map(|&i| solvers[i].clone()).collect(),
        avg_ranks: order.iter().map(|&i| avg_ranks[i]).collect(),
        cd,
        groups: cd_groups(avg_ranks, cd)
            .into_iter()
            .map(|g| g.into_iter().map(|i| solvers[i].clone()).collect())
            .collect(),
    })
}

/// Writes the diagram data as pretty JSON.
pub fn emit_cd_diagram_data(path: &Path, diagram: &CdDiagram) -> Result<()> {
    let text = serde_json::to_string_pretty(diagram)?;
    crate::metrics::record::write_atomic(path, text.as_bytes())
}
