use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{brute_force_optimum, WeightedGraph, BRUTE_FORCE_LIMIT};

/// Where the normalizing optimum of an approximation ratio came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimumSource {
    /// Exhaustive search.
    Exact,
    /// Best cut seen by any solver and run on the instance.
    BestKnown,
}

/// Mean and population standard deviation of `cut / optimum`.
pub fn approximation_ratio(cuts: &[f64], optimum: f64) -> Result<(f64, f64)> {
    if !(optimum > 0.0 && optimum.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "optimum must be positive and finite, got {optimum}"
        )));
    }
    if cuts.is_empty() {
        return Err(Error::InvalidArgument("no runs to average".into()));
    }
    if let Some(bad) = cuts.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
        return Err(Error::InvalidArgument(format!("invalid cut value {bad}")));
    }
    let ratios: Vec<f64> = cuts.iter().map(|c| c / optimum).collect();
    Ok(mean_std(&ratios))
}

/// Mean and population standard deviation; `(0, 0)` for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Exact optimum for graphs the oracle can enumerate, otherwise the best
/// of `observed`.
pub fn reference_optimum(g: &WeightedGraph, observed: &[f64]) -> Result<(f64, OptimumSource)> {
    if g.n() <= BRUTE_FORCE_LIMIT {
        return Ok((brute_force_optimum(g)?.cut_value(), OptimumSource::Exact));
    }
    let best = observed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if best.is_nan() || best <= 0.0 {
        return Err(Error::InvalidArgument(
            "no positive cut observed to serve as best-known optimum".into(),
        ));
    }
    Ok((best, OptimumSource::BestKnown))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_optimal() {
        assert_eq!(approximation_ratio(&[7.5; 4], 7.5).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn two_runs() {
        let (m, s) = approximation_ratio(&[9.0, 10.0], 10.0).unwrap();
        assert!((m - 0.95).abs() < 1e-15);
        assert!((s - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_optimum() {
        assert!(approximation_ratio(&[1.0], 0.0).is_err());
        assert!(approximation_ratio(&[1.0], -2.0).is_err());
        assert!(approximation_ratio(&[], 1.0).is_err());
        assert!(approximation_ratio(&[-1.0], 1.0).is_err());
    }

    #[test]
    fn reference_modes() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        assert_eq!(reference_optimum(&g, &[]).unwrap(), (3.0, OptimumSource::Exact));
        let edges: Vec<_> = (0..29).map(|i| (i, i + 1, 1.0)).collect();
        let big = WeightedGraph::new(30, edges).unwrap();
        assert_eq!(
            reference_optimum(&big, &[20.0, 27.0]).unwrap(),
            (27.0, OptimumSource::BestKnown)
        );
        assert!(reference_optimum(&big, &[]).is_err());
    }
}
