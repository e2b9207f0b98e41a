use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::graph::WeightedGraph;
use crate::rng;

/// Parameters of a weighted Erdős–Rényi instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    #[serde(default = "default_density")]
    pub edge_probability: f64,
    #[serde(default)]
    pub weight_min: f64,
    #[serde(default = "default_wmax")]
    pub weight_max: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_density() -> f64 {
    0.8
}

fn default_wmax() -> f64 {
    2.0
}

impl GeneratorConfig {
    /// Density 0.8 with weights uniform in `[0, 2]`.
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            edge_probability: default_density(),
            weight_min: 0.0,
            weight_max: default_wmax(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("need at least 2 nodes, got {}", self.n)));
        }
        if !(self.edge_probability > 0.0 && self.edge_probability <= 1.0) {
            return Err(Error::Config(format!(
                "edge probability {} outside (0, 1]",
                self.edge_probability
            )));
        }
        if !(self.weight_min >= 0.0 && self.weight_min <= self.weight_max && self.weight_max.is_finite()) {
            return Err(Error::Config(format!(
                "weight range [{}, {}] is invalid",
                self.weight_min, self.weight_max
            )));
        }
        Ok(())
    }
}

/// G(n, p) topology with uniform edge weights.
///
/// Pairs are visited in `(u, v)` lexicographic order with `u < v`; each
/// pair consumes one uniform draw for presence and, when present, one
/// more for the weight.
pub fn generate(cfg: &GeneratorConfig) -> Result<WeightedGraph> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);
    let span = cfg.weight_max - cfg.weight_min;
    let mut edges = Vec::new();
    for u in 0..cfg.n {
        for v in (u + 1)..cfg.n {
            if rng.random::<f64>() < cfg.edge_probability {
                let w = cfg.weight_min + span * rng.random::<f64>();
                edges.push((u, v, w));
            }
        }
    }
    WeightedGraph::new(cfg.n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial_band(pairs: usize, p: f64) -> (f64, f64) {
        let mean = pairs as f64 * p;
        (mean, (pairs as f64 * p * (1.0 - p)).sqrt())
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = GeneratorConfig::new(40, 9);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = generate(&GeneratorConfig::new(40, 10)).unwrap();
        assert_ne!(generate(&cfg).unwrap(), other);
    }

    #[test]
    fn edge_counts_follow_binomial() {
        // Reference instances: 37 edges at n=10, 24831 at n=250.
        for (n, reference) in [(10usize, 37usize), (250, 24831)] {
            let (mean, sd) = binomial_band(n * (n - 1) / 2, 0.8);
            assert!((reference as f64 - mean).abs() <= 3.0 * sd);
            for seed in 0..3 {
                let g = generate(&GeneratorConfig::new(n, seed)).unwrap();
                let m = g.num_edges() as f64;
                assert!((m - mean).abs() <= 4.0 * sd, "n={n} seed={seed}: {m} edges");
            }
        }
    }

    #[test]
    fn weights_stay_in_range() {
        let cfg = GeneratorConfig {
            weight_min: 0.5,
            weight_max: 0.75,
            ..GeneratorConfig::new(30, 3)
        };
        let g = generate(&cfg).unwrap();
        assert!(g.edges().iter().all(|e| (0.5..=0.75).contains(&e.w)));
    }

    #[test]
    fn full_density_gives_complete_graph() {
        let cfg = GeneratorConfig {
            edge_probability: 1.0,
            ..GeneratorConfig::new(12, 1)
        };
        assert_eq!(generate(&cfg).unwrap().num_edges(), 66);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let base = GeneratorConfig::new(10, 0);
        for bad in [
            GeneratorConfig { edge_probability: 0.0, ..base.clone() },
            GeneratorConfig { edge_probability: 1.5, ..base.clone() },
            GeneratorConfig { weight_min: 3.0, ..base.clone() },
            GeneratorConfig { weight_min: -1.0, ..base.clone() },
            GeneratorConfig { n: 1, ..base.clone() },
        ] {
            assert!(generate(&bad).is_err());
        }
    }
}
