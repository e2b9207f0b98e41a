use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{cga_solve, gaoc_solve, CgaConfig, GaOcConfig};
use crate::gnn::{train_and_project, GnnConfig};
use crate::instance::{CutAssignment, WeightedGraph};
use crate::tn::{dmrg_solve, DmrgConfig};

/// The eight benchmark solver configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Preset {
    DmrgChi2,
    DmrgChi10p,
    DmrgChi20p,
    Gnn,
    GaOc,
    Cga500,
    Cga1000,
    Cga2000,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::DmrgChi2,
        Preset::DmrgChi10p,
        Preset::DmrgChi20p,
        Preset::Gnn,
        Preset::GaOc,
        Preset::Cga500,
        Preset::Cga1000,
        Preset::Cga2000,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Preset::DmrgChi2 => "dmrg-chi2",
            Preset::DmrgChi10p => "dmrg-chi10p",
            Preset::DmrgChi20p => "dmrg-chi20p",
            Preset::Gnn => "gnn",
            Preset::GaOc => "gaoc",
            Preset::Cga500 => "cga-500",
            Preset::Cga1000 => "cga-1000",
            Preset::Cga2000 => "cga-2000",
        }
    }

    /// Concrete solver settings for an `n`-node instance.
    pub fn resolve(self, n: usize, seed: u64, budget: &Budget) -> SolverSpec {
        let percent_chi = |p: usize| ((p * n).div_ceil(100)).max(1);
        let spec = match self {
            Preset::DmrgChi2 => SolverSpec::Dmrg(DmrgConfig::with_chi(2, seed)),
            Preset::DmrgChi10p => SolverSpec::Dmrg(DmrgConfig::with_chi(percent_chi(10), seed)),
            Preset::DmrgChi20p => SolverSpec::Dmrg(DmrgConfig::with_chi(percent_chi(20), seed)),
            Preset::Gnn => SolverSpec::Gnn(GnnConfig::with_seed(seed)),
            Preset::GaOc => SolverSpec::GaOc(GaOcConfig::with_seed(seed)),
            Preset::Cga500 => SolverSpec::Cga(CgaConfig::with_population(500, seed)),
            Preset::Cga1000 => SolverSpec::Cga(CgaConfig::with_population(1000, seed)),
            Preset::Cga2000 => SolverSpec::Cga(CgaConfig::with_population(2000, seed)),
        };
        spec.with_budget(budget)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Preset::ALL.iter().map(|p| p.id()).collect();
                Error::Config(format!("unknown preset '{s}' (known: {})", known.join(", ")))
            })
    }
}

impl TryFrom<String> for Preset {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Preset> for String {
    fn from(p: Preset) -> String {
        p.id().to_string()
    }
}

/// Optional caps on iteration counts, for quick suites.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub cga_generations: Option<usize>,
    pub gaoc_iterations: Option<usize>,
    pub gnn_epochs: Option<usize>,
    pub dmrg_sweeps: Option<usize>,
    pub lanczos_iters: Option<usize>,
}

/// A fully specified solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "lowercase")]
pub enum SolverSpec {
    Cga(CgaConfig),
    GaOc(GaOcConfig),
    Gnn(GnnConfig),
    Dmrg(DmrgConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub assignment: CutAssignment,
    /// Final variational energy, DMRG only.
    pub energy: Option<f64>,
}

impl SolverSpec {
    pub fn with_budget(mut self, budget: &Budget) -> Self {
        match &mut self {
            SolverSpec::Cga(c) => {
                if let Some(g) = budget.cga_generations {
                    c.generations = g;
                }
            }
            SolverSpec::GaOc(c) => {
                if let Some(i) = budget.gaoc_iterations {
                    c.iterations = i;
                }
            }
            SolverSpec::Gnn(c) => {
                if let Some(e) = budget.gnn_epochs {
                    c.max_epochs = e;
                }
            }
            SolverSpec::Dmrg(c) => {
                if let Some(s) = budget.dmrg_sweeps {
                    c.max_sweeps = s;
                }
                if let Some(l) = budget.lanczos_iters {
                    c.lanczos_iters = l;
                }
            }
        }
        self
    }

    pub fn seed(&self) -> u64 {
        match self {
            SolverSpec::Cga(c) => c.seed,
            SolverSpec::GaOc(c) => c.seed,
            SolverSpec::Gnn(c) => c.seed,
            SolverSpec::Dmrg(c) => c.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SolverSpec::Cga(c) => c.validate(),
            SolverSpec::GaOc(c) => c.validate(),
            SolverSpec::Gnn(c) => c.validate(),
            SolverSpec::Dmrg(c) => c.validate(),
        }
    }

    /// Settings as a JSON object, without the solver tag.
    pub fn params(&self) -> serde_json::Value {
        let value = match self {
            SolverSpec::Cga(c) => serde_json::to_value(c),
            SolverSpec::GaOc(c) => serde_json::to_value(c),
            SolverSpec::Gnn(c) => serde_json::to_value(c),
            SolverSpec::Dmrg(c) => serde_json::to_value(c),
        };
        value.unwrap_or(serde_json::Value::Null)
    }

    pub fn footprint_bytes(&self, n: usize) -> usize {
        match self {
            SolverSpec::Cga(c) => c.footprint_bytes(n),
            SolverSpec::GaOc(c) => c.footprint_bytes(n),
            SolverSpec::Gnn(c) => c.footprint_bytes(n),
            SolverSpec::Dmrg(c) => c.footprint_bytes(n),
        }
    }

    pub fn solve(&self, g: &WeightedGraph) -> Result<SolveOutcome> {
        Ok(match self {
            SolverSpec::Cga(c) => SolveOutcome {
                assignment: cga_solve(g, c)?.best,
                energy: None,
            },
            SolverSpec::GaOc(c) => SolveOutcome {
                assignment: gaoc_solve(g, c)?.best,
                energy: None,
            },
            SolverSpec::Gnn(c) => SolveOutcome {
                assignment: train_and_project(g, c)?.assignment,
                energy: None,
            },
            SolverSpec::Dmrg(c) => {
                let r = dmrg_solve(g, c)?;
                SolveOutcome {
                    assignment: r.assignment,
                    energy: Some(r.energy),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.id().parse::<Preset>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<Preset>(&json).unwrap(), p);
        }
        assert!("dmrg".parse::<Preset>().is_err());
    }

    #[test]
    fn percent_bond_dimensions() {
        let chi = |p: Preset, n| match p.resolve(n, 0, &Budget::default()) {
            SolverSpec::Dmrg(c) => c.chi,
            _ => unreachable!(),
        };
        assert_eq!(chi(Preset::DmrgChi2, 250), 2);
        assert_eq!(chi(Preset::DmrgChi10p, 100), 10);
        assert_eq!(chi(Preset::DmrgChi10p, 105), 11);
        assert_eq!(chi(Preset::DmrgChi20p, 100), 20);
        assert_eq!(chi(Preset::DmrgChi10p, 5), 1);
    }

    #[test]
    fn budget_overrides() {
        let b = Budget {
            cga_generations: Some(7),
            dmrg_sweeps: Some(3),
            ..Budget::default()
        };
        match Preset::Cga1000.resolve(20, 5, &b) {
            SolverSpec::Cga(c) => {
                assert_eq!((c.population_size, c.generations, c.seed), (1000, 7, 5));
            }
            other => panic!("{other:?}"),
        }
        match Preset::DmrgChi2.resolve(20, 5, &b) {
            SolverSpec::Dmrg(c) => assert_eq!(c.max_sweeps, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn solve_single_edge() {
        let g = WeightedGraph::new(2, [(0, 1, 1.5)]).unwrap();
        let b = Budget {
            cga_generations: Some(5),
            gaoc_iterations: Some(5),
            gnn_epochs: Some(200),
            ..Budget::default()
        };
        for p in [Preset::DmrgChi2, Preset::GaOc, Preset::Cga500] {
            let out = p.resolve(2, 1, &b).solve(&g).unwrap();
            assert_eq!(out.assignment.cut_value(), 1.5, "{p}");
        }
    }
}
