use rand::seq::index;
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::cga::fitness_of;
use crate::ga::{argmax, GaRunResult};
use crate::instance::{CutAssignment, WeightedGraph};
use crate::rng::{self, SolverRng};

/// Flip gains at or below this are treated as non-improving.
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOcConfig {
    pub population_size: usize,
    pub offspring_per_iter: usize,
    pub tournament_size: usize,
    pub population_mutation_fraction: f64,
    pub gene_mutation_prob: f64,
    /// Probability that a disputed gene comes from the fitter parent.
    pub fitter_bias: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for GaOcConfig {
    fn default() -> Self {
        Self {
            population_size: 300,
            offspring_per_iter: 50,
            tournament_size: 4,
            population_mutation_fraction: 0.20,
            gene_mutation_prob: 0.10,
            fitter_bias: 0.7,
            iterations: 1000,
            seed: 0,
        }
    }
}

impl GaOcConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.population_size;
        if p < 2 || self.iterations == 0 || self.offspring_per_iter == 0 || self.tournament_size == 0 {
            return Err(Error::Config(
                "population (>= 2), offspring, tournament size and iterations must be positive".into(),
            ));
        }
        if self.tournament_size > p || self.offspring_per_iter >= p {
            return Err(Error::Config(format!(
                "tournament size {} and offspring count {} must fit in population {p}",
                self.tournament_size, self.offspring_per_iter
            )));
        }
        for (name, v) in [
            ("population mutation fraction", self.population_mutation_fraction),
            ("gene mutation probability", self.gene_mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} {v} outside [0, 1]")));
            }
        }
        if !(0.5..=1.0).contains(&self.fitter_bias) {
            return Err(Error::Config(format!(
                "fitter bias {} outside [0.5, 1]",
                self.fitter_bias
            )));
        }
        Ok(())
    }

    pub fn footprint_bytes(&self, n: usize) -> usize {
        (self.population_size + self.offspring_per_iter)
            * (n + std::mem::size_of::<Vec<u8>>() + 8)
            + n * 8
    }
}

/// Steady-state GA: tournament parents, biased uniform crossover, greedy
/// refinement of every child, partial population mutation, and
/// worst-replacement.
pub struct GaOcSolver<'g> {
    graph: &'g WeightedGraph,
    adjacency: Vec<Vec<(usize, f64)>>,
    cfg: GaOcConfig,
    rng: SolverRng,
    population: Vec<Vec<u8>>,
    fitness: Vec<f64>,
    iteration: usize,
}

impl<'g> GaOcSolver<'g> {
    pub fn new(graph: &'g WeightedGraph, cfg: GaOcConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng::seeded(cfg.seed);
        let n = graph.n();
        let population: Vec<Vec<u8>> = (0..cfg.population_size)
            .map(|_| (0..n).map(|_| u8::from(rng.random::<bool>())).collect())
            .collect();
        let fitness = population.iter().map(|x| fitness_of(graph, x)).collect();
        Ok(Self {
            graph,
            adjacency: graph.adjacency(),
            cfg,
            rng,
            population,
            fitness,
            iteration: 0,
        })
    }

    pub fn population(&self) -> &[Vec<u8>] {
        &self.population
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    fn tournament(&mut self) -> usize {
        let picks = index::sample(&mut self.rng, self.population.len(), self.cfg.tournament_size);
        picks
            .iter()
            .reduce(|a, b| if self.fitness[b] > self.fitness[a] { b } else { a })
            .expect("tournament size is positive")
    }

    fn crossover(&mut self, a: usize, b: usize) -> Vec<u8> {
        let (fit, other) = if self.fitness[b] > self.fitness[a] { (b, a) } else { (a, b) };
        let bias = self.cfg.fitter_bias;
        let (fit, other) = (&self.population[fit], &self.population[other]);
        fit.iter()
            .zip(other)
            .map(|(&f, &o)| {
                if f == o || self.rng.random::<f64>() < bias {
                    f
                } else {
                    o
                }
            })
            .collect()
    }

    /// Runs one iteration and returns the best fitness afterwards.
    pub fn step(&mut self) -> f64 {
        let mut children = Vec::with_capacity(self.cfg.offspring_per_iter);
        for _ in 0..self.cfg.offspring_per_iter {
            let a = self.tournament();
            let b = self.tournament();
            let mut child = self.crossover(a, b);
            refine_in_place(&self.adjacency, &mut child);
            let f = fitness_of(self.graph, &child);
            children.push((child, f));
        }

        let p = self.population.len();
        let best = argmax(&self.fitness);
        let mutants = (self.cfg.population_mutation_fraction * p as f64).round() as usize;
        let mutants = mutants.min(p - 1);
        for pick in index::sample(&mut self.rng, p - 1, mutants) {
            let i = if pick >= best { pick + 1 } else { pick };
            super::cga::mutate(&mut self.population[i], self.cfg.gene_mutation_prob, &mut self.rng);
            self.fitness[i] = fitness_of(self.graph, &self.population[i]);
        }

        let best = argmax(&self.fitness);
        let mut order: Vec<usize> = (0..p).filter(|&i| i != best).collect();
        order.sort_by(|&a, &b| self.fitness[a].total_cmp(&self.fitness[b]));
        for (slot, (child, f)) in order.into_iter().zip(children) {
            self.population[slot] = child;
            self.fitness[slot] = f;
        }

        self.iteration += 1;
        self.fitness[argmax(&self.fitness)]
    }

    pub fn best(&self) -> CutAssignment {
        let i = argmax(&self.fitness);
        CutAssignment::from_parts(self.population[i].clone(), self.fitness[i])
    }
}

pub fn gaoc_solve(g: &WeightedGraph, cfg: &GaOcConfig) -> Result<GaRunResult> {
    let mut solver = GaOcSolver::new(g, cfg.clone())?;
    let fitness_history = (0..cfg.iterations).map(|_| solver.step()).collect();
    Ok(GaRunResult {
        best: solver.best(),
        fitness_history,
        generations_executed: solver.iteration(),
    })
}

/// Greedy single-node flips until no flip improves the cut.
///
/// The gain of flipping node `i` is `Σ_j w_ij (1 − 2[x_i ≠ x_j])`. Nodes
/// are scanned in index order and flipped whenever the gain is positive;
/// scanning repeats until a pass makes no flip, at most `n` passes.
pub fn gaoc_refine(g: &WeightedGraph, bits: &[u8]) -> Result<Vec<u8>> {
    if bits.len() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "assignment has {} bits, graph has {} nodes",
            bits.len(),
            g.n()
        )));
    }
    let mut out = bits.to_vec();
    refine_in_place(&g.adjacency(), &mut out);
    Ok(out)
}

pub(crate) fn refine_in_place(adj: &[Vec<(usize, f64)>], bits: &mut [u8]) {
    let n = bits.len();
    let mut gain = vec![0.0; n];
    for _ in 0..n {
        for (i, g) in gain.iter_mut().enumerate() {
            *g = adj[i]
                .iter()
                .map(|&(j, w)| if bits[i] == bits[j] { w } else { -w })
                .sum();
        }
        let mut flipped = false;
        for i in 0..n {
            if gain[i] > GAIN_EPS {
                for &(j, w) in &adj[i] {
                    gain[j] += if bits[i] == bits[j] { -2.0 * w } else { 2.0 * w };
                }
                bits[i] ^= 1;
                gain[i] = -gain[i];
                flipped = true;
            }
        }
        if !flipped {
            break;
        }
    }
}
