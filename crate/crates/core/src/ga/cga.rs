use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{argmax, GaRunResult};
use crate::instance::{CutAssignment, WeightedGraph};
use crate::rng::{self, SolverRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgaConfig {
    pub population_size: usize,
    pub mutation_prob: f64,
    pub elitism_fraction: f64,
    pub generations: usize,
    pub seed: u64,
}

impl Default for CgaConfig {
    fn default() -> Self {
        Self {
            population_size: 500,
            mutation_prob: 0.1,
            elitism_fraction: 0.02,
            generations: 1000,
            seed: 0,
        }
    }
}

impl CgaConfig {
    pub fn with_population(population_size: usize, seed: u64) -> Self {
        Self {
            population_size,
            seed,
            ..Self::default()
        }
    }

    /// `max(1, round(elitism_fraction · population_size))`.
    pub fn elite_count(&self) -> usize {
        ((self.elitism_fraction * self.population_size as f64).round() as usize)
            .max(1)
            .min(self.population_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 || self.generations == 0 {
            return Err(Error::Config(
                "population size and generation count must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::Config(format!(
                "mutation probability {} outside [0, 1]",
                self.mutation_prob
            )));
        }
        if !(0.0..1.0).contains(&self.elitism_fraction) {
            return Err(Error::Config(format!(
                "elitism fraction {} outside [0, 1)",
                self.elitism_fraction
            )));
        }
        Ok(())
    }

    /// Bytes held by two generations of chromosomes plus fitness arrays.
    pub fn footprint_bytes(&self, n: usize) -> usize {
        2 * self.population_size * (n + std::mem::size_of::<Vec<u8>>() + 8)
    }
}

/// Generational GA with roulette selection, single-point crossover,
/// per-gene bit-flip mutation and elitism.
pub struct CgaSolver<'g> {
    graph: &'g WeightedGraph,
    cfg: CgaConfig,
    rng: SolverRng,
    population: Vec<Vec<u8>>,
    fitness: Vec<f64>,
    generation: usize,
}

impl<'g> CgaSolver<'g> {
    pub fn new(graph: &'g WeightedGraph, cfg: CgaConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng::seeded(cfg.seed);
        let n = graph.n();
        let population: Vec<Vec<u8>> = (0..cfg.population_size)
            .map(|_| (0..n).map(|_| u8::from(rng.random::<bool>())).collect())
            .collect();
        let fitness = population.iter().map(|x| fitness_of(graph, x)).collect();
        Ok(Self {
            graph,
            cfg,
            rng,
            population,
            fitness,
            generation: 0,
        })
    }

    pub fn population(&self) -> &[Vec<u8>] {
        &self.population
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Advances one generation and returns its best fitness.
    pub fn step(&mut self) -> f64 {
        let p = self.cfg.population_size;
        let n = self.graph.n();

        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| self.fitness[b].total_cmp(&self.fitness[a]));

        let mut next: Vec<Vec<u8>> = Vec::with_capacity(p);
        let mut next_fitness = Vec::with_capacity(p);
        for &i in order.iter().take(self.cfg.elite_count()) {
            next.push(self.population[i].clone());
            next_fitness.push(self.fitness[i]);
        }

        let wheel = RouletteWheel::new(&self.fitness);
        while next.len() < p {
            let a = &self.population[wheel.spin(&mut self.rng)];
            let b = &self.population[wheel.spin(&mut self.rng)];
            let split = self.rng.random_range(1..n);
            let mut first: Vec<u8> = a[..split].iter().chain(&b[split..]).copied().collect();
            let mut second: Vec<u8> = b[..split].iter().chain(&a[split..]).copied().collect();
            for child in [&mut first, &mut second] {
                mutate(child, self.cfg.mutation_prob, &mut self.rng);
            }
            for child in [first, second] {
                if next.len() < p {
                    next_fitness.push(fitness_of(self.graph, &child));
                    next.push(child);
                }
            }
        }

        self.population = next;
        self.fitness = next_fitness;
        self.generation += 1;
        self.fitness[argmax(&self.fitness)]
    }

    pub fn best(&self) -> CutAssignment {
        let i = argmax(&self.fitness);
        CutAssignment::from_parts(self.population[i].clone(), self.fitness[i])
    }
}

pub fn cga_solve(g: &WeightedGraph, cfg: &CgaConfig) -> Result<GaRunResult> {
    let mut solver = CgaSolver::new(g, cfg.clone())?;
    let fitness_history = (0..cfg.generations).map(|_| solver.step()).collect();
    Ok(GaRunResult {
        best: solver.best(),
        fitness_history,
        generations_executed: solver.generation(),
    })
}

pub(crate) fn fitness_of(g: &WeightedGraph, bits: &[u8]) -> f64 {
    crate::instance::cut_unchecked(g, bits)
}

pub(crate) fn mutate(bits: &mut [u8], prob: f64, rng: &mut SolverRng) {
    for b in bits.iter_mut() {
        if rng.random::<f64>() < prob {
            *b ^= 1;
        }
    }
}

/// Fitness-proportional selection. Falls back to uniform selection when
/// the total fitness is zero.
struct RouletteWheel {
    cumulative: Vec<f64>,
}

impl RouletteWheel {
    fn new(fitness: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = fitness
            .iter()
            .map(|&f| {
                acc += f.max(0.0);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn spin(&self, rng: &mut SolverRng) -> usize {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        if total <= 0.0 {
            return rng.random_range(0..self.cumulative.len());
        }
        let target = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= target)
            .min(self.cumulative.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{brute_force_optimum, cut_value, generate, GeneratorConfig};

    fn quick(pop: usize, gens: usize, seed: u64) -> CgaConfig {
        CgaConfig {
            population_size: pop,
            generations: gens,
            seed,
            ..CgaConfig::default()
        }
    }

    #[test]
    fn elite_count_rounding() {
        assert_eq!(CgaConfig::with_population(500, 0).elite_count(), 10);
        assert_eq!(CgaConfig::with_population(10, 0).elite_count(), 1);
        assert_eq!(CgaConfig::with_population(1, 0).elite_count(), 1);
    }

    #[test]
    fn invalid_configs() {
        assert!(CgaConfig { mutation_prob: 1.5, ..CgaConfig::default() }.validate().is_err());
        assert!(CgaConfig { elitism_fraction: 1.0, ..CgaConfig::default() }.validate().is_err());
        assert!(CgaConfig { population_size: 0, ..CgaConfig::default() }.validate().is_err());
    }

    #[test]
    fn single_edge_finds_the_edge() {
        let g = WeightedGraph::new(2, [(0, 1, 2.5)]).unwrap();
        let r = cga_solve(&g, &CgaConfig::with_population(500, 3)).unwrap();
        assert_eq!(r.best.cut_value(), 2.5);
        assert_eq!(r.generations_executed, 1000);
        assert_eq!(r.fitness_history.len(), 1000);
    }

    #[test]
    fn edgeless_graph_uses_uniform_fallback() {
        let g = WeightedGraph::new(5, []).unwrap();
        let r = cga_solve(&g, &quick(20, 10, 1)).unwrap();
        assert_eq!(r.best.cut_value(), 0.0);
    }

    #[test]
    fn population_invariants_hold_every_generation() {
        let g = generate(&GeneratorConfig::new(15, 4)).unwrap();
        let mut s = CgaSolver::new(&g, quick(41, 30, 8)).unwrap();
        let mut last = f64::NEG_INFINITY;
        for _ in 0..30 {
            let best = s.step();
            assert!(best >= last);
            last = best;
            assert_eq!(s.population().len(), 41);
            for (x, &f) in s.population().iter().zip(s.fitness()) {
                assert_eq!(x.len(), 15);
                assert!(x.iter().all(|&b| b <= 1));
                assert_eq!(cut_value(&g, x).unwrap(), f);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = generate(&GeneratorConfig::new(12, 1)).unwrap();
        let a = cga_solve(&g, &quick(50, 40, 5)).unwrap();
        let b = cga_solve(&g, &quick(50, 40, 5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn near_optimal_on_n12() {
        let g = generate(&GeneratorConfig::new(12, 21)).unwrap();
        let opt = brute_force_optimum(&g).unwrap().cut_value();
        let mut total = 0.0;
        for seed in 0..10 {
            let r = cga_solve(&g, &CgaConfig::with_population(500, seed)).unwrap();
            assert!(r.best.cut_value() <= opt + 1e-12);
            total += r.best.cut_value() / opt;
        }
        assert!(total / 10.0 >= 0.99);
    }
}
