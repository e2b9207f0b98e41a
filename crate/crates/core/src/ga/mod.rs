//! Genetic-algorithm solvers: the canonical generational GA and the
//! steady-state GA-OC variant with greedy node-flip refinement.

mod cga;
mod gaoc;

pub use cga::{cga_solve, CgaConfig, CgaSolver};
pub use gaoc::{gaoc_refine, gaoc_solve, GaOcConfig, GaOcSolver};

use serde::{Deserialize, Serialize};

use crate::instance::CutAssignment;

/// Outcome of one GA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaRunResult {
    pub best: CutAssignment,
    /// Best fitness in the population after each generation.
    pub fitness_history: Vec<f64>,
    pub generations_executed: usize,
}

/// Index of the fittest individual; the lowest index wins ties.
fn argmax(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate().skip(1) {
        if f > fitness[best] {
            best = i;
        }
    }
    best
}
