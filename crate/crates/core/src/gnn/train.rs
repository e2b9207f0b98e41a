use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::model::{forward, loss_and_gradients, propagation_matrix, GnnModel, Gradients};
use crate::instance::{build_qubo, CutAssignment, WeightedGraph};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnnConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub early_stop_tolerance: f64,
    pub early_stop_patience: usize,
    pub embedding_std: f64,
    /// Use edge weights inside the propagation matrix.
    pub weighted_adjacency: bool,
    /// Add `I` before normalizing. Self-loops make `Â` a non-negative
    /// smoothing operator, which pulls neighbouring logits together and
    /// works against cutting dense graphs.
    pub self_loops: bool,
    pub seed: u64,
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self {
            embed_dim: 369,
            hidden_dim: 5,
            learning_rate: 0.00467,
            max_epochs: 10_000,
            early_stop_tolerance: 1e-5,
            early_stop_patience: 500,
            embedding_std: 0.01,
            self_loops: false,
            weighted_adjacency: true,
            seed: 0,
        }
    }
}

impl GnnConfig {
    /// The output layer always has a single unit.
    pub const OUT_DIM: usize = 1;

    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be positive".into()));
        }
        Ok(())
    }

    /// Parameters, both Adam moments, gradients, Â and Q.
    pub fn footprint_bytes(&self, n: usize) -> usize {
        let params = n * self.embed_dim + self.embed_dim * self.hidden_dim + self.hidden_dim;
        8 * (4 * params + 2 * n * n + 4 * n * self.hidden_dim)
    }
}

/// Adam with β1 = 0.9, β2 = 0.999, ε = 1e-8.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    step: i32,
    first: [DMatrix<f64>; 3],
    second: [DMatrix<f64>; 3],
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(model: &GnnModel, lr: f64) -> Self {
        let zeros = |m: &DMatrix<f64>| DMatrix::zeros(m.nrows(), m.ncols());
        let moments = [zeros(&model.embeddings), zeros(&model.w1), zeros(&model.w2)];
        Self {
            lr,
            step: 0,
            first: moments.clone(),
            second: moments,
        }
    }

    pub fn update(&mut self, model: &mut GnnModel, grads: &Gradients) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        let params = [&mut model.embeddings, &mut model.w1, &mut model.w2];
        let grads = [&grads.embeddings, &grads.w1, &grads.w2];
        for (k, (param, grad)) in params.into_iter().zip(grads).enumerate() {
            let (m, v) = (&mut self.first[k], &mut self.second[k]);
            for i in 0..param.len() {
                let g = grad[i];
                m[i] = Self::BETA1 * m[i] + (1.0 - Self::BETA1) * g;
                v[i] = Self::BETA2 * v[i] + (1.0 - Self::BETA2) * g * g;
                param[i] -= self.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + Self::EPS);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnOutcome {
    pub assignment: CutAssignment,
    pub final_loss: f64,
    pub epochs: usize,
    pub probabilities: Vec<f64>,
}

/// `x_i = 1` iff `p_i > 0.5`.
pub fn project(p: &[f64]) -> Vec<u8> {
    p.iter().map(|&v| u8::from(v > 0.5)).collect()
}

/// Trains until `max_epochs` or until the loss has not improved by more
/// than `early_stop_tolerance` for `early_stop_patience` epochs, then
/// rounds the final probabilities.
pub fn train_and_project(g: &WeightedGraph, cfg: &GnnConfig) -> Result<GnnOutcome> {
    cfg.validate()?;
    let a_hat = propagation_matrix(g, cfg.weighted_adjacency, cfg.self_loops);
    let q = build_qubo(g);
    let mut rng = rng::seeded(cfg.seed);
    let mut model = GnnModel::random(g.n(), cfg.embed_dim, cfg.hidden_dim, cfg.embedding_std, &mut rng);
    let mut adam = Adam::new(&model, cfg.learning_rate);

    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut epochs = 0;
    let mut last_loss = f64::NAN;
    while epochs < cfg.max_epochs {
        let (loss, grads) = loss_and_gradients(&model, &a_hat, &q);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!(
                "GNN loss became {loss} at epoch {epochs}"
            )));
        }
        last_loss = loss;
        adam.update(&mut model, &grads);
        epochs += 1;
        if loss < best - cfg.early_stop_tolerance {
            best = loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.early_stop_patience {
                break;
            }
        }
    }
    if !model.is_finite() {
        return Err(Error::Numeric("GNN parameters diverged".into()));
    }
    let p = forward(&model, &a_hat).0;
    let assignment = CutAssignment::evaluate(g, project(&p))?;
    Ok(GnnOutcome {
        assignment,
        final_loss: last_loss,
        epochs,
        probabilities: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GeneratorConfig};

    #[test]
    fn ties_project_to_zero() {
        assert_eq!(project(&[0.5, 0.5000001, 0.4999]), vec![0, 1, 0]);
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let a = CutAssignment::evaluate(&g, project(&[0.5; 3])).unwrap();
        assert_eq!(a.cut_value(), 0.0);
    }

    #[test]
    fn single_edge_is_solved() {
        let g = WeightedGraph::new(2, [(0, 1, 1.3)]).unwrap();
        let solved = (0..10)
            .filter(|&seed| {
                let out = train_and_project(&g, &GnnConfig::with_seed(seed)).unwrap();
                out.assignment.cut_value() == 1.3
            })
            .count();
        assert!(solved >= 9, "solved {solved}/10");
    }

    #[test]
    fn loss_decreases_early_in_training() {
        let g = generate(&GeneratorConfig::new(10, 77)).unwrap();
        let a_hat = propagation_matrix(&g, true, false);
        let q = build_qubo(&g);
        let mut decreasing = 0;
        for seed in 0..10 {
            let cfg = GnnConfig::with_seed(seed);
            let mut model = GnnModel::random(10, cfg.embed_dim, cfg.hidden_dim, cfg.embedding_std, &mut rng::seeded(seed));
            let mut adam = Adam::new(&model, cfg.learning_rate);
            let (start, _) = loss_and_gradients(&model, &a_hat, &q);
            for _ in 0..50 {
                let (_, grads) = loss_and_gradients(&model, &a_hat, &q);
                adam.update(&mut model, &grads);
            }
            let (end, _) = loss_and_gradients(&model, &a_hat, &q);
            if end < start {
                decreasing += 1;
            }
        }
        assert!(decreasing >= 9);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = generate(&GeneratorConfig::new(8, 3)).unwrap();
        let cfg = GnnConfig {
            max_epochs: 200,
            ..GnnConfig::with_seed(4)
        };
        assert_eq!(train_and_project(&g, &cfg).unwrap(), train_and_project(&g, &cfg).unwrap());
    }

    #[test]
    fn invalid_learning_rate() {
        let cfg = GnnConfig {
            learning_rate: 0.0,
            ..GnnConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
