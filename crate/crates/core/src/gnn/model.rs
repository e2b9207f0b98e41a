use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal, Uniform};

use crate::instance::{QuboMatrix, WeightedGraph};
use crate::rng::SolverRng;

/// `D̃^{-1/2} (A + I) D̃^{-1/2}`; `A` holds edge weights when `weighted`
/// and ones otherwise.
pub fn normalized_adjacency(g: &WeightedGraph, weighted: bool) -> DMatrix<f64> {
    propagation_matrix(g, weighted, true)
}

/// Symmetric degree normalization of `A` (plus `I` when `self_loops`).
/// Without self-loops an isolated node keeps a unit diagonal entry.
pub fn propagation_matrix(g: &WeightedGraph, weighted: bool, self_loops: bool) -> DMatrix<f64> {
    let n = g.n();
    let mut a = if self_loops {
        DMatrix::<f64>::identity(n, n)
    } else {
        DMatrix::<f64>::zeros(n, n)
    };
    for e in g.edges() {
        let w = if weighted { e.w } else { 1.0 };
        a[(e.u, e.v)] += w;
        a[(e.v, e.u)] += w;
    }
    let degree: Vec<f64> = a.row_iter().map(|r| r.sum()).collect();
    for (i, &d) in degree.iter().enumerate() {
        if d <= 0.0 {
            a[(i, i)] = 1.0;
        }
    }
    let inv_sqrt: Vec<f64> = degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 })
        .collect();
    for j in 0..n {
        for i in 0..n {
            a[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    a
}

/// Per-node probabilities of landing in partition 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(pub Vec<f64>);

impl ProbabilityVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnModel {
    /// `n × d0`, one trainable row per node.
    pub embeddings: DMatrix<f64>,
    /// `d0 × d1`.
    pub w1: DMatrix<f64>,
    /// `d1 × 1`.
    pub w2: DMatrix<f64>,
}

/// Same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embeddings: DMatrix<f64>,
    pub w1: DMatrix<f64>,
    pub w2: DMatrix<f64>,
}

impl GnnModel {
    /// Embeddings ~ N(0, embedding_std²); weights Glorot-uniform.
    pub fn random(n: usize, d0: usize, d1: usize, embedding_std: f64, rng: &mut SolverRng) -> Self {
        let normal = Normal::new(0.0, embedding_std).expect("valid normal");
        let embeddings = DMatrix::from_fn(n, d0, |_, _| normal.sample(rng));
        let w1 = glorot(d0, d1, rng);
        let w2 = glorot(d1, 1, rng);
        Self { embeddings, w1, w2 }
    }

    pub fn zeros(n: usize, d0: usize, d1: usize) -> Self {
        Self {
            embeddings: DMatrix::zeros(n, d0),
            w1: DMatrix::zeros(d0, d1),
            w2: DMatrix::zeros(d1, 1),
        }
    }

    pub fn n(&self) -> usize {
        self.embeddings.nrows()
    }

    pub fn is_finite(&self) -> bool {
        [&self.embeddings, &self.w1, &self.w2]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()))
    }

    pub fn parameter_count(&self) -> usize {
        self.embeddings.len() + self.w1.len() + self.w2.len()
    }
}

fn glorot(fan_in: usize, fan_out: usize, rng: &mut SolverRng) -> DMatrix<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let u = Uniform::new_inclusive(-a, a).expect("valid range");
    DMatrix::from_fn(fan_in, fan_out, |_, _| u.sample(rng))
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Activations {
    /// `Â E W1` before ReLU.
    pre_hidden: DMatrix<f64>,
    /// `Â · ReLU(pre_hidden)`.
    propagated_hidden: DMatrix<f64>,
    p: Vec<f64>,
}

fn run_forward(model: &GnnModel, a_hat: &DMatrix<f64>) -> Activations {
    // Â (E W1) is cheaper than (Â E) W1 since d1 ≪ d0.
    let pre_hidden = a_hat * (&model.embeddings * &model.w1);
    let hidden = pre_hidden.map(|v| v.max(0.0));
    let propagated_hidden = a_hat * hidden;
    let logits = &propagated_hidden * &model.w2;
    let p = logits.iter().map(|&z| sigmoid(z)).collect();
    Activations {
        pre_hidden,
        propagated_hidden,
        p,
    }
}

pub fn forward(model: &GnnModel, a_hat: &DMatrix<f64>) -> ProbabilityVector {
    ProbabilityVector(run_forward(model, a_hat).p)
}

/// `pᵀQp` and its gradient with respect to every parameter.
pub fn loss_and_gradients(
    model: &GnnModel,
    a_hat: &DMatrix<f64>,
    q: &QuboMatrix,
) -> (f64, Gradients) {
    let act = run_forward(model, a_hat);
    let p = &act.p;
    let qp = q.mul_vec(p);
    let loss: f64 = p.iter().zip(&qp).map(|(a, b)| a * b).sum();

    // dL/dz_i = 2 (Qp)_i · p_i (1 − p_i), Q symmetric.
    let d_logits = DMatrix::from_iterator(
        p.len(),
        1,
        p.iter().zip(&qp).map(|(&pi, &qpi)| 2.0 * qpi * pi * (1.0 - pi)),
    );
    let d_w2 = act.propagated_hidden.transpose() * &d_logits;
    // Â is symmetric, so Âᵀ = Â.
    let d_hidden = a_hat * (&d_logits * model.w2.transpose());
    let mut d_pre = d_hidden;
    d_pre.zip_apply(&act.pre_hidden, |d, z| {
        if z <= 0.0 {
            *d = 0.0;
        }
    });
    let a_d_pre = a_hat * d_pre;
    let d_w1 = model.embeddings.transpose() * &a_d_pre;
    let d_embeddings = a_d_pre * model.w1.transpose();

    (
        loss,
        Gradients {
            embeddings: d_embeddings,
            w1: d_w1,
            w2: d_w2,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{build_qubo, generate, GeneratorConfig};
    use crate::rng;

    /// Dense textbook formula with explicit degree vector.
    fn dense_normalized(g: &WeightedGraph) -> Vec<Vec<f64>> {
        let n = g.n();
        let w = g.dense_weights();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = w[i * n + j] + if i == j { 1.0 } else { 0.0 };
            }
        }
        let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
        let mut out = a.clone();
        for i in 0..n {
            for j in 0..n {
                out[i][j] = a[i][j] / (d[i].sqrt() * d[j].sqrt());
            }
        }
        out
    }

    #[allow(clippy::needless_range_loop)]
    /// Scalar-loop forward pass, written independently of the matrix path.
    fn scalar_forward(m: &GnnModel, a: &DMatrix<f64>) -> Vec<f64> {
        let (n, d0, d1) = (m.n(), m.w1.nrows(), m.w1.ncols());
        let mut ae = vec![vec![0.0; d0]; n];
        for i in 0..n {
            for k in 0..d0 {
                for j in 0..n {
                    ae[i][k] += a[(i, j)] * m.embeddings[(j, k)];
                }
            }
        }
        let mut h = vec![vec![0.0; d1]; n];
        for i in 0..n {
            for c in 0..d1 {
                let mut s = 0.0;
                for k in 0..d0 {
                    s += ae[i][k] * m.w1[(k, c)];
                }
                h[i][c] = s.max(0.0);
            }
        }
        (0..n)
            .map(|i| {
                let mut z = 0.0;
                for j in 0..n {
                    for c in 0..d1 {
                        z += a[(i, j)] * h[j][c] * m.w2[(c, 0)];
                    }
                }
                1.0 / (1.0 + (-z).exp())
            })
            .collect()
    }

    #[test]
    fn isolated_nodes_keep_self_loop() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0)]).unwrap();
        let a = normalized_adjacency(&g, true);
        assert_eq!(a[(2, 2)], 1.0);
        assert_eq!(a[(2, 0)], 0.0);
    }

    #[test]
    fn single_edge_unit_weight() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let a = normalized_adjacency(&g, true);
        for v in a.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn normalized_adjacency_matches_dense_formula() {
        let g = generate(&GeneratorConfig::new(6, 31)).unwrap();
        let a = normalized_adjacency(&g, true);
        let want = dense_normalized(&g);
        for i in 0..6 {
            for j in 0..6 {
                assert!((a[(i, j)] - want[i][j]).abs() < 1e-12);
                assert_eq!(a[(i, j)], a[(j, i)]);
            }
        }
    }

    #[test]
    fn plain_propagation_has_zero_diagonal() {
        let g = WeightedGraph::new(3, [(0, 1, 2.0), (1, 2, 2.0)]).unwrap();
        let a = propagation_matrix(&g, true, false);
        assert_eq!(a[(0, 0)], 0.0);
        assert!((a[(0, 1)] - 2.0 / (2.0f64 * 4.0).sqrt()).abs() < 1e-15);
        let lonely = WeightedGraph::new(3, [(0, 1, 1.0)]).unwrap();
        assert_eq!(propagation_matrix(&lonely, true, false)[(2, 2)], 1.0);
    }

    #[test]
    fn unweighted_variant_ignores_weights() {
        let g = WeightedGraph::new(2, [(0, 1, 7.0)]).unwrap();
        let a = normalized_adjacency(&g, false);
        assert!((a[(0, 1)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_model_outputs_one_half() {
        let g = generate(&GeneratorConfig::new(7, 1)).unwrap();
        let a = normalized_adjacency(&g, true);
        let p = forward(&GnnModel::zeros(7, 4, 3), &a);
        assert!(p.as_slice().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn zero_model_loss_on_single_edge_is_zero() {
        let g = WeightedGraph::new(2, [(0, 1, 3.0)]).unwrap();
        let a = normalized_adjacency(&g, true);
        let (loss, _) = loss_and_gradients(&GnnModel::zeros(2, 3, 2), &a, &build_qubo(&g));
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn output_saturates_monotonically_with_w2_scale() {
        let g = generate(&GeneratorConfig::new(6, 2)).unwrap();
        let a = normalized_adjacency(&g, true);
        let mut m = GnnModel::random(6, 4, 3, 0.01, &mut rng::seeded(3));
        m.embeddings *= 100.0;
        let base = m.w2.clone();
        let mut prev: Option<Vec<f64>> = None;
        for scale in [1.0, 2.0, 4.0, 8.0, 16.0] {
            m.w2 = &base * scale;
            let dist: Vec<f64> = forward(&m, &a).0.iter().map(|p| (p - 0.5).abs()).collect();
            if let Some(prev) = &prev {
                for (d, pd) in dist.iter().zip(prev) {
                    assert!(d >= pd);
                }
            }
            prev = Some(dist);
        }
    }

    #[test]
    fn forward_matches_scalar_reference() {
        let g = generate(&GeneratorConfig::new(5, 8)).unwrap();
        let a = normalized_adjacency(&g, true);
        for seed in 0..5 {
            let mut m = GnnModel::random(5, 4, 3, 0.01, &mut rng::seeded(seed));
            m.embeddings *= 50.0;
            let got = forward(&m, &a);
            for (x, y) in got.as_slice().iter().zip(scalar_forward(&m, &a)) {
                assert!((x - y).abs() < 1e-12);
                assert!(*x > 0.0 && *x < 1.0);
            }
        }
    }

    #[test]
    fn hard_probabilities_recover_cut() {
        let g = generate(&GeneratorConfig::new(8, 4)).unwrap();
        let q = build_qubo(&g);
        let bits = [1u8, 0, 0, 1, 1, 0, 1, 0];
        let p: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
        let cut = crate::instance::cut_value(&g, &bits).unwrap();
        assert!((q.quadratic_form(&p) + cut).abs() < 1e-12);
    }

    /// A random model whose ReLU inputs all sit at least 1e-3 away from
    /// the kink and whose gradient is not vanishing, so a 1e-5 central
    /// difference is neither straddling a kink nor roundoff-dominated.
    pub(crate) fn smooth_random_model(
        a: &DMatrix<f64>,
        q: &QuboMatrix,
        dims: (usize, usize, usize),
        seed: u64,
    ) -> GnnModel {
        let (n, d0, d1) = dims;
        let mut rng = rng::seeded(seed);
        loop {
            let m = GnnModel::random(n, d0, d1, 1.0, &mut rng);
            let clear_of_kink = run_forward(&m, a).pre_hidden.iter().all(|z| z.abs() >= 1e-3);
            let (_, g) = loss_and_gradients(&m, a, q);
            if clear_of_kink && g.embeddings.norm() > 1e-2 && g.w1.norm() > 1e-2 {
                return m;
            }
        }
    }

    /// Central differences, step 1e-5, over every parameter.
    pub(crate) fn fd_relative_errors(m: &GnnModel, a: &DMatrix<f64>, q: &QuboMatrix) -> [f64; 3] {
        let (_, grads) = loss_and_gradients(m, a, q);
        let h = 1e-5;
        let mut errors = [0.0; 3];
        for (k, analytic) in [&grads.embeddings, &grads.w1, &grads.w2].into_iter().enumerate() {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..analytic.len() {
                let mut plus = m.clone();
                let mut minus = m.clone();
                [&mut plus.embeddings, &mut plus.w1, &mut plus.w2][k][i] += h;
                [&mut minus.embeddings, &mut minus.w1, &mut minus.w2][k][i] -= h;
                let fd = (loss_and_gradients(&plus, a, q).0 - loss_and_gradients(&minus, a, q).0) / (2.0 * h);
                num += (fd - analytic[i]).powi(2);
                den += fd.powi(2).max(analytic[i].powi(2));
            }
            errors[k] = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
        }
        errors
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..5 {
            let g = generate(&GeneratorConfig::new(6, 40 + seed)).unwrap();
            let q = build_qubo(&g);
            for self_loops in [true, false] {
                let a = propagation_matrix(&g, true, self_loops);
                let m = smooth_random_model(&a, &q, (6, 5, 3), seed);
                for err in fd_relative_errors(&m, &a, &q) {
                    assert!(err <= 1e-4, "seed {seed}: {err}");
                }
            }
        }
    }
}
