use crate::error::{Error, Result};
use crate::instance::graph::{cut_unchecked, WeightedGraph};

/// Largest qubit count for which dense operators are materialized.
pub const DENSE_QUBIT_LIMIT: usize = 24;

/// Dense symmetric QUBO matrix with `xᵀQx = −Cut(x)` for binary `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    n: usize,
    q: Vec<f64>,
}

impl QuboMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// `xᵀQx` for any real vector (binary or relaxed).
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let n = self.n;
        let mut total = 0.0;
        for i in 0..n {
            let row = &self.q[i * n..(i + 1) * n];
            let qx: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            total += x[i] * qx;
        }
        total
    }

    /// `Q·x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.q[i * n..(i + 1) * n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn energy_of_bits(&self, bits: &[u8]) -> f64 {
        let x: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
        self.quadratic_form(&x)
    }
}

/// Off-diagonal `Q_ij = w_ij`, diagonal `Q_ii = −Σ_k w_ik`.
///
/// For binary `x`, `xᵀQx = Σ_i Q_ii x_i + 2 Σ_{i<j} w_ij x_i x_j`, which is
/// the negated cut `−Σ w_ij (x_i + x_j − 2 x_i x_j)`.
pub fn build_qubo(g: &WeightedGraph) -> QuboMatrix {
    let n = g.n();
    let mut q = vec![0.0; n * n];
    for e in g.edges() {
        q[e.u * n + e.v] = e.w;
        q[e.v * n + e.u] = e.w;
        q[e.u * n + e.u] -= e.w;
        q[e.v * n + e.v] -= e.w;
    }
    QuboMatrix { n, q }
}

/// Diagonal of the Ising Hamiltonian `Σ_{i<j} −w_ij/2 (I − Z_i Z_j)`.
///
/// Basis index bit `i` holds `x_i` (little-endian). With `fix_last` the
/// last node is pinned to partition 0 and the operator lives on `n − 1`
/// qubits.
pub fn build_dense_hamiltonian(g: &WeightedGraph, fix_last: bool) -> Result<Vec<f64>> {
    let n = g.n();
    let m = if fix_last { n - 1 } else { n };
    if m > DENSE_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "dense Hamiltonian qubits",
            actual: m,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    let mut bits = vec![0u8; n];
    Ok((0..1usize << m)
        .map(|idx| {
            for (i, b) in bits.iter_mut().enumerate().take(m) {
                *b = ((idx >> i) & 1) as u8;
            }
            -cut_unchecked(g, &bits)
        })
        .collect())
}
