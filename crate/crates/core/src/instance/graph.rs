use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Undirected, non-negatively weighted graph on nodes `0..n`.
///
/// Edges are stored canonically (`u < v`), sorted, without duplicates or
/// self-loops. Construction through [`WeightedGraph::new`] enforces this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph from `(u, v, w)` triples in either orientation.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "a graph needs at least 2 nodes, got {n}"
            )));
        }
        let mut canon = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on node {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) has invalid weight {w}"
                )));
            }
            canon.push(Edge { u, v, w });
        }
        canon.sort_by_key(|e| (e.u, e.v));
        if let Some(pair) = canon.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(Error::InvalidArgument(format!(
                "duplicate edge ({}, {})",
                pair[0].u, pair[0].v
            )));
        }
        Ok(Self { n, edges: canon })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Per-node neighbor lists `(neighbor, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        adj
    }

    /// Dense symmetric weight matrix, row-major.
    pub fn dense_weights(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for e in &self.edges {
            a[e.u * n + e.v] = e.w;
            a[e.v * n + e.u] = e.w;
        }
        a
    }
}

/// Weight of the edges whose endpoints fall on different sides.
pub fn cut_value(g: &WeightedGraph, bits: &[u8]) -> Result<f64> {
    if bits.len() != g.n() {
        return Err(Error::InvalidArgument(format!(
            "assignment has {} bits, graph has {} nodes",
            bits.len(),
            g.n()
        )));
    }
    Ok(cut_unchecked(g, bits))
}

pub(crate) fn cut_unchecked(g: &WeightedGraph, bits: &[u8]) -> f64 {
    g.edges()
        .iter()
        .filter(|e| bits[e.u] != bits[e.v])
        .map(|e| e.w)
        .sum()
}

/// A two-sided partition together with its cut weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutAssignment {
    bits: Vec<u8>,
    cut_value: f64,
}

impl CutAssignment {
    /// Evaluates `bits` on `g`; every bit must be 0 or 1.
    pub fn evaluate(g: &WeightedGraph, bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!("non-binary bit value {b}")));
        }
        let cut_value = cut_value(g, &bits)?;
        Ok(Self { bits, cut_value })
    }

    pub(crate) fn from_parts(bits: Vec<u8>, cut_value: f64) -> Self {
        Self { bits, cut_value }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn cut_value(&self) -> f64 {
        self.cut_value
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }
}
