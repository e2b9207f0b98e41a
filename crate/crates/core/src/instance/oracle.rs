use crate::error::{Error, Result};
use crate::instance::graph::{cut_unchecked, CutAssignment, WeightedGraph};

/// Largest node count the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Exhaustive maximum cut.
///
/// Node `n − 1` is fixed to partition 0, so `2^(n−1)` assignments are
/// enumerated. Among optimal assignments the one with the smallest binary
/// lexicographically smallest bit vector is returned. Enumeration walks a
/// Gray code and updates the cut incrementally from per-node flip gains.
pub fn brute_force_optimum(g: &WeightedGraph) -> Result<CutAssignment> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity {
            what: "brute-force node count",
            actual: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let m = n - 1;
    let adj = g.adjacency();
    let mut bits = vec![0u8; n];
    let mut cut = 0.0;
    let mut best_bits = bits.clone();
    let mut best_cut = 0.0;
    // Running-sum rounding stays far below this slack; candidates inside
    // it are re-scored exactly before comparison.
    let slack = 1e-9 * g.total_weight().max(1.0);
    for step in 1usize..(1 << m) {
        let flip = step.trailing_zeros() as usize;
        let gain: f64 = adj[flip]
            .iter()
            .map(|&(j, w)| if bits[j] == bits[flip] { w } else { -w })
            .sum();
        bits[flip] ^= 1;
        cut += gain;
        if cut >= best_cut - slack {
            let exact = cut_unchecked(g, &bits);
            if exact > best_cut || (exact == best_cut && bits < best_bits) {
                best_cut = exact;
                best_bits.copy_from_slice(&bits);
            }
        }
    }
    Ok(CutAssignment::from_parts(best_bits, best_cut))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{cut_value, generate, GeneratorConfig};
    use rand::RngExt;

    fn unfixed_scan(g: &WeightedGraph) -> f64 {
        let n = g.n();
        (0..1usize << n)
            .map(|x| {
                let bits: Vec<u8> = (0..n).map(|i| ((x >> i) & 1) as u8).collect();
                cut_value(g, &bits).unwrap()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn single_edge_representative() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let best = brute_force_optimum(&g).unwrap();
        assert_eq!(best.bits(), &[1, 0]);
        assert_eq!(best.cut_value(), 1.0);
    }

    #[test]
    fn complete_bipartite_is_fully_cut() {
        let mut edges = Vec::new();
        for a in 0..2 {
            for b in 2..5 {
                edges.push((a, b, 1.0));
            }
        }
        let g = WeightedGraph::new(5, edges).unwrap();
        assert_eq!(brute_force_optimum(&g).unwrap().cut_value(), 6.0);
    }

    #[test]
    fn edgeless_graph_gives_zero_assignment() {
        let g = WeightedGraph::new(4, []).unwrap();
        let best = brute_force_optimum(&g).unwrap();
        assert_eq!(best.bits(), &[0, 0, 0, 0]);
    }

    #[test]
    fn ties_resolve_lexicographically() {
        // Path 0-1-2: (0,1,0) is the only optimum with the last bit pinned.
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(brute_force_optimum(&g).unwrap().bits(), &[0, 1, 0]);
        // Two disjoint edges: (0,1,1,0) and (1,0,1,0) both cut 2.
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(brute_force_optimum(&g).unwrap().bits(), &[0, 1, 1, 0]);
    }

    #[test]
    fn matches_unfixed_scan_on_n12() {
        for seed in 0..5 {
            let g = generate(&GeneratorConfig::new(12, seed)).unwrap();
            let best = brute_force_optimum(&g).unwrap();
            assert_eq!(best.bits()[11], 0);
            assert!((best.cut_value() - unfixed_scan(&g)).abs() < 1e-12);
        }
    }

    #[test]
    fn dominates_random_assignments() {
        let mut rng = crate::rng::seeded(77);
        for seed in 0..5 {
            let g = generate(&GeneratorConfig::new(10, seed)).unwrap();
            let best = brute_force_optimum(&g).unwrap().cut_value();
            for _ in 0..1000 {
                let bits: Vec<u8> = (0..10).map(|_| rng.random_range(0..2u8)).collect();
                assert!(best >= cut_value(&g, &bits).unwrap());
            }
        }
    }

    #[test]
    fn capacity_limit() {
        let g = WeightedGraph::new(25, []).unwrap();
        assert!(matches!(brute_force_optimum(&g), Err(Error::Capacity { .. })));
    }
}
