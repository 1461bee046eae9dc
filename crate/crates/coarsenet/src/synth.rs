//! Seeded graph generators for tests, examples and the `verify` command.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::DenseMatrix;
use crate::graph::{Graph, VertexId};

/// Connected weighted graph on vertices `0..n`: a random spanning tree
/// plus `extra` random chords, weights uniform in `weights`.
pub fn connected_graph(n: usize, extra: usize, weights: (f64, f64), seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new();
    g.add_vertex(0);
    for v in 1..n as VertexId {
        let u = rng.random_range(0..v);
        let w = rng.random_range(weights.0..weights.1);
        g.add_edge(u, v, w).expect("tree edge");
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n as VertexId);
        let v = rng.random_range(0..n as VertexId);
        if u != v {
            let w = rng.random_range(weights.0..weights.1);
            g.add_edge(u, v, w).expect("chord");
        }
    }
    g
}

/// Adds slack uniform in `range` to each vertex independently with
/// probability `prob`.
pub fn with_random_slack(g: &Graph, prob: f64, range: (f64, f64), seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = g.clone();
    for v in g.sorted_vertices() {
        if rng.random::<f64>() < prob {
            let s = rng.random_range(range.0..range.1);
            out.add_slack(v, s).expect("slack");
        }
    }
    out
}

/// Random SDDM matrix: connected graph with positive slack everywhere.
pub fn random_sddm(n: usize, seed: u64) -> DenseMatrix {
    let g = connected_graph(n, n, (0.5, 2.0), seed);
    let g = with_random_slack(&g, 1.0, (0.1, 1.5), seed.wrapping_add(1));
    let order = g.sorted_vertices();
    g.to_dense(&order).expect("dense")
}

/// Two-block stochastic block model with unit weights: vertices
/// `0..2·per_block`, the first half in one block. Not guaranteed
/// connected; check before use.
pub fn two_block_graph(per_block: usize, p_in: f64, p_out: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * per_block;
    let mut g = Graph::new();
    for v in 0..n as VertexId {
        g.add_vertex(v);
    }
    for u in 0..n {
        for v in (u + 1)..n {
            let same = (u < per_block) == (v < per_block);
            let p = if same { p_in } else { p_out };
            if rng.random::<f64>() < p {
                g.add_edge(u as VertexId, v as VertexId, 1.0).expect("edge");
            }
        }
    }
    g
}

/// Connected graph with exactly `m ≥ n` edges: a ring plus random chords.
pub fn ring_with_chords(n: usize, m: usize, seed: u64) -> Graph {
    assert!(m >= n, "need at least n edges for the ring");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new();
    for v in 0..n as VertexId {
        g.add_edge(v, (v + 1) % n as VertexId, 1.0).expect("ring edge");
    }
    while g.num_edges() < m {
        let u = rng.random_range(0..n as VertexId);
        let v = rng.random_range(0..n as VertexId);
        if u != v && g.edge_weight(u, v).is_none() {
            g.add_edge(u, v, 1.0).expect("chord");
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_graph_is_connected_and_seeded() {
        let g = connected_graph(30, 20, (0.5, 2.0), 7);
        assert!(g.is_connected());
        assert_eq!(g.num_vertices(), 30);
        assert_eq!(g, connected_graph(30, 20, (0.5, 2.0), 7));
    }

    #[test]
    fn ring_with_chords_hits_exact_edge_count() {
        let g = ring_with_chords(50, 120, 3);
        assert_eq!(g.num_edges(), 120);
        assert!(g.is_connected());
    }

    #[test]
    fn random_sddm_has_positive_row_slack() {
        let m = random_sddm(8, 1);
        for i in 0..8 {
            let row: f64 = (0..8).map(|j| m[(i, j)]).sum();
            assert!(row > 0.0);
        }
    }
}
