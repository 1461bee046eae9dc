//! The coarsening guarantee, end to end: embed the whole graph and
//! restrict to terminals, or coarsen first and embed the small graph —
//! in the infinite-window limit the two agree up to rotation.
//!
//! Pipeline: G → Ĝ (edge weights θ·w, slack (1−θ)·D) → Schur complement
//! onto T → NetMFSC. Gram matrices witness the rotation equivalence.
//!
//! ```bash
//! cargo run --release --example terminal_embedding
//! ```

use std::collections::BTreeMap;

use coarsenet::coarsen::{schur_complement, Delta};
use coarsenet::embed::{limit_poly_g, limit_poly_h, truncated_log, truncated_svd};
use coarsenet::graph::{apply_theta, TerminalSet, VertexId};
use coarsenet::oracle::gram_distance;
use coarsenet::synth;

fn main() {
    let g = synth::connected_graph(25, 50, (0.5, 2.0), 11);
    let theta = 0.5;
    let d = 3;
    let terminal_ids: Vec<VertexId> = g.vertices().step_by(3).collect();
    let terminals = TerminalSet::from_iter(terminal_ids.iter().copied());
    println!(
        "G: n = {}, m = {}; keeping {} terminals, theta = {theta}, d = {d}",
        g.num_vertices(),
        g.num_edges(),
        terminals.len()
    );

    // Route 1: full-graph limit, then restrict to the terminals.
    let order = g.sorted_vertices();
    let keep: Vec<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, v)| terminals.contains(**v))
        .map(|(i, _)| i)
        .collect();
    let full = limit_poly_g(&g, theta).unwrap().restrict(&keep).unwrap();

    // Route 2: coarsen Ĝ onto the terminals, then the NetMFSC limit.
    let hat = apply_theta(&g, theta).unwrap();
    let h = schur_complement(&hat, &terminals, Delta::Infinite).unwrap();
    let orig_degrees: BTreeMap<VertexId, f64> = terminals
        .iter()
        .map(|v| (v, g.weighted_degree(v)))
        .collect();
    let coarse = limit_poly_h(&h, &orig_degrees).unwrap();

    println!(
        "H: n = {}, m = {} (plus slack)",
        h.num_vertices(),
        h.num_edges()
    );
    println!(
        "pre-log factorization targets differ by {:.3e}",
        full.max_abs_diff(&coarse)
    );

    let m_scale = g.num_edges();
    let r_full = truncated_svd(&truncated_log(&full, m_scale).unwrap(), &terminal_ids, d).unwrap();
    let r_coarse =
        truncated_svd(&truncated_log(&coarse, m_scale).unwrap(), &terminal_ids, d).unwrap();
    println!(
        "Gram distance between the two embeddings: {:.3e}",
        gram_distance(&r_full, &r_coarse).unwrap()
    );
}
