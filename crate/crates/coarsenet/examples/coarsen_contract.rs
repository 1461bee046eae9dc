//! Random contraction on a larger synthetic graph: edge counts never
//! grow, work stays near-linear, and the same seed reproduces the same
//! coarse graph.
//!
//! ```bash
//! cargo run --release --example coarsen_contract
//! ```

use coarsenet::coarsen::{coarsen, CoarsenConfig, Delta, Method};
use coarsenet::graph::TerminalSet;
use coarsenet::synth;

fn main() {
    let g = synth::ring_with_chords(20_000, 60_000, 42);
    let terminals = TerminalSet::from_iter(g.vertices().step_by(20));
    println!(
        "input: n = {}, m = {}, |T| = {}",
        g.num_vertices(),
        g.num_edges(),
        terminals.len()
    );

    let cfg = CoarsenConfig {
        method: Method::Contract,
        delta: Delta::Infinite,
        seed: 7,
    };
    let start = std::time::Instant::now();
    let (h, stats) = coarsen(&g, &terminals, &cfg).unwrap();
    let elapsed = start.elapsed();

    println!(
        "coarsened to n = {}, m = {} in {:.1?}",
        h.num_vertices(),
        h.num_edges(),
        elapsed
    );
    println!("eliminated {} vertices", stats.eliminated);
    println!(
        "edge bound: max edges seen {} <= initial {}",
        stats.max_edges_seen, stats.initial_edges
    );
    let m = stats.initial_edges as f64;
    let n = stats.initial_vertices as f64;
    println!(
        "work: {} adjacency ops = {:.2} x m ln n",
        stats.adjacency_ops,
        stats.adjacency_ops as f64 / (m * n.ln())
    );

    let (h2, _) = coarsen(&g, &terminals, &cfg).unwrap();
    println!("same seed reproduces the output: {}", h == h2);
}
