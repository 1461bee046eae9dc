//! A single random contraction equals the Schur complement in
//! expectation: Monte-Carlo means converge at the statistical rate.
//!
//! ```bash
//! cargo run --release --example monte_carlo_check
//! ```

use coarsenet::oracle::{dense_schur, monte_carlo_contraction_stats};
use coarsenet::synth;

fn main() {
    let g = synth::with_random_slack(&synth::connected_graph(7, 8, (0.5, 2.0), 5), 0.5, (0.2, 1.0), 6);
    let order = g.sorted_vertices();
    let x = *order
        .iter()
        .max_by_key(|&&v| g.unweighted_degree(v))
        .unwrap();
    println!(
        "graph: n = {}, m = {}; contracting vertex {x} (degree {})",
        g.num_vertices(),
        g.num_edges(),
        g.unweighted_degree(x)
    );

    let dense = g.to_dense(&order).unwrap();
    let keep: Vec<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != x)
        .map(|(i, _)| i)
        .collect();
    let sc = dense_schur(&dense, &keep).unwrap();
    let sc_norm = sc.frobenius_norm();

    println!("{:>9}  {:>12}  {:>12}", "trials", "rel error", "3 sigma");
    for trials in [100, 1_000, 10_000, 100_000] {
        let stats = monte_carlo_contraction_stats(&g, x, trials, 1).unwrap();
        let rel = stats.mean.sub(&sc).frobenius_norm() / sc_norm;
        let three_sigma = 3.0 * stats.stderr_frobenius / sc_norm;
        println!("{trials:>9}  {rel:>12.3e}  {three_sigma:>12.3e}");
    }
}
