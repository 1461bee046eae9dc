//! Exact Schur-complement coarsening of a small graph onto two
//! terminals, cross-checked against the dense elimination oracle.
//!
//! ```bash
//! cargo run --release --example coarsen_schur
//! ```

use coarsenet::coarsen::{schur_complement, Delta};
use coarsenet::graph::{parse_edge_list, Graph, TerminalSet};
use coarsenet::oracle::dense_schur;

fn main() {
    // A weighted "ladder" with two marked endpoints.
    let text = "\
0\t1\t1.0
1\t2\t2.0
2\t5\t1.0
0\t3\t1.5
3\t4\t1.0
4\t5\t2.5
1\t4\t0.5
";
    let g: Graph = parse_edge_list(text.as_bytes()).unwrap();
    let terminals = TerminalSet::from_iter([0, 5]);

    println!(
        "input: {} vertices, {} edges; terminals {{0, 5}}",
        g.num_vertices(),
        g.num_edges()
    );

    let h = schur_complement(&g, &terminals, Delta::Infinite).unwrap();
    println!(
        "coarsened: {} vertices, {} edges",
        h.num_vertices(),
        h.num_edges()
    );
    for (u, v, w) in h.edges() {
        println!("  edge ({u},{v})  weight {w:.6}");
    }
    for v in h.sorted_vertices() {
        if h.slack(v) > 0.0 {
            println!("  slack({v}) = {:.6}", h.slack(v));
        }
    }

    // The graph-side elimination must reproduce the dense Schur
    // complement entry for entry.
    let order = g.sorted_vertices();
    let dense = g.to_dense(&order).unwrap();
    let want = dense_schur(&dense, &[0, 5]).unwrap();
    let got = h.to_dense(&h.sorted_vertices()).unwrap();
    println!(
        "max |graph-side - dense oracle| = {:.3e}",
        got.max_abs_diff(&want)
    );
}
