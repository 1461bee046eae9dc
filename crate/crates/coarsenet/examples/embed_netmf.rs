//! NetMF embedding of a small graph, and the geometric-tail convergence
//! of the finite-window walk sum to its closed-form limit.
//!
//! ```bash
//! cargo run --release --example embed_netmf
//! ```

use coarsenet::embed::{embed_graph, limit_poly_g, netmf_poly, EmbedMode, WalkParams};
use coarsenet::synth;

fn main() {
    let g = synth::connected_graph(24, 40, (0.5, 2.0), 3);
    let theta = 0.5;

    println!("walk-sum tail for theta = {theta}:");
    let limit = limit_poly_g(&g, theta).unwrap();
    for w in [1, 2, 4, 8, 16, 32] {
        let params = WalkParams::geometric(theta, w).unwrap();
        let err = netmf_poly(&g, &params).unwrap().sub(&limit).frobenius_norm();
        println!("  W = {w:>2}  ||sum_W - limit||_F = {err:.3e}");
    }

    let params = WalkParams::geometric(theta, 10).unwrap();
    let embedding = embed_graph(&g, EmbedMode::NetMf(&params), 4, None).unwrap();
    println!(
        "\nembedding: {} vertices x {} dims",
        embedding.len(),
        embedding.dim()
    );
    for i in 0..4 {
        let row: Vec<String> = embedding.row(i).iter().map(|x| format!("{x:+.4}")).collect();
        println!("  vertex {:>2}: [{}]", embedding.ids()[i], row.join(", "));
    }

    let mut tsv = Vec::new();
    embedding.write_tsv(&mut tsv).unwrap();
    println!("\nTSV output starts with:");
    for line in String::from_utf8(tsv).unwrap().lines().take(3) {
        println!("  {line}");
    }
}
