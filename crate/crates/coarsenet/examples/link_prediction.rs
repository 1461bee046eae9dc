//! Terminal link prediction on a two-block synthetic graph: split out
//! terminal edges, contract the non-terminals away, embed the small
//! graph, and score the held-out pairs with a logistic model.
//!
//! ```bash
//! cargo run --release --example link_prediction
//! ```

use coarsenet::coarsen::{random_contraction, Delta};
use coarsenet::embed::{embed_graph, EmbedMode, WalkParams};
use coarsenet::evalkit::{
    auc_score, edge_features, split_edges, train_logreg, LogRegConfig, Operator,
};
use coarsenet::graph::{TerminalSet, VertexId};
use coarsenet::synth;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let seed = 2;
    let g = synth::two_block_graph(200, 0.1, 0.01, seed);
    assert!(g.is_connected(), "re-seed the generator if this ever trips");

    // Half the vertices, chosen at random, are the terminals we care about.
    let mut ids: Vec<VertexId> = g.sorted_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
    ids.shuffle(&mut rng);
    let terminals = TerminalSet::from_iter(ids.into_iter().take(200));
    println!(
        "graph: n = {}, m = {}; terminals = {}",
        g.num_vertices(),
        g.num_edges(),
        terminals.len()
    );

    let split = split_edges(&g, &terminals, 0.3, seed).unwrap();
    println!(
        "split: {} positives, {} negatives, train m = {}",
        split.positives.len(),
        split.negatives.len(),
        split.train_graph.num_edges()
    );

    let h = random_contraction(&split.train_graph, &terminals, Delta::Infinite, seed + 1).unwrap();
    println!(
        "contracted train graph: n = {}, m = {}",
        h.num_vertices(),
        h.num_edges()
    );

    let params = WalkParams::geometric(0.5, 1).unwrap();
    let embedding = embed_graph(&h, EmbedMode::NetMf(&params), 190, None).unwrap();

    let mut pairs = split.positives.clone();
    pairs.extend(split.negatives.iter().copied());
    let mut labels = vec![1u8; split.positives.len()];
    labels.extend(vec![0u8; split.negatives.len()]);

    let features = edge_features(&embedding, &pairs, Operator::Hadamard).unwrap();
    let model =
        train_logreg(&features, &labels, Operator::Hadamard, &LogRegConfig::default()).unwrap();
    let scores: Vec<f64> = features.iter().map(|r| model.score(r)).collect();
    let auc = auc_score(&scores, &labels).unwrap();
    println!("hadamard + logistic AUC = {auc:.4}");
}
