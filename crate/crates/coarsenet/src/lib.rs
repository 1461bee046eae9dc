//! # coarsenet
//!
//! Terminal-preserving graph coarsening with embedding guarantees.
//!
//! Given a weighted undirected graph and a set of *terminal* vertices that
//! must survive, this crate shrinks the graph onto (a superset of) the
//! terminals and computes random-walk matrix-factorization embeddings
//! (NetMF and its coarsened-graph variant NetMFSC) on the result.
//!
//! ## Capabilities
//!
//! | Module | What it does |
//! |--------|--------------|
//! | [`graph`] | Weighted graph with per-vertex slack (self-loop mass), TSV I/O, θ-preprocessing |
//! | [`coarsen`] | Exact Schur-complement elimination and expectation-preserving random contraction, both driven by a bucketed min-degree queue |
//! | [`embed`] | NetMF / NetMFSC factorization targets, truncated log, rank-d symmetric factorization |
//! | [`oracle`] | Independent dense ground-truth implementations used only for verification |
//! | [`evalkit`] | Connectivity-preserving edge splits, edge features, logistic regression, AUC |
//! | [`synth`] | Seeded generators for test and benchmark graphs |
//! | [`cli`] | The `coarsenet` binary: `coarsen`, `embed`, `verify`, `eval` subcommands |
//!
//! ## The core identity
//!
//! A graph-with-slack corresponds to the SDDM matrix `M = D + Dˢ - A`.
//! Eliminating a non-terminal `x` by the clique rule (add
//! `w(x,u)·w(x,v)/D'ₓₓ` between every neighbor pair, push
//! `w(x,u)·Dˢₓₓ/D'ₓₓ` of slack onto each neighbor) reproduces the Schur
//! complement `SC(M, V∖{x})` exactly. Random contraction replaces the
//! clique by a reweighted star on a weight-proportionally sampled
//! neighbor and matches the Schur complement in expectation, one
//! elimination at a time, while never increasing the edge count.
//!
//! On the embedding side, preprocessing `G` into `Ĝ` (edge weights `θ·w`,
//! slack `(1-θ)·D`) realizes `M = D - θA` as a graph. The `W → ∞` NetMF
//! factorization target of `G` restricted to terminals equals the NetMFSC
//! target of the coarsened `Ĝ`, so the embeddings agree up to rotation.
//! Every one of these identities has an executable check in [`oracle`]
//! and in the `verify` subcommand.
//!
//! ## Quick start
//!
//! ```rust
//! use coarsenet::coarsen::{schur_complement, Delta};
//! use coarsenet::graph::{Graph, TerminalSet};
//!
//! // Path a - x - y - b; eliminate the interior.
//! let mut g = Graph::new();
//! g.add_edge(0, 1, 1.0).unwrap();
//! g.add_edge(1, 2, 1.0).unwrap();
//! g.add_edge(2, 3, 1.0).unwrap();
//! let t = TerminalSet::from_iter([0, 3]);
//!
//! let h = schur_complement(&g, &t, Delta::Infinite).unwrap();
//! // Series conductance: 1/(1 + 1 + 1).
//! assert!((h.edge_weight(0, 3).unwrap() - 1.0 / 3.0).abs() < 1e-12);
//! ```
//!
//! ## Runnable examples
//!
//! Each major capability has a self-contained example:
//!
//! ```bash
//! cargo run --release --example coarsen_schur
//! cargo run --release --example coarsen_contract
//! cargo run --release --example embed_netmf
//! cargo run --release --example terminal_embedding
//! cargo run --release --example monte_carlo_check
//! cargo run --release --example link_prediction
//! ```
//!
//! The `coarsenet` binary is a thin wrapper over the same library calls;
//! see the crate README for the subcommand reference.

use thiserror::Error;

pub mod cli;
pub mod coarsen;
pub mod dense;
pub mod embed;
pub mod evalkit;
pub mod graph;
pub mod oracle;
pub mod synth;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (edge lists, terminal files, sidecar files).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Input violates a documented precondition.
    #[error("{0}")]
    Domain(String),

    /// Vertex cannot be eliminated: isolated with no slack mass.
    #[error("vertex {0} is degenerate (isolated)")]
    DegenerateVertex(u64),

    /// Linear solve or inversion failed the residual check.
    #[error("singular system: {0}")]
    Singular(String),

    /// Dimension or id mismatch between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
