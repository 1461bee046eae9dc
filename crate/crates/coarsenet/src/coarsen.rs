//! Vertex sparsification onto a terminal set.
//!
//! Two elimination rules, one driver. Both repeatedly remove the
//! minimum-unweighted-degree non-terminal `x` while that degree is at
//! most the threshold `Δ`, maintained by a [`DegreeBucketQueue`]:
//!
//! * **Schur elimination** ([`eliminate_vertex_schur`]): adds the weighted
//!   clique `w(x,u)·w(x,v)/D'ₓₓ` over unordered neighbor pairs and pushes
//!   `w(x,u)·Dˢₓₓ/D'ₓₓ` slack onto each neighbor. The dense matrix of the
//!   result is exactly the Schur complement of the input matrix with `x`
//!   eliminated. Cost per step is quadratic in `deg(x)`.
//!
//! * **Random contraction** ([`contract_vertex`]): after the same slack
//!   update, samples a neighbor `u` with probability `w(x,u)/Dₓₓ` and
//!   folds `x` into `u`, adding `[w(x,u)·w(x,v)/(w(x,u)+w(x,v))]·(Dₓₓ/D'ₓₓ)`
//!   to each `(u,v)` with `v ∈ N(x)∖{u}`. The result equals the Schur
//!   complement in expectation, costs `O(deg(x))` per step, and never
//!   increases the edge count.
//!
//! ## Randomness
//!
//! All contraction randomness derives from a single `u64` run seed:
//! elimination step `k` uses stream `k` of a ChaCha8 generator keyed by
//! the seed ([`step_rng`]), and draws one `f64` for the prefix-sum
//! neighbor scan. Runs are bit-reproducible across platforms.
//!
//! ## Degenerate vertices
//!
//! An isolated non-terminal is deleted by the driver: with positive slack
//! its Schur complement is a decoupled row, with zero slack the block is
//! singular and a warning is logged. The single-vertex operations reject
//! the cases they cannot express (see each function).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{Graph, TerminalSet, VertexId};
use crate::{Error, Result};

/// Degree threshold: elimination stops when no non-terminal has
/// unweighted degree at most this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delta {
    Finite(usize),
    Infinite,
}

impl Delta {
    pub fn allows(self, degree: usize) -> bool {
        match self {
            Delta::Infinite => true,
            Delta::Finite(d) => degree <= d,
        }
    }
}

impl FromStr for Delta {
    type Err = Error;

    /// Accepts a positive integer or the literal `inf`.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Delta::Infinite);
        }
        let d: usize = s
            .parse()
            .map_err(|_| Error::Domain(format!("delta must be a positive integer or `inf`, got {s:?}")))?;
        if d == 0 {
            return Err(Error::Domain("delta must be at least 1".into()));
        }
        Ok(Delta::Finite(d))
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Finite(d) => write!(f, "{d}"),
            Delta::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Schur,
    Contract,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schur" => Ok(Method::Schur),
            "contract" => Ok(Method::Contract),
            other => Err(Error::Domain(format!(
                "method must be `schur` or `contract`, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Schur => write!(f, "schur"),
            Method::Contract => write!(f, "contract"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoarsenConfig {
    pub method: Method,
    pub delta: Delta,
    /// Contraction seed; ignored by the Schur method.
    pub seed: u64,
}

/// Non-terminal vertices bucketed by current unweighted degree.
#[derive(Debug, Clone)]
pub struct DegreeBucketQueue {
    buckets: Vec<BTreeSet<VertexId>>,
    degree_of: BTreeMap<VertexId, usize>,
    min_cursor: usize,
}

impl DegreeBucketQueue {
    /// Queue over every non-terminal of `g`, keyed by current degree.
    pub fn new(g: &Graph, terminals: &TerminalSet) -> Self {
        let mut q = Self {
            buckets: Vec::new(),
            degree_of: BTreeMap::new(),
            min_cursor: 0,
        };
        for v in g.vertices() {
            if !terminals.contains(v) {
                q.insert(v, g.unweighted_degree(v));
            }
        }
        q
    }

    fn insert(&mut self, v: VertexId, degree: usize) {
        if self.buckets.len() <= degree {
            self.buckets.resize(degree + 1, BTreeSet::new());
        }
        self.buckets[degree].insert(v);
        self.degree_of.insert(v, degree);
        if degree < self.min_cursor {
            self.min_cursor = degree;
        }
    }

    /// Moves `v` to the bucket for `degree`; no-op for untracked vertices.
    pub fn update(&mut self, v: VertexId, degree: usize) {
        let Some(&old) = self.degree_of.get(&v) else {
            return;
        };
        if old == degree {
            return;
        }
        self.buckets[old].remove(&v);
        self.insert(v, degree);
    }

    /// Pops the minimum-degree vertex if its degree passes `delta`,
    /// breaking degree ties by smallest id.
    pub fn pop_min_below(&mut self, delta: Delta) -> Option<VertexId> {
        while self.min_cursor < self.buckets.len() && self.buckets[self.min_cursor].is_empty() {
            self.min_cursor += 1;
        }
        if self.min_cursor >= self.buckets.len() || !delta.allows(self.min_cursor) {
            return None;
        }
        let v = *self.buckets[self.min_cursor].iter().next().expect("non-empty bucket");
        self.buckets[self.min_cursor].remove(&v);
        self.degree_of.remove(&v);
        Some(v)
    }

    pub fn len(&self) -> usize {
        self.degree_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree_of.is_empty()
    }

    pub fn tracked_degree(&self, v: VertexId) -> Option<usize> {
        self.degree_of.get(&v).copied()
    }
}

/// Generator for elimination step `step` of a run keyed by `seed`:
/// ChaCha8 seeded with `seed`, switched to stream `step`.
pub fn step_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}

/// Gaussian elimination of a single vertex, in place.
///
/// For every unordered neighbor pair `{u,v}` adds `w(x,u)·w(x,v)/D'ₓₓ`
/// to edge `(u,v)`; every neighbor gains `w(x,u)·Dˢₓₓ/D'ₓₓ` slack; `x`
/// and its edges are removed. Errors if `x` is absent or has zero
/// augmented degree (isolated with no slack).
pub fn eliminate_vertex_schur(g: &mut Graph, x: VertexId) -> Result<()> {
    eliminate_vertex_schur_impl(g, x).map(|_| ())
}

fn eliminate_vertex_schur_impl(g: &mut Graph, x: VertexId) -> Result<Vec<(VertexId, f64)>> {
    if !g.contains(x) {
        return Err(Error::Domain(format!("vertex {x} not in graph")));
    }
    let nbrs: Vec<(VertexId, f64)> = g.neighbors(x).collect();
    let slack_x = g.slack(x);
    let weighted: f64 = nbrs.iter().map(|&(_, w)| w).sum();
    let d_aug = weighted + slack_x;
    if d_aug == 0.0 {
        return Err(Error::DegenerateVertex(x));
    }
    for (i, &(u, w_u)) in nbrs.iter().enumerate() {
        for &(v, w_v) in &nbrs[i + 1..] {
            g.merge_edge(u, v, w_u * w_v / d_aug);
        }
        if slack_x > 0.0 {
            let s = g.slack(u);
            g.set_slack(u, s + w_u * slack_x / d_aug);
        }
    }
    g.remove_vertex(x);
    Ok(nbrs)
}

/// Reweighted random contraction of a single vertex, in place.
///
/// Updates every neighbor's slack as in Schur elimination, then samples
/// `u ∈ N(x)` with probability `w(x,u)/Dₓₓ` (prefix-sum scan in neighbor
/// id order, one `f64` draw) and adds
/// `[w(x,u)·w(x,v)/(w(x,u)+w(x,v))]·(Dₓₓ/D'ₓₓ)` to each `(u,v)`,
/// `v ∈ N(x)∖{u}`. Removes `x`; the merged vertex keeps id `u`, which is
/// returned. Errors if `x` is absent or isolated.
pub fn contract_vertex<R: Rng>(g: &mut Graph, x: VertexId, rng: &mut R) -> Result<VertexId> {
    contract_vertex_impl(g, x, rng).map(|(u, _)| u)
}

fn contract_vertex_impl<R: Rng>(
    g: &mut Graph,
    x: VertexId,
    rng: &mut R,
) -> Result<(VertexId, Vec<(VertexId, f64)>)> {
    if !g.contains(x) {
        return Err(Error::Domain(format!("vertex {x} not in graph")));
    }
    let nbrs: Vec<(VertexId, f64)> = g.neighbors(x).collect();
    if nbrs.is_empty() {
        return Err(Error::DegenerateVertex(x));
    }
    let slack_x = g.slack(x);
    let weighted: f64 = nbrs.iter().map(|&(_, w)| w).sum();
    let d_aug = weighted + slack_x;

    if slack_x > 0.0 {
        for &(u, w_u) in &nbrs {
            let s = g.slack(u);
            g.set_slack(u, s + w_u * slack_x / d_aug);
        }
    }

    let draw = rng.random::<f64>() * weighted;
    let mut acc = 0.0;
    let mut chosen = nbrs.len() - 1;
    for (i, &(_, w)) in nbrs.iter().enumerate() {
        acc += w;
        if draw < acc {
            chosen = i;
            break;
        }
    }
    let (u, w_u) = nbrs[chosen];

    let ratio = weighted / d_aug;
    for &(v, w_v) in &nbrs {
        if v == u {
            continue;
        }
        g.merge_edge(u, v, (w_u * w_v / (w_u + w_v)) * ratio);
    }
    g.remove_vertex(x);
    Ok((u, nbrs))
}

/// Per-elimination snapshot passed to [`coarsen_observed`] callbacks.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub vertex: VertexId,
    /// Unweighted degree of the vertex at elimination time.
    pub degree: usize,
    pub vertices_left: usize,
    pub edges_left: usize,
}

/// Run summary; serialized as the JSON run report by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct CoarsenStats {
    pub method: String,
    pub delta: String,
    pub seed: u64,
    pub initial_vertices: usize,
    pub initial_edges: usize,
    pub final_vertices: usize,
    pub final_edges: usize,
    pub eliminated: usize,
    pub max_step_degree: usize,
    /// Largest edge count observed after any elimination step.
    pub max_edges_seen: usize,
    /// Σ over steps of the eliminated vertex's degree.
    pub degree_sum: u64,
    /// Adjacency-structure loop iterations, counted as 5·deg + 1 per step
    /// (slack pass, sampling scan, rewiring, removal, queue updates).
    pub adjacency_ops: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

/// Full coarsening run with a per-step observer.
///
/// The observer sees the working graph after each elimination. The edge
/// count of a contraction run is asserted to never exceed the input's.
pub fn coarsen_observed<F>(
    g: &Graph,
    terminals: &TerminalSet,
    cfg: &CoarsenConfig,
    mut observe: F,
) -> Result<(Graph, CoarsenStats)>
where
    F: FnMut(&Graph, &StepInfo),
{
    terminals.validate_subset_of(g)?;
    let mut h = g.clone();
    let initial_edges = h.num_edges();
    let mut stats = CoarsenStats {
        method: cfg.method.to_string(),
        delta: cfg.delta.to_string(),
        seed: cfg.seed,
        initial_vertices: h.num_vertices(),
        initial_edges,
        final_vertices: 0,
        final_edges: 0,
        eliminated: 0,
        max_step_degree: 0,
        max_edges_seen: initial_edges,
        degree_sum: 0,
        adjacency_ops: 0,
        wall_time_ms: None,
    };
    let mut queue = DegreeBucketQueue::new(&h, terminals);
    let mut step: u64 = 0;

    while let Some(x) = queue.pop_min_below(cfg.delta) {
        let degree = h.unweighted_degree(x);
        if degree == 0 {
            if h.slack(x) == 0.0 {
                log::warn!("deleting isolated slack-free vertex {x}");
            }
            h.remove_vertex(x);
        } else {
            let touched = match cfg.method {
                Method::Schur => eliminate_vertex_schur_impl(&mut h, x)?,
                Method::Contract => {
                    let mut rng = step_rng(cfg.seed, step);
                    contract_vertex_impl(&mut h, x, &mut rng)?.1
                }
            };
            for &(u, _) in &touched {
                queue.update(u, h.unweighted_degree(u));
            }
        }
        if cfg.method == Method::Contract {
            assert!(
                h.num_edges() <= initial_edges,
                "contraction increased the edge count ({} > {initial_edges})",
                h.num_edges()
            );
        }
        stats.eliminated += 1;
        stats.max_step_degree = stats.max_step_degree.max(degree);
        stats.max_edges_seen = stats.max_edges_seen.max(h.num_edges());
        stats.degree_sum += degree as u64;
        stats.adjacency_ops += 5 * degree as u64 + 1;
        let info = StepInfo {
            vertex: x,
            degree,
            vertices_left: h.num_vertices(),
            edges_left: h.num_edges(),
        };
        observe(&h, &info);
        step += 1;
    }

    stats.final_vertices = h.num_vertices();
    stats.final_edges = h.num_edges();
    Ok((h, stats))
}

pub fn coarsen(
    g: &Graph,
    terminals: &TerminalSet,
    cfg: &CoarsenConfig,
) -> Result<(Graph, CoarsenStats)> {
    coarsen_observed(g, terminals, cfg, |_, _| {})
}

/// Min-degree Schur elimination of every non-terminal with degree ≤ Δ.
/// With `Delta::Infinite` the output vertex set is exactly the terminal
/// set and its matrix is the exact Schur complement.
pub fn schur_complement(g: &Graph, terminals: &TerminalSet, delta: Delta) -> Result<Graph> {
    let cfg = CoarsenConfig {
        method: Method::Schur,
        delta,
        seed: 0,
    };
    coarsen(g, terminals, &cfg).map(|(h, _)| h)
}

/// Min-degree random contraction of every non-terminal with degree ≤ Δ.
/// Deterministic given `seed`; edge count never exceeds the input's.
pub fn random_contraction(
    g: &Graph,
    terminals: &TerminalSet,
    delta: Delta,
    seed: u64,
) -> Result<Graph> {
    let cfg = CoarsenConfig {
        method: Method::Contract,
        delta,
        seed,
    };
    coarsen(g, terminals, &cfg).map(|(h, _)| h)
}
