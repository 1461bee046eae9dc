//! Weighted undirected graphs with per-vertex slack.
//!
//! A [`Graph`] stores a simple weighted graph (parallel edges merge by
//! weight addition) plus a non-negative *slack* value per vertex. Slack
//! is self-loop mass: the matrix induced by a graph is
//! `M = D + Dˢ - A` where `D` is the weighted-degree diagonal and `Dˢ`
//! the slack diagonal. With any positive slack `M` is SDDM; with all-zero
//! slack it is the ordinary Laplacian.
//!
//! Vertex ids are arbitrary `u64` values and are preserved by every
//! operation in this crate — coarsening never renumbers, so terminal ids
//! stay stable end to end.
//!
//! ## Edge-list TSV
//!
//! One edge per line, `u <TAB> v <TAB> w` with `w > 0`; a line with
//! `u == v` carries slack for `u` instead of an edge. `#` starts a
//! comment. Repeated edge lines merge by addition. Note a vertex exists
//! only by being mentioned: an isolated vertex with zero slack has no
//! representation in this format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::dense::DenseMatrix;
use crate::{Error, Result};

/// Vertex identifier: any non-negative integer, never renumbered.
pub type VertexId = u64;

#[derive(Debug, Clone, Default, PartialEq)]
struct VertexData {
    nbrs: BTreeMap<VertexId, f64>,
    slack: f64,
}

/// Weighted undirected graph with per-vertex slack (self-loop mass).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    verts: BTreeMap<VertexId, VertexData>,
    num_edges: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ensures `v` exists (with no edges and zero slack).
    pub fn add_vertex(&mut self, v: VertexId) {
        self.verts.entry(v).or_default();
    }

    /// Adds `w` to the weight of edge `(u, v)`, creating vertices and the
    /// edge as needed. Rejects self-loops (slack is separate), and
    /// non-positive or non-finite weights.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId, w: f64) -> Result<()> {
        if u == v {
            return Err(Error::Domain(format!(
                "self-loop ({u},{u}) not allowed as an edge; use add_slack"
            )));
        }
        if w <= 0.0 || !w.is_finite() {
            return Err(Error::Domain(format!(
                "edge ({u},{v}) must have positive finite weight, got {w}"
            )));
        }
        self.merge_edge(u, v, w);
        Ok(())
    }

    /// Adds `s ≥ 0` to the slack of `v`, creating `v` if needed.
    pub fn add_slack(&mut self, v: VertexId, s: f64) -> Result<()> {
        if s < 0.0 || !s.is_finite() {
            return Err(Error::Domain(format!(
                "slack for vertex {v} must be non-negative and finite, got {s}"
            )));
        }
        self.verts.entry(v).or_default().slack += s;
        Ok(())
    }

    /// Unchecked symmetric weight merge; callers guarantee `u != v`, `w > 0`.
    pub(crate) fn merge_edge(&mut self, u: VertexId, v: VertexId, w: f64) {
        let (merged, created) = {
            let du = self.verts.entry(u).or_default();
            match du.nbrs.entry(v) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(w);
                    (w, true)
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let total = *e.get() + w;
                    *e.get_mut() = total;
                    (total, false)
                }
            }
        };
        self.verts.entry(v).or_default().nbrs.insert(u, merged);
        if created {
            self.num_edges += 1;
        }
    }

    /// Removes edge `(u, v)`, returning its weight if present.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Option<f64> {
        let w = self.verts.get_mut(&u)?.nbrs.remove(&v)?;
        self.verts.get_mut(&v).map(|d| d.nbrs.remove(&u));
        self.num_edges -= 1;
        Some(w)
    }

    /// Removes `v` and all incident edges.
    pub fn remove_vertex(&mut self, v: VertexId) {
        if let Some(data) = self.verts.remove(&v) {
            self.num_edges -= data.nbrs.len();
            for u in data.nbrs.keys() {
                if let Some(du) = self.verts.get_mut(u) {
                    du.nbrs.remove(&v);
                }
            }
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.verts.contains_key(&v)
    }

    pub fn num_vertices(&self) -> usize {
        self.verts.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Vertex ids in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.verts.keys().copied()
    }

    pub fn sorted_vertices(&self) -> Vec<VertexId> {
        self.vertices().collect()
    }

    /// Neighbors of `v` with edge weights, in ascending id order.
    ///
    /// Panics if `v` is absent.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.verts[&v].nbrs.iter().map(|(&u, &w)| (u, w))
    }

    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<f64> {
        self.verts.get(&u)?.nbrs.get(&v).copied()
    }

    /// Each undirected edge once, `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.verts.iter().flat_map(|(&u, d)| {
            d.nbrs
                .iter()
                .filter(move |(&v, _)| u < v)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    /// Number of incident edges `|N(v)|`. Panics if `v` is absent.
    pub fn unweighted_degree(&self, v: VertexId) -> usize {
        self.verts[&v].nbrs.len()
    }

    /// Weighted degree `D_vv = Σ_u w(v,u)`. Panics if `v` is absent.
    pub fn weighted_degree(&self, v: VertexId) -> f64 {
        self.verts[&v].nbrs.values().sum()
    }

    /// Slack `Dˢ_vv`. Panics if `v` is absent.
    pub fn slack(&self, v: VertexId) -> f64 {
        self.verts[&v].slack
    }

    pub(crate) fn set_slack(&mut self, v: VertexId, s: f64) {
        self.verts.entry(v).or_default().slack = s;
    }

    /// Augmented degree `D'_vv = D_vv + Dˢ_vv`. Panics if `v` is absent.
    pub fn augmented_degree(&self, v: VertexId) -> f64 {
        self.weighted_degree(v) + self.slack(v)
    }

    pub fn total_slack(&self) -> f64 {
        self.verts.values().map(|d| d.slack).sum()
    }

    pub fn is_slack_free(&self) -> bool {
        self.verts.values().all(|d| d.slack == 0.0)
    }

    /// BFS connectivity over the whole vertex set.
    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.verts.keys().next() else {
            return true;
        };
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(v) = stack.pop() {
            for (u, _) in self.neighbors(v) {
                if seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        seen.len() == self.verts.len()
    }

    /// Dense matrix `M = D' - A` in the given vertex order.
    ///
    /// `order` must be a permutation of the vertex set.
    pub fn to_dense(&self, order: &[VertexId]) -> Result<DenseMatrix> {
        let n = self.verts.len();
        if order.len() != n || order.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Domain(
                "order is not a permutation of the vertex set".into(),
            ));
        }
        let mut index = BTreeMap::new();
        for (i, &v) in order.iter().enumerate() {
            if !self.contains(v) {
                return Err(Error::Domain(format!("vertex {v} not in graph")));
            }
            index.insert(v, i);
        }
        let mut m = DenseMatrix::zeros(n);
        for (i, &v) in order.iter().enumerate() {
            m[(i, i)] = self.augmented_degree(v);
            for (u, w) in self.neighbors(v) {
                m[(i, index[&u])] = -w;
            }
        }
        Ok(m)
    }
}

/// Subset of vertices that coarsening must keep.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TerminalSet(BTreeSet<VertexId>);

impl FromIterator<VertexId> for TerminalSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl TerminalSet {
    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Errors unless every terminal exists in `g`.
    pub fn validate_subset_of(&self, g: &Graph) -> Result<()> {
        for v in self.iter() {
            if !g.contains(v) {
                return Err(Error::Domain(format!("terminal {v} not in graph")));
            }
        }
        Ok(())
    }

    /// Reads one vertex id per line; `#` comments and blank lines skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let text = strip_comment(&line);
            if text.is_empty() {
                continue;
            }
            let v: VertexId = text.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("expected a vertex id, got {text:?}"),
            })?;
            set.insert(v);
        }
        Ok(Self(set))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

/// Parses edge-list TSV. Lines with `u == v` carry slack. Fields may be
/// separated by any whitespace; weights must be positive and finite.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut g = Graph::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let text = strip_comment(&line);
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected `u v w`, got {} field(s)", fields.len()),
            });
        }
        let parse_id = |s: &str| -> Result<VertexId> {
            s.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad vertex id {s:?}"),
            })
        };
        let u = parse_id(fields[0])?;
        let v = parse_id(fields[1])?;
        let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            msg: format!("bad weight {:?}", fields[2]),
        })?;
        if w <= 0.0 || !w.is_finite() {
            return Err(Error::Domain(format!(
                "line {}: weight must be positive and finite, got {w}",
                lineno + 1
            )));
        }
        if u == v {
            g.add_slack(u, w)?;
        } else {
            g.add_edge(u, v, w)?;
        }
    }
    Ok(g)
}

/// Writes edge-list TSV: each edge once (`u < v`, ascending), then one
/// slack line per vertex with positive slack. Weight text is the shortest
/// decimal that parses back to the identical `f64`, so a parse of the
/// output reproduces the graph bit for bit.
pub fn write_edge_list<W: Write>(g: &Graph, mut sink: W) -> Result<()> {
    let mut buf = String::new();
    for (u, v, w) in g.edges() {
        buf.clear();
        writeln!(buf, "{u}\t{v}\t{w}").expect("write to String");
        sink.write_all(buf.as_bytes())?;
    }
    for v in g.vertices() {
        let s = g.slack(v);
        if s > 0.0 {
            buf.clear();
            writeln!(buf, "{v}\t{v}\t{s}").expect("write to String");
            sink.write_all(buf.as_bytes())?;
        }
    }
    Ok(())
}

/// θ-preprocessing: scales every edge weight by `theta` and assigns each
/// vertex slack `(1-theta)·D_vv`, so the induced matrix of the result is
/// `D - θA` and its augmented degrees equal the input's weighted degrees.
///
/// Requires a slack-free input and `theta ∈ (0, 1)`.
pub fn apply_theta(g: &Graph, theta: f64) -> Result<Graph> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!(
            "theta must lie in (0,1), got {theta}"
        )));
    }
    if !g.is_slack_free() {
        return Err(Error::Domain(
            "theta preprocessing requires a slack-free input graph".into(),
        ));
    }
    let mut out = Graph::new();
    for v in g.vertices() {
        out.add_vertex(v);
        out.set_slack(v, (1.0 - theta) * g.weighted_degree(v));
    }
    for (u, v, w) in g.edges() {
        out.merge_edge(u, v, theta * w);
    }
    Ok(out)
}
