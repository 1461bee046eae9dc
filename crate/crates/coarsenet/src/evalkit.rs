//! Terminal link-prediction evaluation.
//!
//! The protocol: remove a fraction of terminal-terminal edges (keeping
//! the graph connected), sample an equal number of non-adjacent terminal
//! pairs as negatives, embed the residual (optionally coarsened) train
//! graph, turn pairs into edge features, fit a logistic model, and score
//! with the rank-based AUC.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embed::Embedding;
use crate::graph::{Graph, TerminalSet, VertexId};
use crate::{Error, Result};

/// Train graph plus labeled terminal pairs.
#[derive(Debug, Clone)]
pub struct EdgeSplit {
    pub train_graph: Graph,
    /// Removed terminal-terminal edges (positive examples), `u < v`.
    pub positives: Vec<(VertexId, VertexId)>,
    /// Non-adjacent terminal pairs (negative examples), `u < v`.
    pub negatives: Vec<(VertexId, VertexId)>,
    pub seed: u64,
}

/// Removes up to `⌊ratio·count⌋` terminal-terminal edges in seeded
/// shuffle order, skipping any removal that would disconnect the train
/// graph, then samples an equal number of terminal pairs that are
/// non-adjacent in the original graph.
pub fn split_edges(g: &Graph, t: &TerminalSet, ratio: f64, seed: u64) -> Result<EdgeSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Domain(format!("ratio must lie in (0,1), got {ratio}")));
    }
    t.validate_subset_of(g)?;
    if !g.is_connected() {
        return Err(Error::Domain("split requires a connected input graph".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, positives) = removal_phase(g, t, ratio, &mut rng)?;

    let terminals: Vec<VertexId> = t.iter().collect();
    let mut negatives = Vec::new();
    let mut seen = BTreeSet::new();
    let cap = 100 * positives.len().max(1) as u64;
    let mut attempts = 0u64;
    while negatives.len() < positives.len() {
        if attempts >= cap {
            return Err(Error::Domain(format!(
                "could not sample {} distinct non-adjacent terminal pairs in {cap} attempts",
                positives.len()
            )));
        }
        attempts += 1;
        let a = terminals[rng.random_range(0..terminals.len())];
        let b = terminals[rng.random_range(0..terminals.len())];
        if a == b {
            continue;
        }
        let pair = (a.min(b), a.max(b));
        if g.edge_weight(pair.0, pair.1).is_some() || !seen.insert(pair) {
            continue;
        }
        negatives.push(pair);
    }

    Ok(EdgeSplit {
        train_graph: train,
        positives,
        negatives,
        seed,
    })
}

/// Shuffles the terminal-terminal edges and greedily removes up to
/// `⌊ratio·count⌋` of them, restoring any removal that disconnects the
/// graph.
fn removal_phase(
    g: &Graph,
    t: &TerminalSet,
    ratio: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Graph, Vec<(VertexId, VertexId)>)> {
    let mut candidates: Vec<(VertexId, VertexId)> = g
        .edges()
        .filter(|&(u, v, _)| t.contains(u) && t.contains(v))
        .map(|(u, v, _)| (u, v))
        .collect();
    let target = (ratio * candidates.len() as f64).floor() as usize;
    candidates.shuffle(rng);

    let mut train = g.clone();
    let mut positives = Vec::new();
    for &(u, v) in &candidates {
        if positives.len() == target {
            break;
        }
        let w = train.remove_edge(u, v).expect("candidate edge present");
        if train.is_connected() {
            positives.push((u, v));
        } else {
            train.add_edge(u, v, w)?;
        }
    }
    Ok((train, positives))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Hadamard,
    WeightedL2,
}

impl FromStr for Operator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hadamard" => Ok(Operator::Hadamard),
            "weighted-l2" | "weighted_l2" => Ok(Operator::WeightedL2),
            other => Err(Error::Domain(format!(
                "operator must be `hadamard` or `weighted-l2`, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Hadamard => write!(f, "hadamard"),
            Operator::WeightedL2 => write!(f, "weighted-l2"),
        }
    }
}

/// Edge features: `hadamard` is `r_u ⊙ r_v`, `weighted-l2` is
/// `(r_u − r_v)²` elementwise.
pub fn edge_features(
    embedding: &Embedding,
    pairs: &[(VertexId, VertexId)],
    op: Operator,
) -> Result<Vec<Vec<f64>>> {
    pairs
        .iter()
        .map(|&(u, v)| {
            let ru = embedding
                .row_for(u)
                .ok_or_else(|| Error::Domain(format!("vertex {u} has no embedding row")))?;
            let rv = embedding
                .row_for(v)
                .ok_or_else(|| Error::Domain(format!("vertex {v} has no embedding row")))?;
            Ok(ru
                .iter()
                .zip(rv)
                .map(|(a, b)| match op {
                    Operator::Hadamard => a * b,
                    Operator::WeightedL2 => (a - b) * (a - b),
                })
                .collect())
        })
        .collect()
}

/// Logistic-regression hyperparameters.
#[derive(Debug, Clone)]
pub struct LogRegConfig {
    /// L2 penalty on the weights (not the bias).
    pub l2: f64,
    pub epochs: usize,
    /// Initial step size; decays as `step / (1 + epoch/250)`.
    pub step: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            epochs: 500,
            step: 0.1,
        }
    }
}

/// Trained logistic model over standardized features.
#[derive(Debug, Clone)]
pub struct LinkModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub operator: Operator,
    pub config: LogRegConfig,
    /// Per-feature standardization learned from the training set.
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    /// Gradient norm at the final epoch.
    pub final_grad_norm: f64,
}

impl LinkModel {
    /// Probability score in (0,1) for a raw (unstandardized) feature row.
    pub fn score(&self, features: &[f64]) -> f64 {
        let mut z = self.bias;
        for ((x, m), (s, w)) in features
            .iter()
            .zip(&self.feature_mean)
            .zip(self.feature_std.iter().zip(&self.weights))
        {
            z += w * (x - m) / s;
        }
        sigmoid(z)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean logistic loss with L2 penalty, and its gradient in
/// `(weights, bias)`. Exposed so the finite-difference check in the test
/// suite exercises exactly the trained objective.
pub fn logistic_loss_grad(
    features: &[Vec<f64>],
    labels: &[u8],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = features.len() as f64;
    let d = weights.len();
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; d];
    let mut grad_b = 0.0;
    for (row, &y) in features.iter().zip(labels) {
        let z: f64 = bias + row.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>();
        let y = y as f64;
        // log(1 + exp(z)) - y·z, computed stably.
        loss += if z > 0.0 {
            z + (-z).exp().ln_1p() - y * z
        } else {
            z.exp().ln_1p() - y * z
        };
        let p = sigmoid(z);
        let delta = p - y;
        for (gk, xk) in grad_w.iter_mut().zip(row) {
            *gk += delta * xk;
        }
        grad_b += delta;
    }
    loss /= n;
    grad_b /= n;
    for (gk, wk) in grad_w.iter_mut().zip(weights) {
        *gk = *gk / n + l2 * wk;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

/// Full-batch gradient descent on the standardized features.
/// Requires at least one example of each class.
pub fn train_logreg(
    features: &[Vec<f64>],
    labels: &[u8],
    operator: Operator,
    config: &LogRegConfig,
) -> Result<LinkModel> {
    if features.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows vs {} labels",
            features.len(),
            labels.len()
        )));
    }
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(Error::Domain(
            "training needs at least one example of each class".into(),
        ));
    }
    let d = features[0].len();
    if features.iter().any(|r| r.len() != d) {
        return Err(Error::Shape("ragged feature rows".into()));
    }

    let n = features.len() as f64;
    let mut mean = vec![0.0; d];
    for row in features {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut std = vec![0.0; d];
    for row in features {
        for ((s, m), x) in std.iter_mut().zip(&mean).zip(row) {
            *s += (x - m) * (x - m);
        }
    }
    for s in std.iter_mut() {
        *s = (*s / n).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    let standardized: Vec<Vec<f64>> = features
        .iter()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .zip(&std)
                .map(|((x, m), s)| (x - m) / s)
                .collect()
        })
        .collect();

    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    let mut grad_norm = 0.0;
    for epoch in 0..config.epochs {
        let (_, gw, gb) = logistic_loss_grad(&standardized, labels, &weights, bias, config.l2);
        let lr = config.step / (1.0 + epoch as f64 / 250.0);
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= lr * g;
        }
        bias -= lr * gb;
        grad_norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
    }

    Ok(LinkModel {
        weights,
        bias,
        operator,
        config: config.clone(),
        feature_mean: mean,
        feature_std: std,
        final_grad_norm: grad_norm,
    })
}

/// Mann–Whitney AUC with average ranks for ties. Requires both classes.
pub fn auc_score(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Domain("AUC needs both classes present".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // Average rank for the tie group [i, j], 1-based ranks.
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            if labels[k] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let pos = pos as f64;
    let neg = neg as f64;
    Ok((rank_sum_pos - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;
    use proptest::prelude::*;

    fn graph_from(text: &str) -> Graph {
        parse_edge_list(text.as_bytes()).unwrap()
    }

    #[test]
    fn split_four_cycle_removes_exactly_one() {
        let g = graph_from("0\t1\t1\n1\t2\t1\n2\t3\t1\n0\t3\t1");
        let t = TerminalSet::from_iter([0, 1, 2, 3]);
        for seed in 0..10 {
            let split = split_edges(&g, &t, 0.5, seed).unwrap();
            // Target is 2 but any second removal disconnects the cycle.
            assert_eq!(split.positives.len(), 1, "seed {seed}");
            assert_eq!(split.negatives.len(), 1);
            assert!(split.train_graph.is_connected());
        }
    }

    #[test]
    fn split_tree_removes_nothing() {
        let g = graph_from("0\t1\t1\n1\t2\t1\n1\t3\t1");
        let t = TerminalSet::from_iter([0, 1, 2, 3]);
        let split = split_edges(&g, &t, 0.5, 7).unwrap();
        assert!(split.positives.is_empty());
        assert!(split.negatives.is_empty());
        assert_eq!(split.train_graph.num_edges(), 3);
    }

    #[test]
    fn split_k4_achieves_three_removals() {
        // K4 is 3-edge-connected, so half its edges can always come out;
        // what remains is a spanning tree.
        let g = graph_from("0\t1\t1\n0\t2\t1\n0\t3\t1\n1\t2\t1\n1\t3\t1\n2\t3\t1");
        let t = TerminalSet::from_iter([0, 1, 2, 3]);
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (train, positives) = removal_phase(&g, &t, 0.5, &mut rng).unwrap();
            assert_eq!(positives.len(), 3, "seed {seed}");
            assert_eq!(train.num_edges(), 3);
            assert!(train.is_connected());
        }
        // The full split cannot finish on K4: every terminal pair is
        // adjacent, so there is no pool to draw negatives from.
        let err = split_edges(&g, &t, 0.5, 0).unwrap_err();
        assert!(err.to_string().contains("non-adjacent"));
    }

    #[test]
    fn split_invariants_hold() {
        let g = crate::synth::connected_graph(30, 60, (0.5, 2.0), 3);
        let t = TerminalSet::from_iter(g.vertices().filter(|v| v % 2 == 0));
        let split = split_edges(&g, &t, 0.4, 11).unwrap();
        assert_eq!(split.positives.len(), split.negatives.len());
        assert!(split.train_graph.is_connected());
        for &(u, v) in &split.positives {
            assert!(t.contains(u) && t.contains(v));
            assert!(split.train_graph.edge_weight(u, v).is_none());
            assert!(g.edge_weight(u, v).is_some());
        }
        for &(u, v) in &split.negatives {
            assert!(t.contains(u) && t.contains(v));
            assert!(g.edge_weight(u, v).is_none());
        }
        let uniq: BTreeSet<_> = split.negatives.iter().collect();
        assert_eq!(uniq.len(), split.negatives.len());
    }

    #[test]
    fn split_rejects_bad_inputs() {
        let g = graph_from("0\t1\t1\n2\t3\t1");
        let t = TerminalSet::from_iter([0, 1]);
        assert!(split_edges(&g, &t, 0.5, 0).is_err()); // disconnected

        let g2 = graph_from("0\t1\t1");
        assert!(split_edges(&g2, &t, 0.0, 0).is_err());
        assert!(split_edges(&g2, &t, 1.0, 0).is_err());
    }

    #[test]
    fn edge_feature_operators() {
        let e = crate::embed::Embedding::from_parts(vec![1, 2], 2, vec![1.0, 2.0, 3.0, 4.0])
            .unwrap();
        let had = edge_features(&e, &[(1, 2)], Operator::Hadamard).unwrap();
        assert_eq!(had[0], vec![3.0, 8.0]);
        let l2 = edge_features(&e, &[(1, 2)], Operator::WeightedL2).unwrap();
        assert_eq!(l2[0], vec![4.0, 4.0]);
        let same = edge_features(&e, &[(1, 1)], Operator::WeightedL2).unwrap();
        assert_eq!(same[0], vec![0.0, 0.0]);
        assert!(edge_features(&e, &[(1, 9)], Operator::Hadamard).is_err());
    }

    #[test]
    fn logreg_separable_reaches_full_accuracy() {
        let features = vec![vec![-1.0], vec![-0.8], vec![0.9], vec![1.0]];
        let labels = vec![0, 0, 1, 1];
        let model =
            train_logreg(&features, &labels, Operator::Hadamard, &LogRegConfig::default())
                .unwrap();
        for (row, &y) in features.iter().zip(&labels) {
            let p = model.score(row);
            assert_eq!((p > 0.5) as u8, y, "p = {p}");
        }
    }

    #[test]
    fn logreg_rejects_single_class() {
        let features = vec![vec![1.0], vec![2.0]];
        assert!(train_logreg(&features, &[1, 1], Operator::Hadamard, &LogRegConfig::default())
            .is_err());
    }

    #[test]
    fn logreg_symmetric_data_yields_null_weights() {
        // Features mirrored about zero with identical labels: the weight
        // gradient cancels, leaving only the bias to fit the base rate.
        let features = [vec![0.7], vec![-0.7], vec![1.3], vec![-1.3]];
        let labels = [1u8, 1, 0, 0];
        let mirrored: Vec<Vec<f64>> = features
            .iter()
            .map(|r| r.iter().map(|x| -x).collect())
            .collect();
        let all: Vec<Vec<f64>> = features.iter().cloned().chain(mirrored).collect();
        let all_labels: Vec<u8> = labels.iter().copied().chain(labels.iter().copied()).collect();
        let model =
            train_logreg(&all, &all_labels, Operator::Hadamard, &LogRegConfig::default()).unwrap();
        assert!(model.weights[0].abs() < 1e-3, "weight {}", model.weights[0]);
        assert!(model.bias.abs() < 1e-6, "bias {}", model.bias);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let features = vec![
            vec![0.3, -1.2, 0.4],
            vec![1.1, 0.2, -0.7],
            vec![-0.5, 0.9, 1.3],
            vec![0.0, -0.4, -1.1],
        ];
        let labels = vec![1, 0, 1, 0];
        let weights = vec![0.23, -0.41, 0.17];
        let bias = 0.05;
        let l2 = 1e-4;
        let (_, gw, gb) = logistic_loss_grad(&features, &labels, &weights, bias, l2);
        let h = 1e-6;
        for k in 0..weights.len() {
            let mut wp = weights.clone();
            wp[k] += h;
            let mut wm = weights.clone();
            wm[k] -= h;
            let (lp, _, _) = logistic_loss_grad(&features, &labels, &wp, bias, l2);
            let (lm, _, _) = logistic_loss_grad(&features, &labels, &wm, bias, l2);
            let fd = (lp - lm) / (2.0 * h);
            assert!(
                (fd - gw[k]).abs() <= 1e-5 * fd.abs().max(1.0),
                "weight {k}: fd {fd} vs analytic {}",
                gw[k]
            );
        }
        let (lp, _, _) = logistic_loss_grad(&features, &labels, &weights, bias + h, l2);
        let (lm, _, _) = logistic_loss_grad(&features, &labels, &weights, bias - h, l2);
        let fd = (lp - lm) / (2.0 * h);
        assert!((fd - gb).abs() <= 1e-5 * fd.abs().max(1.0));
    }

    #[test]
    fn auc_perfect_inverted_and_ties() {
        let labels = vec![0, 0, 1, 1];
        assert_eq!(auc_score(&[0.1, 0.2, 0.8, 0.9], &labels).unwrap(), 1.0);
        assert_eq!(auc_score(&[0.9, 0.8, 0.2, 0.1], &labels).unwrap(), 0.0);
        assert_eq!(auc_score(&[0.5, 0.5, 0.5, 0.5], &labels).unwrap(), 0.5);
        assert!(auc_score(&[0.5], &[1]).is_err());
    }

    proptest! {
        #[test]
        fn prop_auc_invariant_under_monotone_transform(
            scores in prop::collection::vec(-10.0f64..10.0, 4..40),
            flips in prop::collection::vec(any::<bool>(), 4..40),
        ) {
            let n = scores.len().min(flips.len());
            let scores = &scores[..n];
            let labels: Vec<u8> = flips[..n].iter().map(|&b| b as u8).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let base = auc_score(scores, &labels).unwrap();
            let transformed: Vec<f64> = scores.iter().map(|s| (0.3 * s).exp() + 5.0).collect();
            let after = auc_score(&transformed, &labels).unwrap();
            prop_assert!((base - after).abs() < 1e-12);
        }
    }
}
