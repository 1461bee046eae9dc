//! Independent dense ground-truth implementations, used only to verify
//! the production paths in `coarsen` and `embed`.
//!
//! Nothing here shares code with what it checks: the Schur complement is
//! textbook pivot-at-a-time elimination on a dense matrix, the inverse is
//! Gauss-Jordan with partial pivoting (the production solver is unpivoted
//! LDLᵀ), and the reference eigensolver is nalgebra's. Agreement between
//! the two routes is therefore evidence, not tautology.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coarsen::contract_vertex;
use crate::dense::DenseMatrix;
use crate::embed::Embedding;
use crate::graph::{Graph, VertexId};
use crate::{Error, Result};

/// Outcome of one verification check, serialized as a JSON line by the
/// `verify` subcommand. `pass` holds exactly when the check's governing
/// error is within `tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub max_abs_error: f64,
    pub rel_frobenius_error: f64,
    pub trials: u64,
    pub pass: bool,
    pub tolerance: f64,
}

impl OracleReport {
    /// `metric` is the governing error compared against `tolerance`.
    pub fn new(
        name: impl Into<String>,
        max_abs_error: f64,
        rel_frobenius_error: f64,
        trials: u64,
        tolerance: f64,
        metric: f64,
    ) -> Self {
        Self {
            name: name.into(),
            max_abs_error,
            rel_frobenius_error,
            trials,
            pass: metric <= tolerance,
            tolerance,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Textbook Schur complement: eliminates every index outside `keep`, one
/// pivot at a time, in ascending index order. The result is indexed by
/// `keep` in ascending order.
pub fn dense_schur(m: &DenseMatrix, keep: &[usize]) -> Result<DenseMatrix> {
    let order: Vec<usize> = (0..m.n()).filter(|i| !keep.contains(i)).collect();
    dense_schur_with_order(m, keep, &order)
}

/// [`dense_schur`] with an explicit pivot order over the eliminated set;
/// the Schur complement is order-free, which tests assert.
pub fn dense_schur_with_order(
    m: &DenseMatrix,
    keep: &[usize],
    elimination_order: &[usize],
) -> Result<DenseMatrix> {
    let n = m.n();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&i| i >= n) {
        return Err(Error::Shape(format!("keep index out of range for n={n}")));
    }
    let expected: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
    {
        let mut sorted = elimination_order.to_vec();
        sorted.sort_unstable();
        if sorted != expected {
            return Err(Error::Shape(
                "elimination order must cover exactly the dropped indices".into(),
            ));
        }
    }
    let mut work = m.clone();
    let mut alive: Vec<bool> = vec![true; n];
    for &x in elimination_order {
        let pivot = work[(x, x)];
        if pivot.abs() < 1e-12 {
            return Err(Error::Singular(format!("zero pivot at index {x}")));
        }
        for i in 0..n {
            if !alive[i] || i == x {
                continue;
            }
            let f = work[(i, x)] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                if alive[j] && j != x {
                    work[(i, j)] -= f * work[(x, j)];
                }
            }
        }
        alive[x] = false;
    }
    work.restrict(&kept)
}

/// Gauss-Jordan inverse with partial pivoting. The product `M·M⁻¹` is
/// verified against the identity to 1e-9.
pub fn dense_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.n();
    let mut a = m.clone();
    let mut inv = DenseMatrix::identity(n);
    for col in 0..n {
        let mut pivot_row = col;
        let mut best = a[(col, col)].abs();
        for r in (col + 1)..n {
            if a[(r, col)].abs() > best {
                best = a[(r, col)].abs();
                pivot_row = r;
            }
        }
        if best < 1e-300 {
            return Err(Error::Singular(format!("no pivot in column {col}")));
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(pivot_row, j)];
                a[(pivot_row, j)] = tmp;
                let tmp = inv[(col, j)];
                inv[(col, j)] = inv[(pivot_row, j)];
                inv[(pivot_row, j)] = tmp;
            }
        }
        let p = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= f * a[(col, j)];
                inv[(r, j)] -= f * inv[(col, j)];
            }
        }
    }
    let resid = m.mul(&inv).max_abs_diff(&DenseMatrix::identity(n));
    if resid > 1e-9 {
        return Err(Error::Singular(format!(
            "inverse residual {resid:.3e} exceeds 1e-9"
        )));
    }
    Ok(inv)
}

/// Result of the SDDM predicate; `witness` describes the first violation.
#[derive(Debug, Clone)]
pub struct SddmCheck {
    pub ok: bool,
    pub witness: Option<String>,
}

/// Symmetric, non-positive off-diagonals, and row-diagonal dominance
/// `M_ii ≥ -Σ_{j≠i} M_ij`, all within 1e-10. Zero row sums (the plain
/// Laplacian case) count as weak dominance and pass.
pub fn is_sddm(m: &DenseMatrix) -> SddmCheck {
    const TOL: f64 = 1e-10;
    let n = m.n();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > TOL {
                return SddmCheck {
                    ok: false,
                    witness: Some(format!(
                        "asymmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )),
                };
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] > TOL {
                return SddmCheck {
                    ok: false,
                    witness: Some(format!("positive off-diagonal at ({i},{j}): {}", m[(i, j)])),
                };
            }
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
        if m[(i, i)] < -off - TOL {
            return SddmCheck {
                ok: false,
                witness: Some(format!(
                    "row {i} not dominant: diagonal {} < {}",
                    m[(i, i)],
                    -off
                )),
            };
        }
    }
    SddmCheck {
        ok: true,
        witness: None,
    }
}

/// Monte-Carlo mean with its aggregated uncertainty.
pub struct ContractionMean {
    /// Entrywise mean of the contracted matrices, ordered by the sorted
    /// ids of `V∖{x}`.
    pub mean: DenseMatrix,
    /// Frobenius aggregate of the per-entry standard errors of the mean.
    pub stderr_frobenius: f64,
    pub trials: u64,
}

/// Empirical mean of `to_dense(contract_vertex(g, x, ·))` over
/// independent seeded trials (trial `t` uses stream `t` of a ChaCha8
/// generator keyed by `seed`).
pub fn monte_carlo_contraction_mean(
    g: &Graph,
    x: VertexId,
    trials: u64,
    seed: u64,
) -> Result<DenseMatrix> {
    monte_carlo_contraction_stats(g, x, trials, seed).map(|s| s.mean)
}

/// [`monte_carlo_contraction_mean`] plus per-entry standard errors.
pub fn monte_carlo_contraction_stats(
    g: &Graph,
    x: VertexId,
    trials: u64,
    seed: u64,
) -> Result<ContractionMean> {
    if trials == 0 {
        return Err(Error::Domain("trial count must be positive".into()));
    }
    if !g.contains(x) {
        return Err(Error::Domain(format!("vertex {x} not in graph")));
    }
    if g.unweighted_degree(x) == 0 {
        return Err(Error::DegenerateVertex(x));
    }
    let order: Vec<VertexId> = g.vertices().filter(|&v| v != x).collect();
    let n = order.len();
    let mut sum = DenseMatrix::zeros(n);
    let mut sumsq = DenseMatrix::zeros(n);
    for t in 0..trials {
        let mut h = g.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t);
        contract_vertex(&mut h, x, &mut rng)?;
        let m = h.to_dense(&order)?;
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                sum[(i, j)] += v;
                sumsq[(i, j)] += v * v;
            }
        }
    }
    let nf = trials as f64;
    let mean = sum.scale(1.0 / nf);
    let mut var_agg = 0.0;
    if trials > 1 {
        for i in 0..n {
            for j in 0..n {
                let sample_var =
                    (sumsq[(i, j)] - nf * mean[(i, j)] * mean[(i, j)]).max(0.0) / (nf - 1.0);
                var_agg += sample_var / nf;
            }
        }
    }
    Ok(ContractionMean {
        mean,
        stderr_frobenius: var_agg.sqrt(),
        trials,
    })
}

/// `‖R₁R₁ᵀ − R₂R₂ᵀ‖_F`; errors unless ids and dimensions match.
pub fn gram_distance(r1: &Embedding, r2: &Embedding) -> Result<f64> {
    if r1.ids() != r2.ids() {
        return Err(Error::Shape("embeddings cover different vertices".into()));
    }
    if r1.dim() != r2.dim() {
        return Err(Error::Shape(format!(
            "dimension mismatch: {} vs {}",
            r1.dim(),
            r2.dim()
        )));
    }
    Ok(r1.gram().sub(&r2.gram()).frobenius_norm())
}

/// Reference symmetric eigendecomposition (nalgebra), eigenpairs sorted
/// by descending `|λ|`. Returns eigenvalues and eigenvector columns.
pub fn reference_symmetric_eigen(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = m.n();
    let na = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = na.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .expect("finite eigenvalues")
    });
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DenseMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, idx[j])]);
    (vals, vecs)
}

// ---------------------------------------------------------------------------
// Randomized verification trials, shared by the `verify` subcommand and the
// acceptance suite. Each trial is fully determined by its seed.
// ---------------------------------------------------------------------------

use crate::coarsen::{coarsen_observed, schur_complement, CoarsenConfig, Delta, Method};
use crate::embed::{limit_poly_h, truncated_log, truncated_svd};
use crate::graph::{apply_theta, TerminalSet};
use crate::synth;
use rand::RngExt;

/// Random graph-with-slack instance plus a non-empty terminal set.
fn random_instance(n_max: usize, seed: u64) -> (Graph, TerminalSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX); // keep instance draws apart from trial draws
    let n = rng.random_range(3..=n_max.max(3));
    let extra = rng.random_range(0..=2 * n);
    let g = synth::connected_graph(n, extra, (0.5, 2.0), seed.wrapping_mul(31).wrapping_add(7));
    let slack_prob = [0.0, 0.5, 1.0][(seed % 3) as usize];
    let g = synth::with_random_slack(&g, slack_prob, (0.1, 1.0), seed.wrapping_add(13));
    let t_size = rng.random_range(1..=n.max(2) - 1);
    let mut ids: Vec<VertexId> = g.sorted_vertices();
    // Deterministic subset: stride through the id list.
    let stride = (ids.len() / t_size).max(1);
    ids = ids.into_iter().step_by(stride).take(t_size).collect();
    let t = TerminalSet::from_iter(ids);
    (g, t)
}

/// Outcome of one Schur-exactness trial.
pub struct SchurTrialOutcome {
    pub max_abs_diff: f64,
    /// First SDDM violation observed after any elimination step.
    pub sddm_violation: Option<String>,
    pub n: usize,
    pub terminals: usize,
}

/// Full-elimination exactness check: graph-side `schur_complement` with
/// `Δ = ∞` against the dense pivot-at-a-time oracle, with the SDDM
/// predicate evaluated after every elimination step.
pub fn schur_exactness_trial(n_max: usize, seed: u64) -> Result<SchurTrialOutcome> {
    let (g, t) = random_instance(n_max, seed);
    let order = g.sorted_vertices();
    let dense = g.to_dense(&order)?;
    let keep: Vec<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, v)| t.contains(**v))
        .map(|(i, _)| i)
        .collect();

    let mut sddm_violation = None;
    let cfg = CoarsenConfig {
        method: Method::Schur,
        delta: Delta::Infinite,
        seed: 0,
    };
    let (h, _) = coarsen_observed(&g, &t, &cfg, |work, info| {
        if sddm_violation.is_none() {
            let m = work
                .to_dense(&work.sorted_vertices())
                .expect("working graph densifies");
            let check = is_sddm(&m);
            if !check.ok {
                sddm_violation = Some(format!(
                    "after eliminating {}: {}",
                    info.vertex,
                    check.witness.unwrap_or_default()
                ));
            }
        }
    })?;

    let got = h.to_dense(&h.sorted_vertices())?;
    let want = dense_schur(&dense, &keep)?;
    Ok(SchurTrialOutcome {
        max_abs_diff: got.max_abs_diff(&want),
        sddm_violation,
        n: g.num_vertices(),
        terminals: t.len(),
    })
}

/// Outcome of one Monte-Carlo expectation trial.
pub struct ExpectationTrialOutcome {
    pub rel_frobenius_error: f64,
    /// Three standard errors of the mean, relative to `‖SC‖_F`.
    pub three_sigma_rel: f64,
    pub trials: u64,
    pub n: usize,
}

/// Single-vertex contraction mean over seeded trials against the dense
/// Schur complement.
pub fn expectation_trial(n_max: usize, trials: u64, seed: u64) -> Result<ExpectationTrialOutcome> {
    let (g, _) = random_instance(n_max.min(8), seed);
    let order = g.sorted_vertices();
    // Contract the highest-degree vertex: the most branching to average.
    let x = *order
        .iter()
        .max_by_key(|&&v| (g.unweighted_degree(v), v))
        .expect("non-empty graph");
    let stats = monte_carlo_contraction_stats(&g, x, trials, seed.wrapping_add(1000))?;
    let dense = g.to_dense(&order)?;
    let keep: Vec<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != x)
        .map(|(i, _)| i)
        .collect();
    let sc = dense_schur(&dense, &keep)?;
    let denom = sc.frobenius_norm().max(1e-300);
    Ok(ExpectationTrialOutcome {
        rel_frobenius_error: stats.mean.sub(&sc).frobenius_norm() / denom,
        three_sigma_rel: 3.0 * stats.stderr_frobenius / denom,
        trials,
        n: g.num_vertices(),
    })
}

/// One Fact-1 check on a random SDDM matrix:
/// `dense_schur(M,T)⁻¹` against `dense_inverse(M)` restricted to `T`.
/// Returns the max absolute difference.
pub fn fact1_trial(n_max: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let n = rng.random_range(3..=n_max.max(3));
    let m = synth::random_sddm(n, seed.wrapping_mul(17).wrapping_add(3));
    let k = rng.random_range(1..n);
    let keep: Vec<usize> = (0..n).step_by((n / k).max(1)).take(k).collect();
    let lhs = dense_inverse(&dense_schur(&m, &keep)?)?;
    let rhs = dense_inverse(&m)?.restrict(&keep)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// Outcome of one rotation-equivalence trial.
pub struct EmbeddingIdentityOutcome {
    /// `‖R_G·R_Gᵀ − R_H·R_Hᵀ‖_F` on the terminal set.
    pub gram_distance: f64,
    /// Max absolute difference of the two pre-log matrices.
    pub prelog_max_abs_diff: f64,
    /// `|λ_d| − |λ_{d+1}|` separation of the factorized matrix.
    pub spectral_gap: f64,
    pub n: usize,
    pub terminals: usize,
}

/// Compares the limiting full-graph embedding restricted to terminals
/// (dense-inverse route) against the NetMFSC embedding of the coarsened
/// graph (graph-side Schur route). Instances whose `d`-th spectral gap
/// is below `1e-2` are re-drawn so the rank-`d` subspace is well defined.
pub fn embedding_identity_trial(
    n_max: usize,
    theta: f64,
    d: usize,
    seed: u64,
) -> Result<EmbeddingIdentityOutcome> {
    for attempt in 0..40u64 {
        let sub_seed = seed.wrapping_mul(41).wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
        rng.set_stream(u64::MAX - 1);
        let n_lo = (d + 4).min(n_max.saturating_sub(1)).max(4);
        let n = rng.random_range(n_lo..=n_max.max(n_lo + 1));
        let g = synth::connected_graph(n, rng.random_range(n..=3 * n), (0.5, 2.0), sub_seed);
        let t_size = rng.random_range((d + 2).min(n - 1)..n);
        let order = g.sorted_vertices();
        let stride = (order.len() / t_size).max(1);
        let t_ids: Vec<VertexId> = order.iter().copied().step_by(stride).take(t_size).collect();
        if t_ids.len() <= d {
            continue;
        }
        let t = TerminalSet::from_iter(t_ids.iter().copied());
        let m_scale = g.num_edges();

        // Route A: dense inverse of D - θA, restricted to terminals.
        let hat = apply_theta(&g, theta)?;
        let full = hat.to_dense(&order)?;
        let mut inv = dense_inverse(&full)?;
        for (i, &v) in order.iter().enumerate() {
            inv[(i, i)] -= 1.0 / g.weighted_degree(v);
        }
        let keep: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|(_, v)| t.contains(**v))
            .map(|(i, _)| i)
            .collect();
        let lim_g_t = inv.restrict(&keep)?;
        let logged_g = truncated_log(&lim_g_t, m_scale)?;

        // Spectral-gap screen on the matrix actually factorized.
        let (vals, _) = reference_symmetric_eigen(&logged_g);
        let lam_d = vals[d - 1].abs();
        let lam_next = if d < vals.len() { vals[d].abs() } else { 0.0 };
        let gap = lam_d - lam_next;
        if gap < 1e-2 {
            continue;
        }

        // Route B: graph-side coarsening, then the NetMFSC limit.
        let h = schur_complement(&hat, &t, Delta::Infinite)?;
        let d_orig: std::collections::BTreeMap<VertexId, f64> =
            t.iter().map(|v| (v, g.weighted_degree(v))).collect();
        let lim_h = limit_poly_h(&h, &d_orig)?;
        let logged_h = truncated_log(&lim_h, m_scale)?;

        let ids: Vec<VertexId> = t.iter().collect();
        let r_g = truncated_svd(&logged_g, &ids, d)?;
        let r_h = truncated_svd(&logged_h, &ids, d)?;

        return Ok(EmbeddingIdentityOutcome {
            gram_distance: gram_distance(&r_g, &r_h)?,
            prelog_max_abs_diff: lim_g_t.max_abs_diff(&lim_h),
            spectral_gap: gap,
            n,
            terminals: t.len(),
        });
    }
    Err(Error::Domain(format!(
        "no spectrally separated instance found for seed {seed}, d={d}, theta={theta}"
    )))
}

/// Outcome of one contraction work-accounting run.
pub struct WorkBoundOutcome {
    /// `adjacency_ops / (m·ln n)` for this run.
    pub work_constant: f64,
    pub edges: usize,
    pub vertices: usize,
}

/// Runs a full random contraction and reports the measured work relative
/// to `m·ln n`. The in-loop edge-count assertion rides along.
pub fn work_bound_trial(n_max: usize, seed: u64) -> Result<WorkBoundOutcome> {
    let (g, t) = random_instance(n_max, seed);
    let cfg = CoarsenConfig {
        method: Method::Contract,
        delta: Delta::Infinite,
        seed,
    };
    let (_, stats) = coarsen_observed(&g, &t, &cfg, |_, _| {})?;
    let m = g.num_edges().max(1) as f64;
    let n = g.num_vertices().max(2) as f64;
    Ok(WorkBoundOutcome {
        work_constant: stats.adjacency_ops as f64 / (m * n.ln()),
        edges: g.num_edges(),
        vertices: g.num_vertices(),
    })
}
