//! Random-walk matrix-factorization embeddings.
//!
//! NetMF factorizes the entrywise truncated logarithm of a windowed
//! random-walk sum `Σ_{i=1..W} θ_i·D⁻¹(AD⁻¹)ⁱ`. For a coarsened graph
//! `H` (with slack, so `D'_H = D_H + Dˢ_H`), the NetMFSC variant
//! factorizes `Σ_{i=1..W} D'⁻¹(A_H D'⁻¹)ⁱ + D'⁻¹ − D_T⁻¹` where `D_T`
//! is the *original* graph's degree diagonal on the terminals. With
//! geometric parameters `θ_i = θ^i`, both sums converge as `W → ∞` to
//! `(D − θA)⁻¹ − D⁻¹` restricted to the surviving vertices, which is
//! what makes coarsened embeddings agree with full-graph ones.
//!
//! The "SVD" here is a symmetric eigendecomposition: take the `d`
//! eigenpairs of largest `|λ|` and emit `R = U_d·|Λ_d|^{1/2}`. Embedding
//! comparisons go through the rotation-invariant Gram matrix `R·Rᵀ`.
//!
//! Linear solves use symmetric `LDLᵀ` elimination without pivoting
//! (fine on diagonally dominant systems) with an enforced residual
//! check. Row and column order of every matrix here is ascending vertex
//! id.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::dense::DenseMatrix;
use crate::graph::{Graph, VertexId};
use crate::{Error, Result};

/// Residual bound enforced on every linear solve.
const SOLVE_TOL: f64 = 1e-9;

/// Walk-sum coefficients `θ_1..θ_W`, each in (0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct WalkParams {
    thetas: Vec<f64>,
}

impl WalkParams {
    /// Geometric parameters `θ_i = θ^i` for `i = 1..=window`.
    pub fn geometric(theta: f64, window: usize) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain(format!("theta must lie in (0,1), got {theta}")));
        }
        if window == 0 {
            return Err(Error::Domain("window must be at least 1".into()));
        }
        let thetas = (1..=window as i32).map(|i| theta.powi(i)).collect();
        Ok(Self { thetas })
    }

    /// Explicit coefficient sequence; must be non-empty, all in (0,1).
    pub fn explicit(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::Domain("window must be at least 1".into()));
        }
        if let Some(bad) = thetas.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::Domain(format!("theta values must lie in (0,1), got {bad}")));
        }
        Ok(Self { thetas })
    }

    pub fn window(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
}

fn degree_vector(g: &Graph, order: &[VertexId]) -> Result<Vec<f64>> {
    order
        .iter()
        .map(|&v| {
            let d = g.weighted_degree(v);
            if d == 0.0 {
                Err(Error::Domain(format!("vertex {v} has zero degree")))
            } else {
                Ok(d)
            }
        })
        .collect()
}

fn adjacency(g: &Graph, order: &[VertexId]) -> DenseMatrix {
    let index: BTreeMap<VertexId, usize> =
        order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut a = DenseMatrix::zeros(order.len());
    for (i, &v) in order.iter().enumerate() {
        for (u, w) in g.neighbors(v) {
            a[(i, index[&u])] = w;
        }
    }
    a
}

/// Windowed walk sum `Σ_{i=1..W} θ_i·D⁻¹(AD⁻¹)ⁱ` over ascending vertex
/// ids. Requires a slack-free graph with no zero-degree vertices.
pub fn netmf_poly(g: &Graph, params: &WalkParams) -> Result<DenseMatrix> {
    if !g.is_slack_free() {
        return Err(Error::Domain("netmf requires a slack-free graph".into()));
    }
    let order = g.sorted_vertices();
    let deg = degree_vector(g, &order)?;
    Ok(walk_sum(&adjacency(g, &order), &deg, params.thetas()))
}

/// `Σ_i θ_i·D⁻¹(P)ⁱ` with `P = A·D⁻¹`, for an arbitrary degree diagonal.
fn walk_sum(a: &DenseMatrix, deg: &[f64], thetas: &[f64]) -> DenseMatrix {
    let n = deg.len();
    let p = DenseMatrix::from_fn(n, |i, j| a[(i, j)] / deg[j]);
    let mut cur = p.clone(); // (A D⁻¹)^i
    let mut sum = DenseMatrix::zeros(n);
    for (k, &theta) in thetas.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                sum[(i, j)] += theta * cur[(i, j)] / deg[i];
            }
        }
        if k + 1 < thetas.len() {
            cur = cur.mul(&p);
        }
    }
    sum.symmetrize();
    sum
}

/// `W → ∞` limit of the geometric walk sum: `(D − θA)⁻¹ − D⁻¹`.
pub fn limit_poly_g(g: &Graph, theta: f64) -> Result<DenseMatrix> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta must lie in (0,1), got {theta}")));
    }
    if !g.is_slack_free() {
        return Err(Error::Domain("limit walk sum requires a slack-free graph".into()));
    }
    let order = g.sorted_vertices();
    let deg = degree_vector(g, &order)?;
    let a = adjacency(g, &order);
    let n = order.len();
    let m = DenseMatrix::from_fn(n, |i, j| {
        if i == j {
            deg[i]
        } else {
            -theta * a[(i, j)]
        }
    });
    let mut inv = sym_inverse(&m)?;
    for i in 0..n {
        inv[(i, i)] -= 1.0 / deg[i];
    }
    inv.symmetrize();
    Ok(inv)
}

fn orig_degree_vector(
    order: &[VertexId],
    orig_degrees: &BTreeMap<VertexId, f64>,
) -> Result<Vec<f64>> {
    order
        .iter()
        .map(|&v| match orig_degrees.get(&v) {
            Some(&d) if d > 0.0 => Ok(d),
            Some(&d) => Err(Error::Domain(format!(
                "original degree for vertex {v} must be positive, got {d}"
            ))),
            None => Err(Error::Domain(format!(
                "missing original-degree entry for vertex {v}; \
                 the coarsened graph must contain only terminals"
            ))),
        })
        .collect()
}

fn augmented_degree_vector(h: &Graph, order: &[VertexId]) -> Result<Vec<f64>> {
    order
        .iter()
        .map(|&v| {
            let d = h.augmented_degree(v);
            if d == 0.0 {
                Err(Error::Domain(format!("vertex {v} has zero augmented degree")))
            } else {
                Ok(d)
            }
        })
        .collect()
}

/// Diagonal-adjusted walk sum for a coarsened graph:
/// `Σ_{i=1..W} D'⁻¹(A_H D'⁻¹)ⁱ + D'⁻¹ − D_T⁻¹`, rows and columns in
/// ascending terminal id. `orig_degrees` must cover every vertex of `h`.
pub fn netmfsc_poly(
    h: &Graph,
    orig_degrees: &BTreeMap<VertexId, f64>,
    window: usize,
) -> Result<DenseMatrix> {
    if window == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    let order = h.sorted_vertices();
    let d_orig = orig_degree_vector(&order, orig_degrees)?;
    let d_aug = augmented_degree_vector(h, &order)?;
    let a = adjacency(h, &order);
    let ones = vec![1.0; window];
    let mut sum = walk_sum(&a, &d_aug, &ones);
    for i in 0..order.len() {
        sum[(i, i)] += 1.0 / d_aug[i] - 1.0 / d_orig[i];
    }
    Ok(sum)
}

/// `W → ∞` limit of the NetMFSC sum: `(D'_H − A_H)⁻¹ − D_T⁻¹`.
pub fn limit_poly_h(h: &Graph, orig_degrees: &BTreeMap<VertexId, f64>) -> Result<DenseMatrix> {
    let order = h.sorted_vertices();
    let d_orig = orig_degree_vector(&order, orig_degrees)?;
    let m = h.to_dense(&order)?;
    let mut inv = sym_inverse(&m)?;
    for i in 0..order.len() {
        inv[(i, i)] -= 1.0 / d_orig[i];
    }
    inv.symmetrize();
    Ok(inv)
}

/// Entrywise truncated logarithm: `max(log(m_edges·x), 0)`, with
/// non-positive entries mapped to 0.
pub fn truncated_log(m: &DenseMatrix, m_edges: usize) -> Result<DenseMatrix> {
    if m_edges == 0 {
        return Err(Error::Domain("edge-count scale for log must be positive".into()));
    }
    let scale = m_edges as f64;
    Ok(m.map(|x| {
        if x <= 0.0 {
            0.0
        } else {
            (scale * x).ln().max(0.0)
        }
    }))
}

/// Per-vertex embedding vectors `R = U_d·|Λ_d|^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    ids: Vec<VertexId>,
    d: usize,
    data: Vec<f64>, // row-major, ids.len() × d
}

impl Embedding {
    pub fn from_parts(ids: Vec<VertexId>, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != ids.len() * d {
            return Err(Error::Shape(format!(
                "embedding data has {} values, expected {}×{}",
                data.len(),
                ids.len(),
                d
            )));
        }
        Ok(Self { ids, d, data })
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Row for vertex `v`; ids are kept in ascending order.
    pub fn row_for(&self, v: VertexId) -> Option<&[f64]> {
        self.ids.binary_search(&v).ok().map(|i| self.row(i))
    }

    /// Rotation-invariant witness `R·Rᵀ`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.ids.len();
        DenseMatrix::from_fn(n, |i, j| {
            self.row(i)
                .iter()
                .zip(self.row(j))
                .map(|(a, b)| a * b)
                .sum()
        })
    }

    /// TSV with a `# d=<d>` header, then `id <TAB> x_0 .. x_{d-1}`.
    pub fn write_tsv<W: Write>(&self, mut sink: W) -> Result<()> {
        let mut buf = format!("# d={}\n", self.d);
        for (i, &v) in self.ids.iter().enumerate() {
            write!(buf, "{v}").expect("write to String");
            for x in self.row(i) {
                write!(buf, "\t{x}").expect("write to String");
            }
            buf.push('\n');
        }
        sink.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut d: Option<usize> = None;
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if let Some(rest) = text.strip_prefix('#') {
                if d.is_none() {
                    if let Some(val) = rest.trim().strip_prefix("d=") {
                        d = Some(val.parse().map_err(|_| Error::Parse {
                            line: lineno + 1,
                            msg: format!("bad dimension {val:?}"),
                        })?);
                    }
                }
                continue;
            }
            let d = d.ok_or(Error::Parse {
                line: lineno + 1,
                msg: "missing `# d=<d>` header".into(),
            })?;
            let mut fields = text.split_whitespace();
            let id: VertexId = fields
                .next()
                .ok_or(Error::Parse {
                    line: lineno + 1,
                    msg: "empty row".into(),
                })?
                .parse()
                .map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: "bad vertex id".into(),
                })?;
            let row: Vec<f64> = fields
                .map(|f| {
                    f.parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad value {f:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != d {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {d} values, got {}", row.len()),
                });
            }
            ids.push(id);
            data.extend(row);
        }
        let d = d.ok_or(Error::Parse {
            line: 1,
            msg: "missing `# d=<d>` header".into(),
        })?;
        Embedding::from_parts(ids, d, data)
    }
}

/// Rank-d factorization of a symmetric matrix: the `d` eigenpairs of
/// largest `|λ|` (ties broken by smaller index), `R = U_d·|Λ_d|^{1/2}`.
pub fn truncated_svd(m: &DenseMatrix, ids: &[VertexId], d: usize) -> Result<Embedding> {
    let n = m.n();
    if ids.len() != n {
        return Err(Error::Shape(format!("{} ids for a {n}×{n} matrix", ids.len())));
    }
    if d == 0 || d > n {
        return Err(Error::Shape(format!(
            "target dimension {d} out of range for {n} vertices"
        )));
    }
    if !m.is_symmetric(1e-8 * m.max_abs().max(1.0)) {
        return Err(Error::Shape("matrix is not symmetric".into()));
    }
    let (vals, vecs) = jacobi_eigh(m);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| vals[b].abs().partial_cmp(&vals[a].abs()).expect("finite"));
    let mut data = vec![0.0; n * d];
    for (k, &e) in idx.iter().take(d).enumerate() {
        let s = vals[e].abs().sqrt();
        for i in 0..n {
            data[i * d + k] = vecs[(i, e)] * s;
        }
    }
    Embedding::from_parts(ids.to_vec(), d, data)
}

/// Embedding pipeline selector for [`embed_graph`].
pub enum EmbedMode<'a> {
    /// Plain NetMF on a slack-free graph.
    NetMf(&'a WalkParams),
    /// NetMFSC on a coarsened graph; `orig_degrees` is the original
    /// graph's weighted-degree diagonal over the terminals.
    NetMfSc {
        window: usize,
        orig_degrees: &'a BTreeMap<VertexId, f64>,
    },
}

/// Walk sum → truncated log → rank-d factorization.
///
/// `m_edges` scales the logarithm; when `None`, the edge count of the
/// graph being factorized is used.
pub fn embed_graph(
    g: &Graph,
    mode: EmbedMode<'_>,
    d: usize,
    m_edges: Option<usize>,
) -> Result<Embedding> {
    let poly = match mode {
        EmbedMode::NetMf(params) => netmf_poly(g, params)?,
        EmbedMode::NetMfSc {
            window,
            orig_degrees,
        } => netmfsc_poly(g, orig_degrees, window)?,
    };
    let scale = m_edges.unwrap_or_else(|| g.num_edges());
    let logged = truncated_log(&poly, scale)?;
    truncated_svd(&logged, &g.sorted_vertices(), d)
}

/// Symmetric LDLᵀ inverse without pivoting, with residual enforcement.
pub(crate) fn sym_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let n = m.n();
    let (l, diag) = ldl_factor(m)?;
    let mut inv = DenseMatrix::zeros(n);
    let mut rhs = vec![0.0; n];
    for col in 0..n {
        rhs.iter_mut().for_each(|x| *x = 0.0);
        rhs[col] = 1.0;
        let x = ldl_solve(&l, &diag, &rhs);
        // Residual ‖Mx − e‖_2 against a unit right-hand side.
        let mut resid = 0.0;
        for i in 0..n {
            let mut mx = 0.0;
            for j in 0..n {
                mx += m[(i, j)] * x[j];
            }
            let r = mx - rhs[i];
            resid += r * r;
        }
        if resid.sqrt() > SOLVE_TOL {
            return Err(Error::Singular(format!(
                "solve residual {:.3e} exceeds {SOLVE_TOL:.0e} on column {col}",
                resid.sqrt()
            )));
        }
        for i in 0..n {
            inv[(i, col)] = x[i];
        }
    }
    Ok(inv)
}

fn ldl_factor(m: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let n = m.n();
    let mut l = DenseMatrix::identity(n);
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = m[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        if dj.abs() < 1e-300 {
            return Err(Error::Singular(format!("zero pivot at index {j}")));
        }
        d[j] = dj;
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    Ok((l, d))
}

fn ldl_solve(l: &DenseMatrix, d: &[f64], b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[(i, k)] * x[k];
        }
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l[(k, i)] * x[k];
        }
    }
    x
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns eigenvalues and the matrix of eigenvectors (columns).
pub(crate) fn jacobi_eigh(m: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = m.n();
    let mut a = m.clone();
    a.symmetrize();
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm().max(1e-300);
    let tol = 1e-14 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = c * aip - s * aiq;
                        a[(p, i)] = a[(i, p)];
                        a[(i, q)] = s * aip + c * aiq;
                        a[(q, i)] = a[(i, q)];
                    }
                }
                a[(p, p)] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[(q, q)] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[(i, i)]).collect();
    (vals, v)
}
