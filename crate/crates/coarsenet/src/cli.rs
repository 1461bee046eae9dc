//! Command-line entry point: `coarsen`, `embed`, `verify`, `eval`.
//!
//! The binary is a thin dispatcher over the library. Exit codes: 0 on
//! success, 1 on I/O or domain failures, 2 on usage errors. Every
//! subcommand validates its whole configuration before touching any
//! output path, and all randomness flows from the single `--seed`, so a
//! repeated invocation writes byte-identical files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::coarsen::{coarsen, CoarsenConfig, Delta, Method};
use crate::embed::{embed_graph, EmbedMode, WalkParams};
use crate::evalkit::{auc_score, edge_features, split_edges, train_logreg, LogRegConfig, Operator};
use crate::graph::{
    apply_theta, parse_edge_list, write_edge_list, Graph, TerminalSet, VertexId,
};
use crate::oracle::{self, OracleReport};

#[derive(Debug, Parser)]
#[command(
    name = "coarsenet",
    version,
    about = "Terminal-preserving graph coarsening and random-walk embeddings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coarsen a graph onto its terminal set
    Coarsen(CoarsenArgs),
    /// Compute a NetMF or NetMFSC embedding
    Embed(EmbedArgs),
    /// Run oracle verification checks, emitting JSONL reports
    Verify(VerifyArgs),
    /// End-to-end terminal link-prediction evaluation
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct CoarsenArgs {
    /// Input edge-list TSV
    #[arg(long)]
    pub input: PathBuf,
    /// Terminal ids, one per line
    #[arg(long)]
    pub terminals: PathBuf,
    /// `schur` or `contract`
    #[arg(long, default_value = "schur")]
    pub method: String,
    /// Degree threshold: positive integer or `inf`
    #[arg(long, default_value = "30")]
    pub delta: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Apply θ-preprocessing (weights θ·w, slack (1-θ)·D) before coarsening
    #[arg(long)]
    pub theta: Option<f64>,
    /// Output edge-list TSV
    #[arg(long)]
    pub output: PathBuf,
    /// Optional JSON run report
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Optional sidecar of original weighted degrees over the terminals
    #[arg(long)]
    pub orig_degrees_out: Option<PathBuf>,
    /// Include wall time in the report (breaks byte-for-byte determinism)
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Input edge-list TSV
    #[arg(long)]
    pub input: PathBuf,
    /// `netmf` or `netmfsc`
    #[arg(long, default_value = "netmf")]
    pub mode: String,
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    /// Original-degree sidecar (required for netmfsc)
    #[arg(long)]
    pub orig_degrees: Option<PathBuf>,
    /// Override the edge-count scale of the truncated logarithm
    #[arg(long)]
    pub m_edges: Option<usize>,
    /// Output embedding TSV
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `all`, `schur-oracle`, `expectation`, `inverse-identity`,
    /// `embedding-identity`, `sddm-closure`, or `work-bound`
    #[arg(long, default_value = "all")]
    pub check: String,
    /// Maximum instance size (check-specific default)
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of random instances (check-specific default)
    #[arg(long)]
    pub instances: Option<usize>,
    /// Monte-Carlo trials for the expectation check
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the default tolerance of the selected check(s)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write JSONL reports here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Input edge-list TSV (must be connected and slack-free)
    #[arg(long)]
    pub input: PathBuf,
    /// Terminal ids, one per line
    #[arg(long)]
    pub terminals: PathBuf,
    /// Fraction of terminal-terminal edges to remove
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    /// `none`, `schur`, or `contract`
    #[arg(long, default_value = "none")]
    pub method: String,
    #[arg(long, default_value = "30")]
    pub delta: String,
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    /// `hadamard` or `weighted-l2`
    #[arg(long, default_value = "hadamard")]
    pub operator: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON evaluation report
    #[arg(long)]
    pub report: PathBuf,
    /// Optional predictions TSV: `u v score label`
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Optional prefix for positive/negative pair TSVs
    #[arg(long)]
    pub splits_out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Failure(String),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses and runs, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Coarsen(args) => cmd_coarsen(args),
        Command::Embed(args) => cmd_embed(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn open_input(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Failure(format!("cannot open {}: {e}", path.display())))
}

fn read_graph(path: &Path) -> CliResult<Graph> {
    let reader = open_input(path)?;
    parse_edge_list(reader)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

fn read_terminals(path: &Path) -> CliResult<TerminalSet> {
    let reader = open_input(path)?;
    TerminalSet::from_reader(reader)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

fn read_degrees(path: &Path) -> CliResult<BTreeMap<VertexId, f64>> {
    let reader = open_input(path)?;
    let mut map = BTreeMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
        let text = match line.find('#') {
            Some(i) => line[..i].trim(),
            None => line.trim(),
        };
        if text.is_empty() {
            continue;
        }
        let mut fields = text.split_whitespace();
        let (Some(v), Some(d), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CliError::Failure(format!(
                "{}: line {}: expected `vertex degree`",
                path.display(),
                lineno + 1
            )));
        };
        let v: VertexId = v.parse().map_err(|_| {
            CliError::Failure(format!("{}: line {}: bad vertex id", path.display(), lineno + 1))
        })?;
        let d: f64 = d.parse().map_err(|_| {
            CliError::Failure(format!("{}: line {}: bad degree", path.display(), lineno + 1))
        })?;
        map.insert(v, d);
    }
    Ok(map)
}

fn create_output(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Failure(format!("cannot create {}: {e}", path.display())))
}

fn validate_theta(theta: f64) -> CliResult<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(CliError::Usage(format!("theta must lie in (0,1), got {theta}")));
    }
    Ok(())
}

fn cmd_coarsen(args: CoarsenArgs) -> CliResult<()> {
    // Usage validation first; no output paths are touched on failure.
    let method: Method = args.method.parse().map_err(|e: crate::Error| CliError::Usage(e.to_string()))?;
    let delta: Delta = args.delta.parse().map_err(|e: crate::Error| CliError::Usage(e.to_string()))?;
    if let Some(theta) = args.theta {
        validate_theta(theta)?;
    }

    let g = read_graph(&args.input)?;
    let terminals = read_terminals(&args.terminals)?;
    terminals.validate_subset_of(&g).map_err(CliError::from)?;

    let working = match args.theta {
        Some(theta) => apply_theta(&g, theta).map_err(CliError::from)?,
        None => g.clone(),
    };

    let start = Instant::now();
    let cfg = CoarsenConfig {
        method,
        delta,
        seed: args.seed,
    };
    let (h, mut stats) = coarsen(&working, &terminals, &cfg).map_err(CliError::from)?;
    if args.timings {
        stats.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }

    let mut out = create_output(&args.output)?;
    write_edge_list(&h, &mut out).map_err(CliError::from)?;
    out.flush().map_err(|e| CliError::Failure(e.to_string()))?;

    if let Some(report_path) = &args.report {
        let mut report = create_output(report_path)?;
        serde_json::to_writer_pretty(&mut report, &stats)
            .map_err(|e| CliError::Failure(e.to_string()))?;
        report
            .write_all(b"\n")
            .and_then(|_| report.flush())
            .map_err(|e| CliError::Failure(e.to_string()))?;
    }

    if let Some(deg_path) = &args.orig_degrees_out {
        let mut sink = create_output(deg_path)?;
        for v in terminals.iter() {
            writeln!(sink, "{v}\t{}", g.weighted_degree(v))
                .map_err(|e| CliError::Failure(e.to_string()))?;
        }
        sink.flush().map_err(|e| CliError::Failure(e.to_string()))?;
    }
    Ok(())
}

fn cmd_embed(args: EmbedArgs) -> CliResult<()> {
    if args.window == 0 {
        return Err(CliError::Usage("window must be at least 1".into()));
    }
    if args.dim == 0 {
        return Err(CliError::Usage("dim must be at least 1".into()));
    }
    validate_theta(args.theta)?;
    if args.m_edges == Some(0) {
        return Err(CliError::Usage("m-edges must be positive".into()));
    }
    enum Mode {
        NetMf,
        NetMfSc,
    }
    let mode = match args.mode.as_str() {
        "netmf" => Mode::NetMf,
        "netmfsc" => Mode::NetMfSc,
        other => {
            return Err(CliError::Usage(format!(
                "mode must be `netmf` or `netmfsc`, got {other:?}"
            )))
        }
    };
    if matches!(mode, Mode::NetMfSc) && args.orig_degrees.is_none() {
        return Err(CliError::Usage(
            "netmfsc requires --orig-degrees <file>".into(),
        ));
    }

    let g = read_graph(&args.input)?;
    let embedding = match mode {
        Mode::NetMf => {
            let params = WalkParams::geometric(args.theta, args.window).map_err(CliError::from)?;
            embed_graph(&g, EmbedMode::NetMf(&params), args.dim, args.m_edges)
                .map_err(CliError::from)?
        }
        Mode::NetMfSc => {
            let degrees = read_degrees(args.orig_degrees.as_ref().expect("validated"))?;
            embed_graph(
                &g,
                EmbedMode::NetMfSc {
                    window: args.window,
                    orig_degrees: &degrees,
                },
                args.dim,
                args.m_edges,
            )
            .map_err(CliError::from)?
        }
    };

    let mut out = create_output(&args.output)?;
    embedding.write_tsv(&mut out).map_err(CliError::from)?;
    out.flush().map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(())
}

struct CheckDefaults {
    n: usize,
    instances: usize,
    tolerance: f64,
}

fn run_check(
    name: &str,
    args: &VerifyArgs,
) -> CliResult<OracleReport> {
    let defaults = match name {
        "schur-oracle" => CheckDefaults { n: 50, instances: 200, tolerance: 1e-9 },
        "expectation" => CheckDefaults { n: 8, instances: 5, tolerance: 0.02 },
        "inverse-identity" => CheckDefaults { n: 12, instances: 100, tolerance: 1e-8 },
        "embedding-identity" => CheckDefaults { n: 30, instances: 12, tolerance: 1e-6 },
        "sddm-closure" => CheckDefaults { n: 50, instances: 60, tolerance: 0.0 },
        "work-bound" => CheckDefaults { n: 50, instances: 20, tolerance: 64.0 },
        other => {
            return Err(CliError::Usage(format!("unknown check name {other:?}")));
        }
    };
    let n = args.n.unwrap_or(defaults.n);
    let instances = args.instances.unwrap_or(defaults.instances);
    let tolerance = args.tol.unwrap_or(defaults.tolerance);
    let seed = args.seed;

    let report = match name {
        "schur-oracle" => {
            let mut max_abs = 0.0f64;
            for i in 0..instances {
                let out = oracle::schur_exactness_trial(n, seed.wrapping_add(i as u64))
                    .map_err(CliError::from)?;
                max_abs = max_abs.max(out.max_abs_diff);
            }
            OracleReport::new("schur-oracle", max_abs, 0.0, instances as u64, tolerance, max_abs)
        }
        "expectation" => {
            let mut worst = 0.0f64;
            for i in 0..instances {
                let out = oracle::expectation_trial(n, args.trials, seed.wrapping_add(i as u64))
                    .map_err(CliError::from)?;
                worst = worst.max(out.rel_frobenius_error);
            }
            OracleReport::new(
                "expectation",
                0.0,
                worst,
                instances as u64 * args.trials,
                tolerance,
                worst,
            )
        }
        "inverse-identity" => {
            let mut max_abs = 0.0f64;
            for i in 0..instances {
                let diff = oracle::fact1_trial(n, seed.wrapping_add(i as u64))
                    .map_err(CliError::from)?;
                max_abs = max_abs.max(diff);
            }
            OracleReport::new(
                "inverse-identity",
                max_abs,
                0.0,
                instances as u64,
                tolerance,
                max_abs,
            )
        }
        "embedding-identity" => {
            let thetas = [0.3, 0.5, 0.9];
            let dims = [2, 4];
            let mut worst = 0.0f64;
            for i in 0..instances {
                let theta = thetas[i % thetas.len()];
                let d = dims[(i / thetas.len()) % dims.len()];
                let out = oracle::embedding_identity_trial(n, theta, d, seed.wrapping_add(i as u64))
                    .map_err(CliError::from)?;
                worst = worst.max(out.gram_distance);
            }
            OracleReport::new(
                "embedding-identity",
                worst,
                0.0,
                instances as u64,
                tolerance,
                worst,
            )
        }
        "sddm-closure" => {
            let mut violations = 0u64;
            for i in 0..instances {
                let out = oracle::schur_exactness_trial(n, seed.wrapping_add(i as u64))
                    .map_err(CliError::from)?;
                if out.sddm_violation.is_some() {
                    violations += 1;
                }
            }
            OracleReport::new(
                "sddm-closure",
                violations as f64,
                0.0,
                instances as u64,
                tolerance,
                violations as f64,
            )
        }
        "work-bound" => {
            let mut c = 0.0f64;
            for i in 0..instances {
                let out = oracle::work_bound_trial(n, seed.wrapping_add(i as u64))
                    .map_err(CliError::from)?;
                c = c.max(out.work_constant);
            }
            OracleReport::new("work-bound", c, 0.0, instances as u64, tolerance, c)
        }
        _ => unreachable!("validated above"),
    };
    Ok(report)
}

const ALL_CHECKS: [&str; 6] = [
    "schur-oracle",
    "expectation",
    "inverse-identity",
    "embedding-identity",
    "sddm-closure",
    "work-bound",
];

fn cmd_verify(args: VerifyArgs) -> CliResult<()> {
    let selected: Vec<&str> = if args.check == "all" {
        ALL_CHECKS.to_vec()
    } else if ALL_CHECKS.contains(&args.check.as_str()) {
        vec![args.check.as_str()]
    } else {
        return Err(CliError::Usage(format!("unknown check name {:?}", args.check)));
    };

    let mut lines = Vec::new();
    let mut failures = 0usize;
    for name in selected {
        let report = run_check(name, &args)?;
        if !report.pass {
            failures += 1;
        }
        lines.push(report.to_json_line());
    }

    match &args.out {
        Some(path) => {
            let mut sink = create_output(path)?;
            for line in &lines {
                writeln!(sink, "{line}").map_err(|e| CliError::Failure(e.to_string()))?;
            }
            sink.flush().map_err(|e| CliError::Failure(e.to_string()))?;
        }
        None => {
            for line in &lines {
                println!("{line}");
            }
        }
    }
    if failures > 0 {
        return Err(CliError::Failure(format!("{failures} check(s) failed")));
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    auc: f64,
    positives: usize,
    negatives: usize,
    seed: u64,
    operator: String,
    method: String,
    window: usize,
    theta: f64,
    dim: usize,
    ratio: f64,
    train_vertices: usize,
    train_edges: usize,
    embedded_vertices: usize,
    embedded_edges: usize,
    final_grad_norm: f64,
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    if !(args.ratio > 0.0 && args.ratio < 1.0) {
        return Err(CliError::Usage(format!(
            "ratio must lie in (0,1), got {}",
            args.ratio
        )));
    }
    if args.window == 0 {
        return Err(CliError::Usage("window must be at least 1".into()));
    }
    if args.dim == 0 {
        return Err(CliError::Usage("dim must be at least 1".into()));
    }
    validate_theta(args.theta)?;
    let operator: Operator = args
        .operator
        .parse()
        .map_err(|e: crate::Error| CliError::Usage(e.to_string()))?;
    let method = match args.method.as_str() {
        "none" => None,
        "schur" => Some(Method::Schur),
        "contract" => Some(Method::Contract),
        other => {
            return Err(CliError::Usage(format!(
                "method must be `none`, `schur` or `contract`, got {other:?}"
            )))
        }
    };
    let delta: Delta = args.delta.parse().map_err(|e: crate::Error| CliError::Usage(e.to_string()))?;

    let g = read_graph(&args.input)?;
    let terminals = read_terminals(&args.terminals)?;
    terminals.validate_subset_of(&g).map_err(CliError::from)?;

    // Stage seeds derived from the run seed.
    let split = split_edges(&g, &terminals, args.ratio, args.seed).map_err(CliError::from)?;
    if split.positives.is_empty() {
        return Err(CliError::Failure("no removable edges".into()));
    }

    let train = &split.train_graph;
    let embedded = match method {
        None => train.clone(),
        Some(method) => {
            let cfg = CoarsenConfig {
                method,
                delta,
                seed: args.seed.wrapping_add(1),
            };
            coarsen(train, &terminals, &cfg).map_err(CliError::from)?.0
        }
    };

    let params = WalkParams::geometric(args.theta, args.window).map_err(CliError::from)?;
    let embedding =
        embed_graph(&embedded, EmbedMode::NetMf(&params), args.dim, None).map_err(CliError::from)?;

    let mut pairs: Vec<(VertexId, VertexId)> = split.positives.clone();
    pairs.extend(split.negatives.iter().copied());
    let mut labels: Vec<u8> = vec![1; split.positives.len()];
    labels.extend(std::iter::repeat_n(0, split.negatives.len()));

    let features = edge_features(&embedding, &pairs, operator).map_err(CliError::from)?;
    let model = train_logreg(&features, &labels, operator, &LogRegConfig::default())
        .map_err(CliError::from)?;
    let scores: Vec<f64> = features.iter().map(|row| model.score(row)).collect();
    let auc = auc_score(&scores, &labels).map_err(CliError::from)?;

    let report = EvalReport {
        auc,
        positives: split.positives.len(),
        negatives: split.negatives.len(),
        seed: args.seed,
        operator: operator.to_string(),
        method: args.method.clone(),
        window: args.window,
        theta: args.theta,
        dim: args.dim,
        ratio: args.ratio,
        train_vertices: train.num_vertices(),
        train_edges: train.num_edges(),
        embedded_vertices: embedded.num_vertices(),
        embedded_edges: embedded.num_edges(),
        final_grad_norm: model.final_grad_norm,
    };
    let mut sink = create_output(&args.report)?;
    serde_json::to_writer_pretty(&mut sink, &report)
        .map_err(|e| CliError::Failure(e.to_string()))?;
    sink.write_all(b"\n")
        .and_then(|_| sink.flush())
        .map_err(|e| CliError::Failure(e.to_string()))?;

    if let Some(pred_path) = &args.predictions {
        let mut sink = create_output(pred_path)?;
        for ((&(u, v), score), &label) in pairs.iter().zip(&scores).zip(&labels) {
            writeln!(sink, "{u}\t{v}\t{score}\t{label}")
                .map_err(|e| CliError::Failure(e.to_string()))?;
        }
        sink.flush().map_err(|e| CliError::Failure(e.to_string()))?;
    }
    if let Some(prefix) = &args.splits_out {
        let write_pairs = |suffix: &str, pairs: &[(VertexId, VertexId)]| -> CliResult<()> {
            let path = PathBuf::from(format!("{}.{suffix}.tsv", prefix.display()));
            let mut sink = create_output(&path)?;
            for &(u, v) in pairs {
                writeln!(sink, "{u}\t{v}").map_err(|e| CliError::Failure(e.to_string()))?;
            }
            sink.flush().map_err(|e| CliError::Failure(e.to_string()))
        };
        write_pairs("positives", &split.positives)?;
        write_pairs("negatives", &split.negatives)?;
    }
    Ok(())
}
