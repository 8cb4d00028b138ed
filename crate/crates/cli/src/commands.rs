//! Subcommand definitions and dispatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cat5_core::classify::{hull_shape, structural_check, ArrayJson, HullShape};
use cat5_core::metric::QuadCheckResult;
use cat5_core::verify::DEFAULT_RESOLUTION;
use cat5_core::{
    builtin_graph, cat0_comparison_all, check_complex, classify, hunt_counterexamples, toyoda_embed, Array5R3,
    ClassifyError, ComparisonGraph, ComparisonReport, EmbedError, EmbeddingResult, GammaError, GammaInstance,
    GammaSettings, GammaStatus, GramWitness, HuntConfig, HuntPredicate, HuntReport, MetricKind, OrientationProfile,
    Point3, SpacelikeComplex, Tolerances, VerificationReport, VerifyError,
};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::input::{parse_input, read_json, InputFormat, ParseError};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Check the CAT(0) comparison on finite metric spaces, build explicit
/// CAT(0) embeddings of 5-point spaces, and test graph comparisons.
#[derive(Debug, Parser)]
#[command(name = "cat5", version, about, long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Comparison slack allowance, relative to the space diameter.
    #[arg(long, global = true, value_name = "REL", value_parser = positive)]
    pub tol_compare: Option<f64>,
    /// Eigenvalues below this (relative to the spectral radius, floor 1) count as zero.
    #[arg(long, global = true, value_name = "REL", value_parser = positive)]
    pub tol_zero: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Distance matrix: JSON `{"n": .., "d": [[..]]}` or CSV.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Input encoding; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the comparison on every quadruple and pair-splitting.
    Check(InputArgs),
    /// Embed a 5-point space into a CAT(0) simplicial complex.
    Embed {
        #[command(flatten)]
        input: InputArgs,
        /// Also write the bare complex (the input format of `verify`).
        #[arg(long, value_name = "PATH")]
        complex: Option<PathBuf>,
    },
    /// Classify a 5-point array in R^3 by facet orientations.
    Classify {
        /// Array JSON: `{"points": [[x, y, z], ...]}`.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Perturb every coordinate by up to this fraction of the array's
        /// diameter before classifying (seeded by --seed).
        #[arg(long, value_name = "REL", value_parser = positive)]
        jitter: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decide a graph comparison by Gram-matrix feasibility.
    Gamma {
        /// Instance JSON `{"graph": .., "d": ..}`, or a metric when --graph is given.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        /// Built-in graph name (C_n, O_3, tripod, star_k, 4-tree) or a graph JSON file.
        #[arg(long)]
        graph: Option<String>,
        /// Point assigned to each graph vertex, comma-separated (default 0, 1, ...).
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<usize>>,
        #[arg(long)]
        max_iterations: Option<usize>,
    },
    /// Re-check a complex against the metric it should realize.
    Verify {
        /// Complex JSON written by `embed --complex`.
        #[arg(long, value_name = "PATH")]
        complex: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        /// Barycentric grid subdivision level for geodesic upper bounds.
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
    },
    /// Search random spaces for counterexample candidates.
    Hunt {
        /// Hunt configuration JSON; the flags below override its fields.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// euclidean_K, tree, perturbed_tree[_DELTA], general or mixed.
        #[arg(long)]
        generator: Option<String>,
        #[arg(long)]
        points: Option<usize>,
        /// negative_index_at_least_two, c4_passes_c5_infeasible,
        /// c4_passes_o3_infeasible or embedding_anomaly.
        #[arg(long)]
        predicate: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Embed(EmbedError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub const EXIT_CODE: u8 = 2;
}

/// Mathematical outcome of a run, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// The property holds / the instance is feasible / the run succeeded.
    Holds,
    /// The property fails / the instance is infeasible / a hit was found.
    Fails,
    Undecided,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Holds => 0,
            Outcome::Fails => 1,
            Outcome::Undecided => 3,
        }
    }
}

/// Envelope of every report: what ran, with which tolerances, and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub command: String,
    pub outcome: Outcome,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_settings: Option<GammaSettings>,
    pub result: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EmbedOutcome {
    Embedded(Box<EmbeddingResult>),
    ComparisonFailed { witness: QuadCheckResult, comparison: ComparisonReport },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub points: Vec<Point3>,
    pub profile: OrientationProfile,
    pub hull: HullShape,
    pub structural_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub graph: ComparisonGraph,
    /// Point assigned to each graph vertex.
    pub labels: Vec<usize>,
    /// Distances between the labeled points, indexed by graph vertex.
    pub d: Vec<Vec<f64>>,
    pub witness: GramWitness,
}

impl Cli {
    fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(v) = self.tol_compare {
            tol.compare = v;
        }
        if let Some(v) = self.tol_zero {
            tol.zero = v;
        }
        tol
    }
}

fn report<T>(command: &str, outcome: Outcome, tolerances: Tolerances, result: T) -> Report<T> {
    Report { schema_version: REPORT_SCHEMA_VERSION, command: command.into(), outcome, tolerances, gamma_settings: None, result }
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

/// Runs a parsed command line, emitting its report. Returns the exit code.
pub fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    let tol = cli.tolerances();
    let (text, outcome) = match &cli.command {
        Command::Check(input) => {
            let space = parse_input(&input.input, input.format)?;
            log::info!("checking {} quadruples", binomial4(space.len()));
            let r = cat0_comparison_all(&space, &tol);
            if let (false, Some(w)) = (r.holds, r.worst) {
                log::warn!("comparison fails: witness {:?}, slack {:e}", w.labeling, w.slack);
            }
            let outcome = if r.holds { Outcome::Holds } else { Outcome::Fails };
            (to_json(&report("check", outcome, tol, r)), outcome)
        }
        Command::Embed { input, complex } => {
            let space = parse_input(&input.input, input.format)?;
            let (outcome, result) = match toyoda_embed(&space, &tol) {
                Ok(r) => {
                    for w in &r.diagnostics.warnings {
                        log::warn!("{w}");
                    }
                    if let Some(path) = complex {
                        write_file(path, &to_json(&r.complex))?;
                        log::info!("complex written to {}", path.display());
                    }
                    (Outcome::Holds, EmbedOutcome::Embedded(Box::new(r)))
                }
                Err(EmbedError::ComparisonFailed { witness, report }) => {
                    log::warn!("comparison fails: witness {:?}, slack {:e}", witness.labeling, witness.slack);
                    (Outcome::Fails, EmbedOutcome::ComparisonFailed { witness, comparison: *report })
                }
                Err(e) => return Err(CliError::Embed(e)),
            };
            (to_json(&report("embed", outcome, tol, result)), outcome)
        }
        Command::Classify { input, jitter, seed } => {
            let raw: ArrayJson = read_json(input)?;
            let n = raw.points.len();
            let mut pts: [Point3; 5] = raw.points.try_into().map_err(|_| ClassifyError::WrongPointCount(n))?;
            if let Some(eps) = jitter {
                jitter_points(&mut pts, *eps, *seed);
            }
            let arr = Array5R3::new(pts, &tol)?;
            let profile = classify(&arr)?;
            let ok = structural_check(&arr, &profile);
            let outcome = if ok { Outcome::Holds } else { Outcome::Fails };
            let result = ClassifyReport { points: pts.to_vec(), hull: hull_shape(&arr), structural_check: ok, profile };
            (to_json(&report("classify", outcome, tol, result)), outcome)
        }
        Command::Gamma { input, format, graph, labels, max_iterations } => {
            let mut settings = GammaSettings::default();
            if let Some(m) = max_iterations {
                settings.max_iterations = *m;
            }
            let result = run_gamma(input, *format, graph.as_deref(), labels.as_deref(), &settings)?;
            let outcome = match result.witness.status {
                GammaStatus::Feasible => Outcome::Holds,
                GammaStatus::Infeasible => Outcome::Fails,
                GammaStatus::Undecided => Outcome::Undecided,
            };
            let mut r = report("gamma", outcome, tol, result);
            r.gamma_settings = Some(settings);
            (to_json(&r), outcome)
        }
        Command::Verify { complex, input, resolution } => {
            let space = parse_input(&input.input, input.format)?;
            let cx: SpacelikeComplex = read_json(complex)?;
            let r: VerificationReport = check_complex(&cx, &space, *resolution, &tol)?;
            for e in &r.edge_failures {
                log::warn!("edge {}-{} does not match the metric", e[0], e[1]);
            }
            let outcome = if r.passed { Outcome::Holds } else { Outcome::Fails };
            (to_json(&report("verify", outcome, tol, r)), outcome)
        }
        Command::Hunt { input, generator, points, predicate, seed, budget, workers } => {
            let mut cfg = match input {
                Some(path) => read_json::<HuntConfig>(path)?,
                None => {
                    let (Some(g), Some(p)) = (generator, predicate) else {
                        return Err(CliError::Usage("hunt needs --input or both --generator and --predicate".into()));
                    };
                    let kind: MetricKind = g.parse()?;
                    let pred = parse_predicate(p)?;
                    HuntConfig::new(kind, points.unwrap_or(pred.min_points()), 1000, 0, pred)
                }
            };
            if input.is_some() {
                if let Some(g) = generator {
                    cfg.generator = g.parse()?;
                }
                if let Some(p) = predicate {
                    cfg.predicate = parse_predicate(p)?;
                }
                if let Some(n) = points {
                    cfg.points = *n;
                }
            }
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            if let Some(b) = budget {
                cfg.budget = *b;
            }
            if let Some(w) = workers {
                cfg.workers = (*w).max(1);
            }
            if cli.tol_compare.is_some() || cli.tol_zero.is_some() {
                cfg.tolerances = tol;
            }
            log::info!("hunting: {} samples of {} points from {}", cfg.budget, cfg.points, cfg.generator);
            let r: HuntReport = hunt_counterexamples(&cfg);
            let outcome = if r.hits.is_empty() { Outcome::Holds } else { Outcome::Fails };
            let mut rep = report("hunt", outcome, cfg.tolerances, r);
            rep.gamma_settings = Some(cfg.gamma);
            (to_json(&rep), outcome)
        }
    };
    match &cli.out {
        Some(path) => write_file(path, &text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })?;
        }
    }
    Ok(outcome.exit_code())
}

fn binomial4(n: usize) -> usize {
    if n < 4 {
        0
    } else {
        n * (n - 1) * (n - 2) * (n - 3) / 24
    }
}

fn parse_predicate(s: &str) -> Result<HuntPredicate, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::Usage(format!("unknown hunt predicate {s:?}")))
}

fn jitter_points(pts: &mut [Point3; 5], eps: f64, seed: u64) {
    let mut diameter = 0.0f64;
    for a in pts.iter() {
        for b in pts.iter() {
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            diameter = diameter.max(d);
        }
    }
    let amp = eps * diameter.max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in pts.iter_mut() {
        for x in p.iter_mut() {
            *x += amp * rng.gen_range(-1.0..=1.0);
        }
    }
}

fn load_graph(spec: &str) -> Result<ComparisonGraph, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        Ok(read_json(path)?)
    } else {
        Ok(builtin_graph(spec, None)?)
    }
}

fn run_gamma(
    input: &Path,
    format: Option<InputFormat>,
    graph: Option<&str>,
    labels: Option<&[usize]>,
    settings: &GammaSettings,
) -> Result<GammaReport, CliError> {
    let (graph, labels, d) = match graph {
        None => {
            if labels.is_some() {
                return Err(CliError::Usage("--labels needs --graph and a metric input".into()));
            }
            let inst: GammaInstance = read_json(input)?;
            let labels = (0..inst.graph.n_vertices()).collect();
            (inst.graph, labels, inst.d)
        }
        Some(spec) => {
            let graph = load_graph(spec)?;
            let space = parse_input(input, format)?;
            let k = graph.n_vertices();
            let labels: Vec<usize> = match labels {
                Some(l) => l.to_vec(),
                None if space.len() == k => (0..k).collect(),
                None => {
                    return Err(CliError::Usage(format!(
                        "graph has {k} vertices but the space has {} points; pass --labels",
                        space.len()
                    )))
                }
            };
            let distinct = labels.iter().enumerate().all(|(a, x)| labels[..a].iter().all(|y| y != x));
            if labels.len() != k || !distinct || labels.iter().any(|&i| i >= space.len()) {
                return Err(CliError::Usage(format!(
                    "--labels must name {k} distinct points below {}",
                    space.len()
                )));
            }
            let d = labels.iter().map(|&i| labels.iter().map(|&j| space.dist(i, j)).collect()).collect();
            (graph, labels, d)
        }
    };
    let witness = cat5_core::gamma_feasible(&graph, &d, settings)?;
    log::info!("{graph}: {:?} after {} iterations", witness.status, witness.iterations);
    Ok(GammaReport { graph, labels, d, witness })
}
