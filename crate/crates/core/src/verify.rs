//! Independent checks of pipeline output and randomized exploration.
//!
//! * Sampled geodesics: a barycentric grid on every maximal cell of a
//!   complex, with arcs between nodes of a common cell weighted by the flat
//!   cell metric. Shortest paths give upper bounds on intrinsic distances.
//! * Random metric spaces from a few seeded generators.
//! * A counterexample hunter that streams generated spaces through a
//!   predicate and keeps hits and near misses with reproduction data.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{toyoda_embed, Branch, EmbedError, EmbeddingResult, SpacelikeComplex};
use crate::form::{associated_form, eigendecompose, AMBIENT_DIM};
use crate::gamma::{cyclic_labelings, gamma_feasible, ComparisonGraph, GammaSettings, GammaStatus};
use crate::metric::{cat0_comparison_all, validate_metric, FiniteMetricSpace, MetricError};
use crate::tolerance::Tolerances;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_RESOLUTION: usize = 8;
/// Attempts allowed to the rejection-sampling generators.
const REJECTION_BUDGET: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("generator {kind} gave up after {attempts} rejected samples")]
    RejectionBudgetExceeded { kind: String, attempts: usize },
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("unknown generator {0:?} (expected euclidean_K, tree, perturbed_tree, general or mixed)")]
    UnknownGenerator(String),
    #[error("resolution must be at least 1")]
    BadResolution,
    #[error("complex has {found} vertices but the metric has {expected} points")]
    SizeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

// ---------------------------------------------------------------------------
// geodesic upper bounds

/// A grid node: barycentric numerators (summing to the resolution) and the
/// maximal cells containing it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleNode {
    pub barycentric: [u32; 5],
    pub cells: Vec<usize>,
    pub position: [f64; AMBIENT_DIM],
}

/// Barycentric sample grid on the maximal cells of a complex. Arcs join every
/// two nodes of a common cell; they are generated on demand.
#[derive(Debug, Clone)]
pub struct SampledComplexGraph {
    pub resolution: usize,
    pub nodes: Vec<SampleNode>,
    /// Node ids per maximal cell.
    pub cell_nodes: Vec<Vec<usize>>,
    signs: [i8; AMBIENT_DIM],
}

fn compositions(total: u32, slots: usize, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if cur.len() + 1 == slots {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for k in 0..=total {
        cur.push(k);
        compositions(total - k, slots, out, cur);
        cur.pop();
    }
}

impl SampledComplexGraph {
    pub fn new(cx: &SpacelikeComplex, resolution: usize) -> Result<Self, VerifyError> {
        if resolution == 0 {
            return Err(VerifyError::BadResolution);
        }
        let res = u32::try_from(resolution).map_err(|_| VerifyError::BadResolution)?;
        let mut index: HashMap<[u32; 5], usize> = HashMap::new();
        let mut nodes: Vec<SampleNode> = Vec::new();
        let mut cell_nodes = Vec::with_capacity(cx.cells.len());
        for (cid, cell) in cx.cells.iter().enumerate() {
            let mut combos = Vec::new();
            compositions(res, cell.len(), &mut combos, &mut Vec::new());
            let mut ids = Vec::with_capacity(combos.len());
            for combo in combos {
                let mut key = [0u32; 5];
                for (&v, &c) in cell.iter().zip(&combo) {
                    key[v] = c;
                }
                let id = *index.entry(key).or_insert_with(|| {
                    let mut position = [0.0; AMBIENT_DIM];
                    for (v, &c) in key.iter().enumerate() {
                        if c > 0 {
                            let w = f64::from(c) / f64::from(res);
                            for (p, x) in position.iter_mut().zip(&cx.vertices[v]) {
                                *p += w * x;
                            }
                        }
                    }
                    nodes.push(SampleNode { barycentric: key, cells: Vec::new(), position });
                    nodes.len() - 1
                });
                nodes[id].cells.push(cid);
                ids.push(id);
            }
            cell_nodes.push(ids);
        }
        Ok(Self { resolution, nodes, cell_nodes, signs: cx.metric_signs })
    }

    /// Node id of vertex `v`, if the vertex lies in the complex.
    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        let r = self.resolution as u32;
        self.nodes.iter().position(|n| n.barycentric[v] == r)
    }

    /// `W` of the difference of two node positions.
    pub fn interval(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (&self.nodes[a].position, &self.nodes[b].position);
        (0..AMBIENT_DIM).map(|k| f64::from(self.signs[k]) * (p[k] - q[k]) * (p[k] - q[k])).sum()
    }

    pub fn arc_weight(&self, a: usize, b: usize) -> f64 {
        self.interval(a, b).max(0.0).sqrt()
    }

    /// All arcs `(a, b)` with `a < b`; a pair shared by several cells appears once.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for ids in &self.cell_nodes {
            for (k, &a) in ids.iter().enumerate() {
                for &b in &ids[k + 1..] {
                    out.push((a.min(b), a.max(b)));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Most negative arc interval (should be nonnegative up to round-off).
    pub fn min_arc_interval(&self) -> f64 {
        self.arcs().iter().map(|&(a, b)| self.interval(a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Dense Dijkstra from one node.
    pub fn shortest_from(&self, source: usize) -> Vec<f64> {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (i, (&d, &fin)) in dist.iter().zip(&done).enumerate() {
                if !fin && d < best {
                    best = d;
                    u = i;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &c in &self.nodes[u].cells {
                for &v in &self.cell_nodes[c] {
                    if !done[v] {
                        let nd = best + self.arc_weight(u, v);
                        if nd < dist[v] {
                            dist[v] = nd;
                        }
                    }
                }
            }
        }
        dist
    }
}

/// Upper bounds on the intrinsic distances between the vertices of a complex.
///
/// In the solid Euclidean branch geodesics are straight segments, so the
/// ambient distances are returned directly.
pub fn geodesic_upper_bounds(cx: &SpacelikeComplex, resolution: usize) -> Result<Vec<Vec<f64>>, VerifyError> {
    let n = cx.vertices.len();
    if cx.solid || cx.branch == Branch::EuclideanFullSimplex {
        return Ok(cx.edge_lengths.clone());
    }
    let g = SampledComplexGraph::new(cx, resolution)?;
    let vertex_ids: Vec<Option<usize>> = (0..n).map(|v| g.vertex_node(v)).collect();
    let mut out = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        out[i][i] = 0.0;
        let Some(src) = vertex_ids[i] else { continue };
        let dist = g.shortest_from(src);
        for j in 0..n {
            if let Some(t) = vertex_ids[j] {
                out[i][j] = dist[t];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub passed: bool,
    pub resolution: usize,
    /// Largest `|edge_length - d| / d`.
    pub max_edge_residual: f64,
    pub worst_edge: [usize; 2],
    /// Edges whose residual exceeds the tolerance.
    pub edge_failures: Vec<[usize; 2]>,
    pub edges_covered: bool,
    /// Smallest `W` over all vertex pairs of included simplices.
    pub min_included_interval: f64,
    pub geodesic_bounds: Vec<Vec<f64>>,
    /// `min (bound - d)` over vertex pairs; negative values mean a shortcut.
    pub min_geodesic_margin: f64,
    pub shortcut_pairs: Vec<[usize; 2]>,
    pub edge_tolerance: f64,
    pub path_tolerance: f64,
}

/// Re-checks a complex against the metric it claims to realize.
pub fn check_complex(
    cx: &SpacelikeComplex,
    space: &FiniteMetricSpace,
    resolution: usize,
    tol: &Tolerances,
) -> Result<VerificationReport, VerifyError> {
    let n = space.len();
    if cx.vertices.len() != n || cx.edge_lengths.len() != n {
        return Err(VerifyError::SizeMismatch { expected: n, found: cx.vertices.len() });
    }
    let path_tol = tol.distance * space.diameter();
    let mut worst = (0.0f64, [0, 1]);
    let mut edge_failures = Vec::new();
    let mut edges_covered = true;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.dist(i, j);
            let r = (cx.edge_lengths[i][j] - d).abs() / d;
            if !(r <= tol.distance) {
                edge_failures.push([i, j]);
            }
            if !(r <= worst.0) {
                worst = (r, [i, j]);
            }
            edges_covered &= cx.contains_edge(i, j);
        }
    }
    let emb = cx.embedding();
    let mut min_interval = f64::INFINITY;
    for f in cx.faces.iter().filter(|f| f.len() == 2) {
        min_interval = min_interval.min(emb.interval(f[0], f[1]));
    }
    let bounds = geodesic_upper_bounds(cx, resolution)?;
    let mut margin = f64::INFINITY;
    let mut shortcuts = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = bounds[i][j] - space.dist(i, j);
            margin = margin.min(m);
            if m < -path_tol {
                shortcuts.push([i, j]);
            }
        }
    }
    Ok(VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        passed: edge_failures.is_empty() && shortcuts.is_empty() && edges_covered && min_interval >= -path_tol * path_tol,
        resolution,
        max_edge_residual: worst.0,
        worst_edge: worst.1,
        edge_failures,
        edges_covered,
        min_included_interval: min_interval,
        geodesic_bounds: bounds,
        min_geodesic_margin: margin,
        shortcut_pairs: shortcuts,
        edge_tolerance: tol.distance,
        path_tolerance: path_tol,
    })
}

/// Checks that an embedding result realizes its input metric on edges and
/// that no sampled path undercuts a metric distance.
pub fn check_distance_preservation(
    result: &EmbeddingResult,
    resolution: usize,
    tol: &Tolerances,
) -> Result<VerificationReport, VerifyError> {
    check_complex(&result.complex, &result.space, resolution, tol)
}

// ---------------------------------------------------------------------------
// random metric spaces

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    /// Uniform points in the unit `k`-cube.
    Euclidean { k: usize },
    /// Points on a random weighted tree.
    Tree,
    /// Tree distances times independent factors in `[1, 1 + delta]`.
    PerturbedTree { delta: f64 },
    /// Rejection-sampled symmetric matrices satisfying the triangle inequality.
    General,
    /// One of the generators above, chosen per sample.
    Mixed,
}

pub const DEFAULT_PERTURBATION: f64 = 0.05;

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Euclidean { k } => write!(f, "euclidean_{k}"),
            MetricKind::Tree => write!(f, "tree"),
            MetricKind::PerturbedTree { delta } => write!(f, "perturbed_tree({delta})"),
            MetricKind::General => write!(f, "general"),
            MetricKind::Mixed => write!(f, "mixed"),
        }
    }
}

impl FromStr for MetricKind {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, VerifyError> {
        let bad = || VerifyError::UnknownGenerator(s.to_string());
        match s {
            "tree" => Ok(MetricKind::Tree),
            "perturbed_tree" => Ok(MetricKind::PerturbedTree { delta: DEFAULT_PERTURBATION }),
            "general" => Ok(MetricKind::General),
            "mixed" => Ok(MetricKind::Mixed),
            _ => {
                if let Some(k) = s.strip_prefix("euclidean_") {
                    let k: usize = k.parse().map_err(|_| bad())?;
                    if k == 0 {
                        return Err(bad());
                    }
                    Ok(MetricKind::Euclidean { k })
                } else if let Some(d) = s.strip_prefix("perturbed_tree_") {
                    let delta: f64 = d.parse().map_err(|_| bad())?;
                    if !(delta >= 0.0 && delta.is_finite()) {
                        return Err(bad());
                    }
                    Ok(MetricKind::PerturbedTree { delta })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// Generates an `n`-point metric space, deterministically in `seed`.
pub fn random_metric(kind: MetricKind, n: usize, seed: u64) -> Result<FiniteMetricSpace, VerifyError> {
    if n < 2 {
        return Err(VerifyError::TooFewPoints(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_metric(kind, n, &mut rng)
}

fn sample_metric(kind: MetricKind, n: usize, rng: &mut ChaCha8Rng) -> Result<FiniteMetricSpace, VerifyError> {
    match kind {
        MetricKind::Euclidean { k } => {
            for _ in 0..REJECTION_BUDGET {
                let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.gen::<f64>()).collect()).collect();
                let d = euclidean_distances(&pts);
                if let Ok(space) = validate_metric(&d) {
                    return Ok(space);
                }
            }
            Err(VerifyError::RejectionBudgetExceeded { kind: kind.to_string(), attempts: REJECTION_BUDGET })
        }
        MetricKind::Tree => tree_metric(n, false, rng),
        MetricKind::PerturbedTree { delta } => {
            for _ in 0..REJECTION_BUDGET {
                let base = tree_metric(n, true, rng)?.to_rows();
                let mut d = base.clone();
                for i in 0..n {
                    for j in (i + 1)..n {
                        let f = 1.0 + delta * rng.gen::<f64>();
                        d[i][j] = base[i][j] * f;
                        d[j][i] = d[i][j];
                    }
                }
                if let Ok(space) = validate_metric(&d) {
                    return Ok(space);
                }
            }
            Err(VerifyError::RejectionBudgetExceeded { kind: kind.to_string(), attempts: REJECTION_BUDGET })
        }
        MetricKind::General => {
            for _ in 0..REJECTION_BUDGET {
                let mut d = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in (i + 1)..n {
                        d[i][j] = rng.gen_range(0.05..1.0);
                        d[j][i] = d[i][j];
                    }
                }
                if let Ok(space) = validate_metric(&d) {
                    return Ok(space);
                }
            }
            Err(VerifyError::RejectionBudgetExceeded { kind: kind.to_string(), attempts: REJECTION_BUDGET })
        }
        MetricKind::Mixed => {
            let kind = match rng.gen_range(0..6) {
                0 => MetricKind::Euclidean { k: 2 },
                1 => MetricKind::Euclidean { k: 3 },
                2 => MetricKind::Euclidean { k: 4 },
                3 => MetricKind::Tree,
                4 => MetricKind::PerturbedTree { delta: DEFAULT_PERTURBATION },
                _ => MetricKind::General,
            };
            sample_metric(kind, n, rng)
        }
    }
}

pub fn euclidean_distances(pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    pts.iter()
        .map(|a| pts.iter().map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()).collect())
        .collect()
}

/// Points on a random weighted tree: a random recursive tree on up to `n + 2`
/// nodes with edge weights in `[0.2, 1.5]`; each point sits on a random edge,
/// at its far node with probability 0.4 and otherwise strictly inside.
/// Points on a random weighted tree. With `pendant`, every point hangs off its
/// tree position on an edge of its own, so no point lies on the geodesic
/// between two others and every triangle inequality is strict.
fn tree_metric(n: usize, pendant: bool, rng: &mut ChaCha8Rng) -> Result<FiniteMetricSpace, VerifyError> {
    for _ in 0..REJECTION_BUDGET {
        let m = rng.gen_range(2..=n + 2);
        let parent: Vec<usize> = (0..m).map(|v| if v == 0 { 0 } else { rng.gen_range(0..v) }).collect();
        let weight: Vec<f64> = (0..m).map(|v| if v == 0 { 0.0 } else { rng.gen_range(0.2..1.5) }).collect();
        // node-to-node distances through the common ancestor
        let mut depth = vec![0.0; m];
        let mut ancestors: Vec<Vec<usize>> = vec![vec![0]; m];
        for v in 1..m {
            depth[v] = depth[parent[v]] + weight[v];
            let mut a = ancestors[parent[v]].clone();
            a.push(v);
            ancestors[v] = a;
        }
        let node_dist = |a: usize, b: usize| {
            let lca = ancestors[a].iter().zip(&ancestors[b]).take_while(|(x, y)| x == y).last().map(|(x, _)| *x);
            depth[a] + depth[b] - 2.0 * depth[lca.expect("common root")]
        };
        // point = (edge to node v from its parent, offset from the parent)
        let pts: Vec<(usize, f64)> = (0..n)
            .map(|_| {
                let v = rng.gen_range(1..m);
                let t = if rng.gen_bool(0.4) { weight[v] } else { weight[v] * rng.gen_range(0.05..0.95) };
                (v, t)
            })
            .collect();
        let dist = |a: (usize, f64), b: (usize, f64)| {
            if a.0 == b.0 {
                return (a.1 - b.1).abs();
            }
            let ends = |p: (usize, f64)| [(parent[p.0], p.1), (p.0, weight[p.0] - p.1)];
            let mut best = f64::INFINITY;
            for (ea, la) in ends(a) {
                for (eb, lb) in ends(b) {
                    best = best.min(la + node_dist(ea, eb) + lb);
                }
            }
            best
        };
        let hang: Vec<f64> = (0..n).map(|_| if pendant { rng.gen_range(0.2..0.8) } else { 0.0 }).collect();
        let d: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { hang[i] + dist(pts[i], pts[j]) + hang[j] }).collect())
            .collect();
        let distinct = (0..n).all(|i| ((i + 1)..n).all(|j| d[i][j] > 1e-3));
        if !distinct {
            continue;
        }
        if let Ok(space) = validate_metric(&symmetrized(d)) {
            return Ok(space);
        }
    }
    Err(VerifyError::RejectionBudgetExceeded { kind: "tree".into(), attempts: REJECTION_BUDGET })
}

fn symmetrized(mut d: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = d.len();
    for i in 0..n {
        d[i][i] = 0.0;
        for j in (i + 1)..n {
            d[j][i] = d[i][j];
        }
    }
    d
}

// ---------------------------------------------------------------------------
// counterexample hunting

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HuntPredicate {
    /// Passes the comparison yet the associated form has at least two negative eigenvalues.
    NegativeIndexAtLeastTwo,
    /// Passes the comparison yet some C_5 labeling is infeasible.
    C4PassesC5Infeasible,
    /// Passes the comparison yet some octahedral labeling of 6 points is infeasible.
    C4PassesO3Infeasible,
    /// Passes the comparison yet the 5-point embedding pipeline reports an anomaly.
    EmbeddingAnomaly,
}

impl HuntPredicate {
    pub fn min_points(self) -> usize {
        match self {
            HuntPredicate::NegativeIndexAtLeastTwo => 4,
            HuntPredicate::C4PassesC5Infeasible | HuntPredicate::EmbeddingAnomaly => 5,
            HuntPredicate::C4PassesO3Infeasible => 6,
        }
    }
}

fn default_near_misses() -> usize {
    10
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntConfig {
    pub generator: MetricKind,
    pub points: usize,
    pub budget: usize,
    pub seed: u64,
    pub predicate: HuntPredicate,
    #[serde(default = "default_near_misses")]
    pub near_misses: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub gamma: GammaSettings,
}

impl HuntConfig {
    pub fn new(generator: MetricKind, points: usize, budget: usize, seed: u64, predicate: HuntPredicate) -> Self {
        Self {
            generator,
            points,
            budget,
            seed,
            predicate,
            near_misses: default_near_misses(),
            workers: default_workers(),
            tolerances: Tolerances::default(),
            gamma: GammaSettings::default(),
        }
    }
}

/// A sampled space with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntRecord {
    pub index: usize,
    /// Seed to pass to `random_metric` with the configured generator.
    pub sample_seed: u64,
    /// Distance to a hit, normalized by the largest squared distance; `<= 0` for hits.
    pub margin: f64,
    pub detail: String,
    pub distances: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntReport {
    pub schema_version: u32,
    pub config: HuntConfig,
    pub samples: usize,
    /// Samples meeting the predicate's precondition (comparison passes).
    pub applicable: usize,
    pub undecided: usize,
    pub hits: Vec<HuntRecord>,
    pub near_misses: Vec<HuntRecord>,
    pub errors: Vec<(usize, String)>,
}

/// Per-sample seed: the first word of the ChaCha stream `index` under the hunt seed.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Sample index, its seed, and the evaluation (None when not applicable).
type SampleResult = (usize, u64, Result<Option<(Outcome, FiniteMetricSpace)>, String>);

enum Outcome {
    NotApplicable,
    Evaluated { hit: bool, undecided: bool, margin: f64, detail: String },
}

fn max_sq(space: &FiniteMetricSpace) -> f64 {
    let d = space.diameter();
    d * d
}

fn evaluate(cfg: &HuntConfig, space: &FiniteMetricSpace) -> Result<Outcome, String> {
    let tol = &cfg.tolerances;
    if !cat0_comparison_all(space, tol).holds {
        return Ok(Outcome::NotApplicable);
    }
    match cfg.predicate {
        HuntPredicate::NegativeIndexAtLeastTwo => {
            let form = associated_form(space, space.len() - 1).map_err(|e| e.to_string())?;
            let spec = eigendecompose(&form, tol).map_err(|e| e.to_string())?;
            let ev = &spec.eigenvalues;
            let second = ev.get(ev.len().wrapping_sub(2)).copied().unwrap_or(f64::INFINITY);
            let hit = spec.signature.negative >= 2;
            Ok(Outcome::Evaluated {
                hit,
                undecided: false,
                margin: if hit { second.min(0.0) / max_sq(space) } else { second.max(0.0) / max_sq(space) },
                detail: format!(
                    "signature (+{}, 0x{}, -{}), second smallest eigenvalue {second:e}",
                    spec.signature.positive, spec.signature.zero, spec.signature.negative
                ),
            })
        }
        HuntPredicate::C4PassesC5Infeasible => {
            let graph = ComparisonGraph::cycle(5).map_err(|e| e.to_string())?;
            let mut instances = Vec::new();
            for verts in subsets5(space.len()) {
                instances.extend(cyclic_labelings(&verts));
            }
            gamma_outcome(cfg, space, &graph, instances)
        }
        HuntPredicate::C4PassesO3Infeasible => {
            let graph = ComparisonGraph::octahedron();
            let mut instances = Vec::new();
            for verts in subsets(space.len(), 6) {
                instances.extend(antipodal_labelings(&verts));
            }
            gamma_outcome(cfg, space, &graph, instances)
        }
        HuntPredicate::EmbeddingAnomaly => match toyoda_embed(space, tol) {
            Ok(r) => Ok(Outcome::Evaluated {
                hit: false,
                undecided: false,
                margin: r.diagnostics.eigenvalues.iter().fold(f64::INFINITY, |m, &l| m.min(l.abs())) / max_sq(space),
                detail: format!("{:?}, {} lower facets", r.complex.branch, r.complex.facets.len()),
            }),
            Err(e @ (EmbedError::TooManyNegativeEigenvalues(_) | EmbedError::StratumA0(_))) => {
                Ok(Outcome::Evaluated { hit: true, undecided: false, margin: 0.0, detail: e.to_string() })
            }
            Err(e) => Err(e.to_string()),
        },
    }
}

fn gamma_outcome(
    cfg: &HuntConfig,
    space: &FiniteMetricSpace,
    graph: &ComparisonGraph,
    instances: Vec<Vec<usize>>,
) -> Result<Outcome, String> {
    let mut worst = (f64::NEG_INFINITY, Vec::new());
    let mut infeasible = Vec::new();
    let mut undecided = 0;
    for order in instances {
        let d: Vec<Vec<f64>> = order.iter().map(|&a| order.iter().map(|&b| space.dist(a, b)).collect()).collect();
        let w = gamma_feasible(graph, &d, &cfg.gamma).map_err(|e| e.to_string())?;
        match w.status {
            GammaStatus::Infeasible => infeasible.push(order.clone()),
            GammaStatus::Undecided => undecided += 1,
            GammaStatus::Feasible => {}
        }
        if w.relative_residual > worst.0 {
            worst = (w.relative_residual, order);
        }
    }
    let hit = !infeasible.is_empty();
    Ok(Outcome::Evaluated {
        hit,
        undecided: undecided > 0,
        margin: cfg.gamma.infeas_floor - worst.0,
        detail: if hit {
            format!("infeasible orders {infeasible:?}")
        } else {
            format!("worst relative residual {:e} at order {:?}; {undecided} undecided", worst.0, worst.1)
        },
    })
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|&i| mask & (1 << i) != 0).collect());
        }
    }
    out.sort();
    out
}

fn subsets5(n: usize) -> Vec<Vec<usize>> {
    subsets(n, 5)
}

/// The 15 ways to split 6 points into antipodal pairs, laid out so that the
/// pairs occupy octahedron slots `(0,1)`, `(2,3)`, `(4,5)`.
pub fn antipodal_labelings(verts: &[usize]) -> Vec<Vec<usize>> {
    assert_eq!(verts.len(), 6, "octahedral labelings need 6 points");
    let mut out = Vec::new();
    let a = verts[0];
    for i in 1..6 {
        let rest: Vec<usize> = (1..6).filter(|&k| k != i).map(|k| verts[k]).collect();
        let b = rest[0];
        for j in 1..4 {
            let last: Vec<usize> = (1..4).filter(|&k| k != j).map(|k| rest[k]).collect();
            out.push(vec![a, verts[i], b, rest[j], last[0], last[1]]);
        }
    }
    out
}

/// Streams `budget` generated spaces through the predicate.
///
/// Sample `i` is generated from `sample_seed(seed, i)` alone, so sharding the
/// indices across workers does not change any record; the merged report is
/// sorted by index and therefore identical for every worker count.
pub fn hunt_counterexamples(cfg: &HuntConfig) -> HuntReport {
    let mut report = HuntReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        samples: 0,
        applicable: 0,
        undecided: 0,
        hits: Vec::new(),
        near_misses: Vec::new(),
        errors: Vec::new(),
    };
    if cfg.budget == 0 {
        return report;
    }
    if cfg.points < cfg.predicate.min_points() {
        report.errors.push((0, format!("predicate {:?} needs at least {} points", cfg.predicate, cfg.predicate.min_points())));
        return report;
    }
    let workers = cfg.workers.clamp(1, cfg.budget);
    let shards: Vec<Vec<SampleResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..cfg.budget)
                        .step_by(workers)
                        .map(|i| {
                            let seed = sample_seed(cfg.seed, i);
                            let res = random_metric(cfg.generator, cfg.points, seed)
                                .map_err(|e| e.to_string())
                                .and_then(|space| evaluate(cfg, &space).map(|o| Some((o, space))));
                            (i, seed, res)
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("hunt worker panicked")).collect()
    });
    let mut all: Vec<_> = shards.into_iter().flatten().collect();
    all.sort_by_key(|(i, _, _)| *i);

    let mut candidates = Vec::new();
    for (index, seed, res) in all {
        report.samples += 1;
        match res {
            Err(e) => report.errors.push((index, e)),
            Ok(None) | Ok(Some((Outcome::NotApplicable, _))) => {}
            Ok(Some((Outcome::Evaluated { hit, undecided, margin, detail }, space))) => {
                report.applicable += 1;
                if undecided {
                    report.undecided += 1;
                }
                let rec = HuntRecord { index, sample_seed: seed, margin, detail, distances: space.to_rows() };
                if hit {
                    report.hits.push(rec);
                } else {
                    candidates.push(rec);
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.margin.total_cmp(&b.margin).then(a.index.cmp(&b.index)));
    candidates.truncate(cfg.near_misses);
    report.near_misses = candidates;
    report
}
