//! Graph comparison (Γ-comparison) as a semidefinite feasibility problem.
//!
//! Labeled points `x_0..x_{n-1}` satisfy the Γ-comparison when there are
//! model points `y_i` in a Hilbert space with `|y_i - y_j| ≤ d(x_i, x_j)` for
//! every edge of Γ and `|y_i - y_j| ≥ d(x_i, x_j)` for every non-edge. Only
//! inner products matter, so the unknown is an `n×n` Gram matrix `G ⪰ 0`, and
//! each pair contributes one halfspace on
//! `sd(i, j) = G[i][i] - 2 G[i][j] + G[j][j]`.
//!
//! The solver runs Dykstra's alternating projections over the PSD cone and
//! the pair halfspaces. It is a heuristic: "infeasible" means the residual
//! settled above a floor, not that a dual certificate was found, and runs
//! that neither converge nor settle are reported as undecided.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{symmetric_eigen, EigenError};
use crate::linalg::Matrix;
use crate::metric::{quad_comparison, ComparisonReport, FiniteMetricSpace, Labeling};
use crate::metric::cat0_comparison_all;
use crate::tolerance::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GammaError {
    #[error("unknown graph {0:?} (edge lists for other graphs must be supplied explicitly)")]
    UnknownGraph(String),
    #[error("graph {name:?} needs a size parameter of at least {min}")]
    BadParameter { name: String, min: usize },
    #[error("invalid graph: {0}")]
    BadGraph(String),
    #[error("invalid distances: {0}")]
    BadDistances(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// A simple undirected graph on the vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct ComparisonGraph {
    n: usize,
    adjacency: Vec<Vec<bool>>,
    name: Option<String>,
}

/// Serialized graph: `{"n": 4, "edges": [[0, 1], ...], "name": "C_4"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl TryFrom<GraphJson> for ComparisonGraph {
    type Error = GammaError;

    fn try_from(raw: GraphJson) -> Result<Self, GammaError> {
        ComparisonGraph::from_edges(raw.n, &raw.edges, raw.name)
    }
}

impl From<ComparisonGraph> for GraphJson {
    fn from(g: ComparisonGraph) -> Self {
        GraphJson { n: g.n, edges: g.edges(), name: g.name }
    }
}

impl ComparisonGraph {
    pub fn from_edges(n: usize, edges: &[[usize; 2]], name: Option<String>) -> Result<Self, GammaError> {
        if n < 2 {
            return Err(GammaError::BadGraph(format!("needs at least 2 vertices, got {n}")));
        }
        let mut adjacency = vec![vec![false; n]; n];
        for &[i, j] in edges {
            if i >= n || j >= n {
                return Err(GammaError::BadGraph(format!("edge [{i}, {j}] has a vertex outside 0..{n}")));
            }
            if i == j {
                return Err(GammaError::BadGraph(format!("self-loop at vertex {i}")));
            }
            adjacency[i][j] = true;
            adjacency[j][i] = true;
        }
        Ok(Self { n, adjacency, name })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    /// Edges `[i, j]` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        self.pairs().filter(|&[i, j]| self.adjacency[i][j]).collect()
    }

    /// Non-adjacent pairs `[i, j]` with `i < j`.
    pub fn non_edges(&self) -> Vec<[usize; 2]> {
        self.pairs().filter(|&[i, j]| !self.adjacency[i][j]).collect()
    }

    fn pairs(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| [i, j]))
    }

    /// The cycle `0 - 1 - ... - (n-1) - 0`.
    pub fn cycle(n: usize) -> Result<Self, GammaError> {
        if n < 3 {
            return Err(GammaError::BadParameter { name: "C_n".into(), min: 3 });
        }
        let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
        Self::from_edges(n, &edges, Some(format!("C_{n}")))
    }

    /// Octahedron graph: antipodal pairs `(0,1)`, `(2,3)`, `(4,5)` are the only non-edges.
    pub fn octahedron() -> Self {
        let edges: Vec<[usize; 2]> =
            (0..6).flat_map(|i| ((i + 1)..6).map(move |j| [i, j])).filter(|&[i, j]| !(i % 2 == 0 && j == i + 1)).collect();
        Self::from_edges(6, &edges, Some("O_3".into())).expect("valid octahedron")
    }

    /// Star with center `0` and leaves `1..=k`.
    pub fn star(k: usize) -> Result<Self, GammaError> {
        if k < 1 {
            return Err(GammaError::BadParameter { name: "star_k".into(), min: 1 });
        }
        let edges: Vec<[usize; 2]> = (1..=k).map(|leaf| [0, leaf]).collect();
        Self::from_edges(k + 1, &edges, Some(format!("star_{k}")))
    }
}

impl fmt::Display for ComparisonGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name.as_deref().unwrap_or("graph"))?;
        write!(f, " on {} vertices, edges {:?}", self.n, self.edges())
    }
}

/// Looks up a named graph.
///
/// Recognized names: `C_n` / `Cn` / `cycle` (size from the name or `param`),
/// `O_3` / `O3` / `octahedron`, `tripod` / `3-tree`, `star_k` / `star`
/// (`k` from the name or `param`) and `4-tree`. Other trees must be given as
/// explicit edge lists.
pub fn builtin_graph(name: &str, param: Option<usize>) -> Result<ComparisonGraph, GammaError> {
    let key = name.trim().to_ascii_lowercase();
    let unknown = || GammaError::UnknownGraph(name.to_string());
    let size_from = |rest: &str| -> Result<Option<usize>, GammaError> {
        let rest = rest.trim_start_matches('_');
        if rest.is_empty() {
            Ok(param)
        } else {
            rest.parse().map(Some).map_err(|_| unknown())
        }
    };
    match key.as_str() {
        "o_3" | "o3" | "octahedron" => return Ok(ComparisonGraph::octahedron()),
        "tripod" | "3-tree" => return named(ComparisonGraph::star(3)?, "tripod"),
        "4-tree" => return named(ComparisonGraph::star(4)?, "4-tree"),
        "cycle" => {
            return ComparisonGraph::cycle(param.ok_or(GammaError::BadParameter { name: name.into(), min: 3 })?)
        }
        _ => {}
    }
    if let Some(rest) = key.strip_prefix("star") {
        let k = size_from(rest)?.ok_or(GammaError::BadParameter { name: name.into(), min: 1 })?;
        return ComparisonGraph::star(k);
    }
    if let Some(rest) = key.strip_prefix('c') {
        let k = size_from(rest)?.ok_or(GammaError::BadParameter { name: name.into(), min: 3 })?;
        return ComparisonGraph::cycle(k);
    }
    Err(unknown())
}

fn named(mut g: ComparisonGraph, name: &str) -> Result<ComparisonGraph, GammaError> {
    g.name = Some(name.to_string());
    Ok(g)
}

/// A graph with labeled distances: `{"graph": {...}, "d": [[...], ...]}`,
/// where `d[i][j]` is the distance between the points labeled `i` and `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaInstance {
    pub graph: ComparisonGraph,
    pub d: Vec<Vec<f64>>,
}

impl GammaInstance {
    pub fn solve(&self, settings: &GammaSettings) -> Result<GramWitness, GammaError> {
        gamma_feasible(&self.graph, &self.d, settings)
    }
}

/// Solver thresholds. Tolerances are relative to the largest squared distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSettings {
    pub feas_tol: f64,
    pub infeas_floor: f64,
    /// Iterations over which the residual must hold steady before declaring infeasibility.
    pub patience: usize,
    pub max_iterations: usize,
    /// Relative residual change within the patience window that counts as steady.
    pub stall_ratio: f64,
    /// Attempt a factored refinement of the iterate every this many
    /// iterations (and before any infeasibility verdict); `0` disables it.
    pub polish_every: usize,
}

impl Default for GammaSettings {
    fn default() -> Self {
        Self { feas_tol: 1e-7, infeas_floor: 1e-4, patience: 500, max_iterations: 50_000, stall_ratio: 1e-3, polish_every: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GammaStatus {
    Feasible,
    Infeasible,
    Undecided,
}

/// Result of a feasibility run: the last PSD iterate and its constraint residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramWitness {
    pub status: GammaStatus,
    /// Gram matrix of the model points (PSD up to round-off).
    pub gram: Vec<Vec<f64>>,
    /// Largest pair-constraint violation of `gram`, in squared-distance units.
    pub residual: f64,
    /// `residual / max d²`.
    pub relative_residual: f64,
    pub iterations: usize,
}

impl GramWitness {
    /// `G[i][i] - 2 G[i][j] + G[j][j]`.
    pub fn squared_distance(&self, i: usize, j: usize) -> f64 {
        self.gram[i][i] - 2.0 * self.gram[i][j] + self.gram[j][j]
    }
}

/// Largest violation of the pair constraints by a symmetric `g`.
pub fn constraint_residual(graph: &ComparisonGraph, d2: &Matrix, g: &Matrix) -> f64 {
    let n = graph.n_vertices();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let sd = g[(i, i)] - 2.0 * g[(i, j)] + g[(j, j)];
            let v = if graph.is_adjacent(i, j) { sd - d2[(i, j)] } else { d2[(i, j)] - sd };
            worst = worst.max(v);
        }
    }
    worst
}

/// Nearest PSD matrix in the Frobenius norm: clip negative eigenvalues.
pub fn project_psd(m: &Matrix) -> Result<Matrix, EigenError> {
    let eig = symmetric_eigen(m)?;
    let n = m.rows();
    let v = &eig.vectors;
    let lam: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| v[(i, k)] * lam[k] * v[(j, k)]).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    Ok(out)
}

/// Classical-scaling Gram matrix `-J D² J / 2` (`J` the centering projector).
pub fn double_centered(d2: &Matrix) -> Matrix {
    let n = d2.rows();
    let nf = n as f64;
    let row_mean: Vec<f64> = (0..n).map(|i| (0..n).map(|j| d2[(i, j)]).sum::<f64>() / nf).collect();
    let mean = row_mean.iter().sum::<f64>() / nf;
    Matrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_mean[i] - row_mean[j] + mean))
}

fn squared_distances(graph: &ComparisonGraph, dists: &[Vec<f64>]) -> Result<Matrix, GammaError> {
    let n = graph.n_vertices();
    if dists.len() != n || dists.iter().any(|r| r.len() != n) {
        return Err(GammaError::BadDistances(format!("expected a {n}x{n} matrix")));
    }
    for i in 0..n {
        if dists[i][i] != 0.0 {
            return Err(GammaError::BadDistances(format!("diagonal entry ({i},{i}) is nonzero")));
        }
        for j in 0..n {
            let v = dists[i][j];
            if !v.is_finite() {
                return Err(GammaError::BadDistances(format!("entry ({i},{j}) is not finite")));
            }
            if i != j && !(v > 0.0) {
                return Err(GammaError::BadDistances(format!("entry ({i},{j}) is not positive")));
            }
            if v != dists[j][i] {
                return Err(GammaError::BadDistances(format!("asymmetric at ({i},{j})")));
            }
        }
    }
    Ok(Matrix::from_fn(n, n, |i, j| dists[i][j] * dists[i][j]))
}

/// Decides the Γ-comparison for labeled distances `dists[i][j] = d(x_i, x_j)`.
pub fn gamma_feasible(
    graph: &ComparisonGraph,
    dists: &[Vec<f64>],
    settings: &GammaSettings,
) -> Result<GramWitness, GammaError> {
    let d2 = squared_distances(graph, dists)?;
    let n = graph.n_vertices();
    let scale = d2.max_abs();
    let feas_tol = settings.feas_tol * scale;
    let floor = settings.infeas_floor * scale;

    // Pair constraints as s * (sd(i,j) - b) <= 0. The projections target the
    // constraints loosened by half the feasibility tolerance, which keeps the
    // target set full-dimensional when the exact one is thin.
    let cons: Vec<(usize, usize, f64, f64)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let s = if graph.is_adjacent(i, j) { 1.0 } else { -1.0 };
            (i, j, s, d2[(i, j)] + s * 0.5 * feas_tol)
        })
        .collect();

    let mut x = double_centered(&d2);
    let mut psd_incr = Matrix::zeros(n, n);
    // halfspace increments are multiples of the constraint normal
    let mut cons_incr = vec![0.0; cons.len()];
    let mut history: Vec<f64> = Vec::with_capacity(settings.max_iterations.min(1 << 16));
    let finish = |status, g: &Matrix, residual: f64, iterations| GramWitness {
        status,
        gram: g.to_rows(),
        residual,
        relative_residual: residual / scale,
        iterations,
    };

    for iter in 1..=settings.max_iterations {
        let mut y = x.clone();
        for (yv, pv) in y.data_mut().iter_mut().zip(psd_incr.as_slice()) {
            *yv += pv;
        }
        let xp = project_psd(&y)?;
        for ((pv, yv), xv) in psd_incr.data_mut().iter_mut().zip(y.as_slice()).zip(xp.as_slice()) {
            *pv = yv - xv;
        }
        let residual = constraint_residual(graph, &d2, &xp);
        if residual <= feas_tol {
            return Ok(finish(GammaStatus::Feasible, &xp, residual.max(0.0), iter));
        }
        history.push(residual);
        let stalled = iter > settings.patience && {
            let before = history[iter - 1 - settings.patience];
            residual > floor && (residual - before).abs() <= settings.stall_ratio * residual
        };
        let last = iter == settings.max_iterations;
        let scheduled = settings.polish_every > 0 && iter % settings.polish_every == 0;
        if settings.polish_every > 0 && (stalled || last || scheduled) {
            if let Some((g, r)) = polish(graph, &d2, &xp, feas_tol) {
                return Ok(finish(GammaStatus::Feasible, &g, r.max(0.0), iter));
            }
        }
        if stalled {
            return Ok(finish(GammaStatus::Infeasible, &xp, residual, iter));
        }
        if last {
            return Ok(finish(GammaStatus::Undecided, &xp, residual, iter));
        }

        x = xp;
        for (c, &(i, j, s, b)) in cons.iter().enumerate() {
            // y = x + c_e A, A = e_ii + e_jj - e_ij - e_ji, <A, A> = 4
            let ce = cons_incr[c];
            let sd = x[(i, i)] + x[(j, j)] - 2.0 * x[(i, j)] + 4.0 * ce;
            let t = (s * (sd - b)).max(0.0) / 4.0;
            let shift = ce - t * s;
            x[(i, i)] += shift;
            x[(j, j)] += shift;
            x[(i, j)] -= shift;
            x[(j, i)] -= shift;
            cons_incr[c] = t * s;
        }
    }
    unreachable!("the loop returns on its final iteration")
}

/// Levenberg–Marquardt refinement of a PSD iterate in factored form.
///
/// Writes `G = Y Yᵀ` (so every candidate is PSD by construction) and drives
/// the hinge violations `max(0, s (|y_i - y_j|² - d²) + feas_tol / 2)` to
/// zero. Aiming half a tolerance inside the constraints gives a target set
/// with interior even when the exact feasible set is a single degenerate
/// configuration, where Gauss–Newton would only creep. Returns the
/// refined Gram matrix only if it meets `feas_tol`; it never certifies
/// anything the residual check would not.
fn polish(graph: &ComparisonGraph, d2: &Matrix, g: &Matrix, feas_tol: f64) -> Option<(Matrix, f64)> {
    let n = g.rows();
    let eig = symmetric_eigen(g).ok()?;
    let mut y = Matrix::from_fn(n, n, |i, k| eig.vectors[(i, k)] * eig.values[k].max(0.0).sqrt());
    let pairs: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, if graph.is_adjacent(i, j) { 1.0 } else { -1.0 }))
        .collect();
    let slack = 0.5 * feas_tol;
    let violations = |y: &Matrix| -> Vec<f64> {
        pairs
            .iter()
            .map(|&(i, j, s)| {
                let sd: f64 = (0..n).map(|k| (y[(i, k)] - y[(j, k)]).powi(2)).sum();
                (s * (sd - d2[(i, j)]) + slack).max(0.0)
            })
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let nv = n * n;
    let mut r = violations(&y);
    let mut c = cost(&r);
    let mut mu = 1e-3 * d2.max_abs();
    for _ in 0..200 {
        if c == 0.0 {
            break;
        }
        // Jacobian of the active hinge terms with respect to the entries of Y
        let mut jtj = Matrix::zeros(nv, nv);
        let mut jtr = vec![0.0; nv];
        for (&(i, j, s), &rv) in pairs.iter().zip(&r) {
            if rv <= 0.0 {
                continue;
            }
            let mut row = vec![(0usize, 0.0f64); 2 * n];
            for k in 0..n {
                let diff = 2.0 * s * (y[(i, k)] - y[(j, k)]);
                row[2 * k] = (i * n + k, diff);
                row[2 * k + 1] = (j * n + k, -diff);
            }
            for &(a, va) in &row {
                jtr[a] += va * rv;
                for &(b, vb) in &row {
                    jtj[(a, b)] += va * vb;
                }
            }
        }
        let mut improved = false;
        while mu < 1e12 * d2.max_abs() {
            let a = Matrix::from_fn(nv, nv, |p, q| jtj[(p, q)] + if p == q { mu } else { 0.0 });
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Ok(step) = crate::linalg::solve(&a, &rhs, 1e-15) else {
                mu *= 4.0;
                continue;
            };
            let trial = Matrix::from_fn(n, n, |i, k| y[(i, k)] + step[i * n + k]);
            let tr = violations(&trial);
            let tc = cost(&tr);
            if tc < c {
                y = trial;
                r = tr;
                c = tc;
                mu = (mu / 3.0).max(1e-15 * d2.max_abs());
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    let gram = Matrix::from_fn(n, n, |i, j| (0..n).map(|k| y[(i, k)] * y[(j, k)]).sum());
    let residual = constraint_residual(graph, d2, &gram);
    (residual <= feas_tol).then_some((gram, residual))
}

/// How a C_4 solver verdict compares with the quadruple checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Agree,
    Disagree,
    /// Solver undecided, or the two disagree inside the tolerance band.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C4Instance {
    pub labeling: Labeling,
    pub slack: f64,
    pub comparison_holds: bool,
    pub status: GammaStatus,
    pub relative_residual: f64,
    pub iterations: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C4Report {
    pub instances: Vec<C4Instance>,
    pub agreements: usize,
    pub disagreements: usize,
    pub undecided: usize,
    /// Absolute slack band inside which disagreements are not counted.
    pub band: f64,
}

/// The C_4 instance for a labeling: cycle `p - x - q - y - p`, diagonals `{p,q}` and `{x,y}`.
pub fn c4_instance(space: &FiniteMetricSpace, l: Labeling) -> Vec<Vec<f64>> {
    let order = [l.p, l.x, l.q, l.y];
    order.iter().map(|&a| order.iter().map(|&b| space.dist(a, b)).collect()).collect()
}

/// Compares the C_4 solver with the quadruple checker on every quadruple and split.
pub fn c4_equivalence_check(
    space: &FiniteMetricSpace,
    tol: &Tolerances,
    settings: &GammaSettings,
) -> Result<C4Report, GammaError> {
    let c4 = ComparisonGraph::cycle(4)?;
    let n = space.len();
    let band = settings.feas_tol * space.diameter();
    let mut report = C4Report { instances: Vec::new(), agreements: 0, disagreements: 0, undecided: 0, band };
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for d in (c + 1)..n {
                    for l in Labeling::splits(a, b, c, d) {
                        let q = quad_comparison(space, l, tol).expect("valid labeling");
                        let w = gamma_feasible(&c4, &c4_instance(space, l), settings)?;
                        let verdict = match w.status {
                            GammaStatus::Undecided => Verdict::Undecided,
                            s if (s == GammaStatus::Feasible) == q.holds => Verdict::Agree,
                            _ if q.slack.abs() <= band => Verdict::Undecided,
                            _ => Verdict::Disagree,
                        };
                        match verdict {
                            Verdict::Agree => report.agreements += 1,
                            Verdict::Disagree => report.disagreements += 1,
                            Verdict::Undecided => report.undecided += 1,
                        }
                        report.instances.push(C4Instance {
                            labeling: l,
                            slack: q.slack,
                            comparison_holds: q.holds,
                            status: w.status,
                            relative_residual: w.relative_residual,
                            iterations: w.iterations,
                            verdict,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleInstance {
    /// Points of the space in cyclic order.
    pub cycle: Vec<usize>,
    pub status: GammaStatus,
    pub relative_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    /// Why the check did not run, if it did not.
    pub skipped: Option<String>,
    pub comparison: ComparisonReport,
    pub feasible: usize,
    pub infeasible: usize,
    pub undecided: usize,
    /// Infeasible instances; none are expected for spaces passing the comparison.
    pub anomalies: Vec<CycleInstance>,
    pub instances: Vec<CycleInstance>,
}

/// All cyclic orders of `verts` up to rotation and reflection.
pub fn cyclic_labelings(verts: &[usize]) -> Vec<Vec<usize>> {
    let k = verts.len();
    let mut out = Vec::new();
    if k < 3 {
        return out;
    }
    let mut rest: Vec<usize> = verts[1..].to_vec();
    permute(&mut rest, 0, &mut |perm| {
        if perm[0] < perm[k - 2] {
            let mut c = vec![verts[0]];
            c.extend_from_slice(perm);
            out.push(c);
        }
    });
    out.sort();
    out
}

fn permute(v: &mut Vec<usize>, start: usize, f: &mut impl FnMut(&[usize])) {
    if start == v.len() {
        f(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permute(v, start + 1, f);
        v.swap(start, i);
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Runs the C_k comparison for `5 <= k <= max_cycle` on every vertex subset
/// and every cyclic order, for a space that passes the CAT(0) comparison.
pub fn cycle_implication_check(
    space: &FiniteMetricSpace,
    max_cycle: usize,
    tol: &Tolerances,
    settings: &GammaSettings,
) -> Result<CycleReport, GammaError> {
    let comparison = cat0_comparison_all(space, tol);
    let mut report = CycleReport {
        skipped: None,
        comparison,
        feasible: 0,
        infeasible: 0,
        undecided: 0,
        anomalies: Vec::new(),
        instances: Vec::new(),
    };
    if !report.comparison.holds {
        let w = report.comparison.worst.expect("failing report has a witness");
        report.skipped = Some(format!(
            "space fails the CAT(0) comparison (labeling {:?}, slack {:e}); cycle comparisons are only implied for spaces that pass",
            w.labeling, w.slack
        ));
        return Ok(report);
    }
    for k in 5..=max_cycle.min(space.len()) {
        let graph = ComparisonGraph::cycle(k)?;
        for verts in subsets(space.len(), k) {
            for cycle in cyclic_labelings(&verts) {
                let dists: Vec<Vec<f64>> =
                    cycle.iter().map(|&a| cycle.iter().map(|&b| space.dist(a, b)).collect()).collect();
                let w = gamma_feasible(&graph, &dists, settings)?;
                let inst = CycleInstance {
                    cycle,
                    status: w.status,
                    relative_residual: w.relative_residual,
                    iterations: w.iterations,
                };
                match w.status {
                    GammaStatus::Feasible => report.feasible += 1,
                    GammaStatus::Infeasible => {
                        report.infeasible += 1;
                        report.anomalies.push(inst.clone());
                    }
                    GammaStatus::Undecided => report.undecided += 1,
                }
                report.instances.push(inst);
            }
        }
    }
    if report.feasible + report.infeasible + report.undecided == 0 {
        report.skipped = Some(format!("space has {} points; cycles need at least 5", space.len()));
    }
    Ok(report)
}
