//! Finite metric spaces and the (2+2) CAT(0) comparison.
//!
//! For a quadruple `p, q, x, y` the two model triangles `(p x y)` and
//! `(q x y)` are laid out in the plane on opposite sides of their common side
//! `[x y]`. The quadruple satisfies the comparison when
//! `|p - q| <= |p' - z| + |z - q'|` for every `z` on `[x' y']`. The right-hand
//! side is a convex function of `z`, so its minimum over the segment is taken
//! at the crossing point of `[p' q']` with the line through `x' y'`, clamped
//! to the segment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::tolerance::Tolerances;

pub const MIN_POINTS: usize = 2;
pub const MAX_POINTS: usize = 16;

/// Relative slack allowed in the triangle inequality during validation.
const TRIANGLE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { n: usize, row: usize, len: usize },
    #[error("point count {0} outside the supported range {MIN_POINTS}..={MAX_POINTS}")]
    SizeOutOfRange(usize),
    #[error("entry ({i},{j}) is not a finite number")]
    NonFinite { i: usize, j: usize },
    #[error("entry ({i},{j}) is negative")]
    Negative { i: usize, j: usize },
    #[error("matrix is asymmetric at ({i},{j})")]
    Asymmetric { i: usize, j: usize },
    #[error("diagonal entry ({0},{0}) is nonzero")]
    NonzeroDiagonal(usize),
    #[error("distinct points {i} and {j} are at distance zero")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("labeling must use four distinct indices below {n}: {labeling:?}")]
    BadLabeling { n: usize, labeling: Labeling },
    #[error(transparent)]
    NotRealizable(#[from] TriangleError),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("side lengths ({0}, {1}, {2}) violate the triangle inequality")]
pub struct TriangleError(pub f64, pub f64, pub f64);

/// Serialized shape of a metric space: `{"n": 3, "d": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricJson {
    pub n: usize,
    pub d: Vec<Vec<f64>>,
}

/// A validated finite metric space on the points `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricJson", into = "MetricJson")]
pub struct FiniteMetricSpace {
    d: Matrix,
}

impl TryFrom<MetricJson> for FiniteMetricSpace {
    type Error = MetricError;

    fn try_from(raw: MetricJson) -> Result<Self, MetricError> {
        if raw.d.len() != raw.n {
            return Err(MetricError::NotSquare { n: raw.n, row: raw.d.len(), len: 0 });
        }
        validate_metric(&raw.d)
    }
}

impl From<FiniteMetricSpace> for MetricJson {
    fn from(space: FiniteMetricSpace) -> Self {
        MetricJson { n: space.len(), d: space.d.to_rows() }
    }
}

/// Checks a raw distance matrix and wraps it. Entries are never repaired.
pub fn validate_metric(raw: &[Vec<f64>]) -> Result<FiniteMetricSpace, MetricError> {
    let n = raw.len();
    for (row, r) in raw.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare { n, row, len: r.len() });
        }
    }
    if !(MIN_POINTS..=MAX_POINTS).contains(&n) {
        return Err(MetricError::SizeOutOfRange(n));
    }
    for i in 0..n {
        for j in 0..n {
            let v = raw[i][j];
            if !v.is_finite() {
                return Err(MetricError::NonFinite { i, j });
            }
            if v < 0.0 {
                return Err(MetricError::Negative { i, j });
            }
        }
    }
    for i in 0..n {
        if raw[i][i] != 0.0 {
            return Err(MetricError::NonzeroDiagonal(i));
        }
        for j in (i + 1)..n {
            if raw[i][j] != raw[j][i] {
                return Err(MetricError::Asymmetric { i, j });
            }
            if raw[i][j] == 0.0 {
                return Err(MetricError::ZeroOffDiagonal { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let through = raw[i][j] + raw[j][k];
                if raw[i][k] > through * (1.0 + TRIANGLE_REL_TOL) {
                    return Err(MetricError::TriangleViolation { i, j, k });
                }
            }
        }
    }
    Ok(FiniteMetricSpace { d: Matrix::from_rows(raw) })
}

impl FiniteMetricSpace {
    pub fn len(&self) -> usize {
        self.d.rows()
    }

    /// Always false for a validated space; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.d.rows() == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.d
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.d.to_rows()
    }

    pub fn diameter(&self) -> f64 {
        self.d.max_abs()
    }

    /// The subspace on the given points, relabeled `0..indices.len()`.
    pub fn subspace(&self, indices: &[usize]) -> Result<FiniteMetricSpace, MetricError> {
        let rows: Vec<Vec<f64>> = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.dist(i, j)).collect())
            .collect();
        validate_metric(&rows)
    }

    /// All distances multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<FiniteMetricSpace, MetricError> {
        let rows: Vec<Vec<f64>> =
            self.d.to_rows().into_iter().map(|r| r.into_iter().map(|x| x * s).collect()).collect();
        validate_metric(&rows)
    }
}

/// A model triangle in the plane with `a` at the origin and `b` on the
/// positive x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarTriangle {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
}

/// Triangle area from its sides by Kahan's rearrangement of Heron's formula,
/// accurate for needle-like and degenerate triangles and independent of the
/// order of the arguments.
fn stable_area(l0: f64, l1: f64, l2: f64) -> f64 {
    let mut s = [l0, l1, l2];
    s.sort_by(|a, b| b.total_cmp(a));
    let [a, b, c] = s;
    let prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * prod.max(0.0).sqrt()
}

/// Planar triangle with `|ab| = l_ab`, `|ac| = l_ac`, `|bc| = l_bc` and `c` in
/// the closed upper half-plane. Degenerate (collinear) triples are allowed.
pub fn model_triangle(l_ab: f64, l_ac: f64, l_bc: f64) -> Result<PlanarTriangle, TriangleError> {
    let err = TriangleError(l_ab, l_ac, l_bc);
    if [l_ab, l_ac, l_bc].iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(err);
    }
    let slack = TRIANGLE_REL_TOL * (l_ab + l_ac + l_bc);
    if l_ab > l_ac + l_bc + slack || l_ac > l_ab + l_bc + slack || l_bc > l_ab + l_ac + slack {
        return Err(err);
    }
    let c = if l_ab == 0.0 {
        [l_ac, 0.0]
    } else {
        let x = (l_ab * l_ab + l_ac * l_ac - l_bc * l_bc) / (2.0 * l_ab);
        [x, 2.0 * stable_area(l_ab, l_ac, l_bc) / l_ab]
    };
    Ok(PlanarTriangle { a: [0.0, 0.0], b: [l_ab, 0.0], c })
}

/// The four roles of a comparison quadruple: `{p, q}` are compared, `[x y]`
/// is the common side of the model triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labeling {
    pub p: usize,
    pub q: usize,
    pub x: usize,
    pub y: usize,
}

impl Labeling {
    pub fn new(p: usize, q: usize, x: usize, y: usize) -> Self {
        Self { p, q, x, y }
    }

    fn is_valid(&self, n: usize) -> bool {
        let ids = [self.p, self.q, self.x, self.y];
        ids.iter().all(|&i| i < n)
            && (0..4).all(|a| ((a + 1)..4).all(|b| ids[a] != ids[b]))
    }

    /// The three ways to split the sorted quadruple `a < b < c < d` into a
    /// compared pair and a common side.
    pub fn splits(a: usize, b: usize, c: usize, d: usize) -> [Labeling; 3] {
        [Labeling::new(a, b, c, d), Labeling::new(a, c, b, d), Labeling::new(a, d, b, c)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadCheckResult {
    pub holds: bool,
    /// `min_z (|p' - z| + |z - q'|) - d(p, q)`.
    pub slack: f64,
    pub labeling: Labeling,
}

/// Minimum of `|p' - z| + |z - q'|` over `z` on the common side `[x' y']`.
pub fn model_minimum(space: &FiniteMetricSpace, l: Labeling) -> Result<f64, MetricError> {
    let side = space.dist(l.x, l.y);
    let tp = model_triangle(side, space.dist(l.x, l.p), space.dist(l.y, l.p))?;
    let tq = model_triangle(side, space.dist(l.x, l.q), space.dist(l.y, l.q))?;
    let p = tp.c;
    let q = [tq.c[0], -tq.c[1]];
    let denom = p[1] - q[1];
    let cross = if denom > 0.0 {
        p[0] + (p[1] / denom) * (q[0] - p[0])
    } else {
        // both apexes on the line: every point between them is a minimizer
        0.5 * (p[0] + q[0])
    };
    let z = cross.clamp(0.0, side);
    Ok((p[0] - z).hypot(p[1]) + (q[0] - z).hypot(q[1]))
}

/// Slack allowance used by the comparison: `compare * diameter`.
pub fn comparison_allowance(space: &FiniteMetricSpace, tol: &Tolerances) -> f64 {
    tol.compare * space.diameter()
}

pub fn quad_comparison(
    space: &FiniteMetricSpace,
    labeling: Labeling,
    tol: &Tolerances,
) -> Result<QuadCheckResult, MetricError> {
    if !labeling.is_valid(space.len()) {
        return Err(MetricError::BadLabeling { n: space.len(), labeling });
    }
    let m = model_minimum(space, labeling)?;
    let slack = m - space.dist(labeling.p, labeling.q);
    Ok(QuadCheckResult { holds: slack >= -comparison_allowance(space, tol), slack, labeling })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub holds: bool,
    pub quadruples: usize,
    pub labelings_checked: usize,
    /// Labeling with the smallest slack (the failure witness when `holds` is false).
    pub worst: Option<QuadCheckResult>,
    pub failures: usize,
    /// Effective absolute slack allowance.
    pub allowance: f64,
}

/// Checks every quadruple under each of its three pair-splittings.
pub fn cat0_comparison_all(space: &FiniteMetricSpace, tol: &Tolerances) -> ComparisonReport {
    let n = space.len();
    let mut report = ComparisonReport {
        holds: true,
        quadruples: 0,
        labelings_checked: 0,
        worst: None,
        failures: 0,
        allowance: comparison_allowance(space, tol),
    };
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for d in (c + 1)..n {
                    report.quadruples += 1;
                    for l in Labeling::splits(a, b, c, d) {
                        let r = quad_comparison(space, l, tol)
                            .expect("valid space yields realizable model triangles");
                        report.labelings_checked += 1;
                        if !r.holds {
                            report.failures += 1;
                            report.holds = false;
                        }
                        if report.worst.is_none_or(|w| r.slack < w.slack) {
                            report.worst = Some(r);
                        }
                    }
                }
            }
        }
    }
    report
}
