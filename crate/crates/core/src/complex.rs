//! The output space of the embedding pipeline.
//!
//! In the positive semidefinite branch the five points span a Euclidean
//! simplex and the whole solid simplex is the answer. Otherwise the points sit
//! in a Minkowski space `R^{3,1}` (possibly with null kernel axes) and the
//! answer is the lower side `Σ⁻` of the boundary of their convex hull `K`: the
//! boundary points from which every past-pointing direction leaves `K`
//! immediately.
//!
//! A face `F` of `K` lies in `Σ⁻` exactly when the normal cone of `K` along `F`
//! contains a vector `a` with `τ·a_t < 0`, `|a_space| ≤ -τ·a_t` and zero
//! kernel components (`τ` is the time orientation). For a single facet this is
//! the familiar "supporting hyperplane is spacelike or lightlike and faces the
//! past" rule; for lower-dimensional faces the normal cone is spanned by
//! several facet normals and the test is a small quadratic program, solved
//! here exactly by enumerating supports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify, project_along, ClassifyError, OrientationProfile, ProjectError, Side};
use crate::form::{
    associated_form, eigendecompose, euclidean_embedding, is_euclidean, minkowski_embedding, sub, FormError,
    MinkowskiEmbedding, Signature, AMBIENT_DIM,
};
use crate::linalg::{self, Matrix};
use crate::metric::{cat0_comparison_all, ComparisonReport, FiniteMetricSpace, QuadCheckResult};
use crate::tolerance::Tolerances;

pub const COMPLEX_FORMAT_VERSION: u32 = 1;
const N_VERTICES: usize = 5;
/// Normal components below this (normals have unit length) count as zero.
const KERNEL_SNAP: f64 = 1e-9;
/// Classifications whose margin is within this band are reported as near-boundary.
const NEAR_BOUNDARY: f64 = 1e-6;
/// Ridge added to the quadratic program so every KKT system is nonsingular.
const QP_RIDGE: f64 = 1e-13;

/// Which half of the timelike cone `{W(v) < 0}` is the future cone `C^+`:
/// the half whose time coordinate has sign `time_sign`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeOrientation {
    pub time_sign: i8,
}

impl ConeOrientation {
    pub const FUTURE_POSITIVE: Self = Self { time_sign: 1 };
    pub const FUTURE_NEGATIVE: Self = Self { time_sign: -1 };

    pub fn flipped(self) -> Self {
        Self { time_sign: -self.time_sign }
    }

    fn tau(self) -> f64 {
        f64::from(self.time_sign)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FacetSide {
    Lower,
    Upper,
    Timelike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "Euclidean_full_simplex")]
    EuclideanFullSimplex,
    #[serde(rename = "Minkowski_lower_boundary")]
    MinkowskiLowerBoundary,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("expected a 5-point embedding, got {0} points")]
    WrongPointCount(usize),
    #[error("embedding has no timelike axis")]
    NoTimeAxis,
    #[error("facet {0:?} is degenerate (its vertices are affinely dependent)")]
    DegenerateFacet([usize; 4]),
    #[error("vertex index out of range in {0:?}")]
    BadFacet([usize; 4]),
    #[error("time orientation must be +1 or -1, got {0}")]
    BadOrientation(i8),
    #[error("projection along the time axis lies in stratum A_0 (profile {0:?})")]
    StratumA0(OrientationProfile),
    #[error("projection along the time axis is degenerate: {0}")]
    Projection(#[from] ProjectError),
    #[error("the lower side misses edges {0:?}")]
    EdgesNotCovered(Vec<[usize; 2]>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("the embedding needs exactly 5 points, got {0}")]
    WrongPointCount(usize),
    #[error("CAT(0) comparison fails: witness {witness:?} has slack {slack}", slack = witness.slack)]
    ComparisonFailed { witness: QuadCheckResult, report: Box<ComparisonReport> },
    #[error("anomaly: comparison passed but the associated form has {0} negative eigenvalues")]
    TooManyNegativeEigenvalues(usize),
    #[error("anomaly: comparison passed but the time-axis projection lies in A_0 (profile {0:?})")]
    StratumA0(OrientationProfile),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Complex(ComplexError),
    #[error("embedded edge {i}-{j} has relative error {residual:e}")]
    DistanceMismatch { i: usize, j: usize, residual: f64 },
}

impl From<ComplexError> for EmbedError {
    fn from(e: ComplexError) -> Self {
        match e {
            ComplexError::StratumA0(p) => EmbedError::StratumA0(p),
            other => EmbedError::Complex(other),
        }
    }
}

/// A subcomplex of the 4-simplex on the five embedded points, each simplex
/// carrying the flat metric induced by `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacelikeComplex {
    pub format_version: u32,
    pub branch: Branch,
    pub vertices: Vec<[f64; AMBIENT_DIM]>,
    pub metric_signs: [i8; AMBIENT_DIM],
    /// Time orientation used to pick the lower side (absent in the Euclidean branch).
    pub time_sign: Option<i8>,
    /// The 3-simplices of the complex, each as its four sorted vertex indices.
    pub facets: Vec<[usize; 4]>,
    /// Maximal simplices of the complex (facets plus any lower-dimensional
    /// maximal faces), sorted.
    pub cells: Vec<Vec<usize>>,
    /// Every simplex of the complex, closed under taking faces.
    pub faces: Vec<Vec<usize>>,
    /// Symmetric 5×5 table of `sqrt(W(x_i - x_j))`.
    pub edge_lengths: Vec<Vec<f64>>,
    /// Whole solid simplex with ambient straight-line geodesics.
    pub solid: bool,
}

impl SpacelikeComplex {
    pub fn contains_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.faces.iter().any(|f| f.len() == 2 && f[0] == a && f[1] == b)
    }

    pub fn embedding(&self) -> MinkowskiEmbedding {
        MinkowskiEmbedding {
            coords: self.vertices.clone(),
            metric_signs: self.metric_signs,
            time_axis: self.metric_signs.iter().position(|&s| s == -1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedDiagnostics {
    pub comparison: ComparisonReport,
    pub eigenvalues: Vec<f64>,
    pub signature: Signature,
    /// Largest relative error between embedded edge lengths and input distances.
    pub max_edge_residual: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub space: FiniteMetricSpace,
    pub embedding: MinkowskiEmbedding,
    pub complex: SpacelikeComplex,
    pub profile: Option<OrientationProfile>,
    pub orientation: Option<ConeOrientation>,
    pub diagnostics: EmbedDiagnostics,
}

/// Vertex subsets of the 4-simplex as bitmasks.
fn mask_vertices(mask: u8) -> Vec<usize> {
    (0..N_VERTICES).filter(|&i| mask & (1 << i) != 0).collect()
}

fn mask_of(vs: &[usize]) -> u8 {
    vs.iter().fold(0u8, |m, &i| m | (1 << i))
}

const FULL_MASK: u8 = (1 << N_VERTICES) - 1;

fn check_embedding(emb: &MinkowskiEmbedding) -> Result<usize, ComplexError> {
    if emb.len() != N_VERTICES {
        return Err(ComplexError::WrongPointCount(emb.len()));
    }
    emb.time_axis.ok_or(ComplexError::NoTimeAxis)
}

fn check_orientation(orient: ConeOrientation) -> Result<(), ComplexError> {
    match orient.time_sign {
        1 | -1 => Ok(()),
        s => Err(ComplexError::BadOrientation(s)),
    }
}

/// Unit outward normal (standard inner product) of the facet opposite `omit`.
///
/// The normal is the cofactor vector of the three edge vectors at the first
/// facet vertex; its sign is fixed so that the omitted vertex lies behind it.
pub fn outward_normal(emb: &MinkowskiEmbedding, omit: usize) -> Result<[f64; AMBIENT_DIM], ComplexError> {
    if emb.len() != N_VERTICES {
        return Err(ComplexError::WrongPointCount(emb.len()));
    }
    let facet = facet_omitting(omit);
    let x = &emb.coords;
    let u = [sub(&x[facet[1]], &x[facet[0]]), sub(&x[facet[2]], &x[facet[0]]), sub(&x[facet[3]], &x[facet[0]])];
    let mut n = [0.0; AMBIENT_DIM];
    for (c, slot) in n.iter_mut().enumerate() {
        let cols: Vec<usize> = (0..AMBIENT_DIM).filter(|&k| k != c).collect();
        let row = |r: usize| [u[r][cols[0]], u[r][cols[1]], u[r][cols[2]]];
        let minor = linalg::det3(row(0), row(1), row(2));
        *slot = if c % 2 == 0 { minor } else { -minor };
    }
    let len = linalg::norm(&n);
    let scale: f64 = u.iter().map(|v| linalg::norm(v)).product();
    if !(len > 1e-12 * scale) {
        return Err(ComplexError::DegenerateFacet(facet));
    }
    let away = sub(&x[omit], &x[facet[0]]);
    let s = if linalg::dot(&n, &away) > 0.0 { -1.0 / len } else { 1.0 / len };
    Ok(n.map(|v| v * s))
}

/// The four vertices of the facet opposite `omit`, ascending.
pub fn facet_omitting(omit: usize) -> [usize; 4] {
    let mut f = [0; 4];
    for (slot, i) in f.iter_mut().zip((0..N_VERTICES).filter(|&i| i != omit)) {
        *slot = i;
    }
    f
}

/// Outcome of the dual-cone test for one face.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ConeTest {
    member: bool,
    /// `min |a_space|` over normalized cone vectors, minus one; `+inf` when no
    /// cone vector is past-pointing with zero kernel part.
    margin: f64,
}

/// Does the face with vertex set `face` belong to the lower side for orientation `tau`?
fn lower_cone_test(
    emb: &MinkowskiEmbedding,
    normals: &[[f64; AMBIENT_DIM]; N_VERTICES],
    face: u8,
    tau: f64,
    tol: f64,
) -> ConeTest {
    let t = emb.time_axis.expect("checked by caller");
    let space: Vec<usize> = emb.space_axes().collect();
    let kernel: Vec<usize> = emb.kernel_axes().collect();
    let gens: Vec<usize> = (0..N_VERTICES).filter(|&i| face & (1 << i) == 0).collect();
    let snap = |v: f64| if v.abs() < KERNEL_SNAP { 0.0 } else { v };

    let mut best = f64::INFINITY;
    for support in 1u32..(1 << gens.len()) {
        let idx: Vec<usize> = (0..gens.len()).filter(|&k| support & (1 << k) != 0).map(|k| gens[k]).collect();
        let r = idx.len();
        // equality constraints: tau * a_t = -1, a_k = 0 on kernel axes
        let mut rows: Vec<(Vec<f64>, f64)> = vec![(idx.iter().map(|&i| tau * normals[i][t]).collect(), -1.0)];
        for &k in &kernel {
            rows.push((idx.iter().map(|&i| snap(normals[i][k])).collect(), 0.0));
        }
        let Some(eq) = independent_rows(&rows) else { continue };
        let m = eq.len();
        // KKT: [2(SᵀS + εI)  Eᵀ; E  0] [λ; ν] = [0; b]
        let kkt = Matrix::from_fn(r + m, r + m, |a, b| match (a < r, b < r) {
            (true, true) => {
                let g: f64 = space.iter().map(|&s| normals[idx[a]][s] * normals[idx[b]][s]).sum();
                2.0 * (g + if a == b { QP_RIDGE } else { 0.0 })
            }
            (true, false) => eq[b - r].0[a],
            (false, true) => eq[a - r].0[b],
            (false, false) => 0.0,
        });
        let mut rhs = vec![0.0; r + m];
        for (k, (_, beta)) in eq.iter().enumerate() {
            rhs[r + k] = *beta;
        }
        let Ok(sol) = linalg::solve(&kkt, &rhs, 1e-14) else { continue };
        let lambda = &sol[..r];
        if lambda.iter().any(|&l| l < -1e-12) {
            continue;
        }
        let residual = rows
            .iter()
            .map(|(coef, beta)| (coef.iter().zip(lambda).map(|(c, l)| c * l).sum::<f64>() - beta).abs())
            .fold(0.0, f64::max);
        let lam_size: f64 = lambda.iter().map(|l| l.abs()).sum::<f64>().max(1.0);
        if residual > 1e-9 * lam_size {
            continue;
        }
        let a_space: f64 = space
            .iter()
            .map(|&s| {
                let v: f64 = idx.iter().zip(lambda).map(|(&i, l)| l * normals[i][s]).sum();
                v * v
            })
            .sum::<f64>()
            .sqrt();
        best = best.min(a_space);
    }
    let margin = best - 1.0;
    ConeTest { member: margin <= tol, margin }
}

/// Reduces equality constraints to an independent set with the same solutions.
/// Returns `None` if the system is inconsistent.
fn independent_rows(rows: &[(Vec<f64>, f64)]) -> Option<Vec<(Vec<f64>, f64)>> {
    let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut kept = Vec::new();
    for (coef, beta) in rows {
        let mut e = coef.clone();
        let mut b = *beta;
        for (q, qb) in &basis {
            let proj = linalg::dot(&e, q);
            for (ei, qi) in e.iter_mut().zip(q) {
                *ei -= proj * qi;
            }
            b -= proj * qb;
        }
        let len = linalg::norm(&e);
        if len <= 1e-10 * linalg::norm(coef).max(1e-300) || len < 1e-14 {
            if b.abs() > 1e-9 * (1.0 + beta.abs()) {
                return None;
            }
            continue;
        }
        basis.push((e.iter().map(|v| v / len).collect(), b / len));
        kept.push((coef.clone(), *beta));
    }
    Some(kept)
}

fn all_normals(emb: &MinkowskiEmbedding) -> Result<[[f64; AMBIENT_DIM]; N_VERTICES], ComplexError> {
    let mut normals = [[0.0; AMBIENT_DIM]; N_VERTICES];
    for (i, n) in normals.iter_mut().enumerate() {
        *n = outward_normal(emb, i)?;
    }
    Ok(normals)
}

fn facet_mask(facet: &[usize; 4]) -> Result<(u8, usize), ComplexError> {
    let mut sorted = *facet;
    sorted.sort_unstable();
    if sorted[3] >= N_VERTICES || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ComplexError::BadFacet(*facet));
    }
    let mask = mask_of(&sorted);
    let omit = (0..N_VERTICES).find(|&i| mask & (1 << i) == 0).expect("four of five vertices");
    Ok((mask, omit))
}

/// Decides on which side of the boundary of the hull a facet lies.
///
/// `Lower` means the outward normal `n` satisfies `τ·n_t < 0`, has no kernel
/// component, and `|n_space| ≤ -τ·n_t` (up to `tol.spacelike`): the supporting
/// hyperplane is spacelike or lightlike and faces the past.
pub fn facet_side_test(
    emb: &MinkowskiEmbedding,
    facet: [usize; 4],
    orient: ConeOrientation,
    tol: &Tolerances,
) -> Result<FacetSide, ComplexError> {
    check_embedding(emb)?;
    check_orientation(orient)?;
    let (mask, omit) = facet_mask(&facet)?;
    let mut normals = [[0.0; AMBIENT_DIM]; N_VERTICES];
    normals[omit] = outward_normal(emb, omit)?;
    let tau = orient.tau();
    Ok(if lower_cone_test(emb, &normals, mask, tau, tol.spacelike).member {
        FacetSide::Lower
    } else if lower_cone_test(emb, &normals, mask, -tau, tol.spacelike).member {
        FacetSide::Upper
    } else {
        FacetSide::Timelike
    })
}

/// Picks the time orientation whose projection along the time axis lies in
/// `A_-`, returning it together with that projection's profile.
pub fn choose_time_orientation(
    emb: &MinkowskiEmbedding,
    tol: &Tolerances,
) -> Result<(ConeOrientation, OrientationProfile), ComplexError> {
    let t = check_embedding(emb)?;
    let mut axis = [0.0; AMBIENT_DIM];
    axis[t] = 1.0;
    let arr = project_along(emb, &axis, tol)?;
    let profile = classify(&arr).map_err(|e| ComplexError::Projection(ProjectError::Degenerate(e)))?;
    match profile.side {
        Side::AZero => Err(ComplexError::StratumA0(profile)),
        Side::AMinus => Ok((ConeOrientation::FUTURE_POSITIVE, profile)),
        Side::APlus => {
            axis[t] = -1.0;
            let flipped = classify(&project_along(emb, &axis, tol)?)
                .map_err(|e| ComplexError::Projection(ProjectError::Degenerate(e)))?;
            if flipped.side != Side::AMinus {
                return Err(ComplexError::Projection(ProjectError::Degenerate(
                    ClassifyError::InconsistentCounts {
                        n_plus: flipped.n_plus,
                        n_zero: flipped.n_zero,
                        n_minus: flipped.n_minus,
                    },
                )));
            }
            Ok((ConeOrientation::FUTURE_NEGATIVE, flipped))
        }
    }
}

/// Membership of every face of the 4-simplex in the lower side, with margins.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerSideFaces {
    /// `(face mask, margin)` for every proper nonempty face, in mask order.
    pub tested: Vec<(u8, f64)>,
    /// Masks of faces in the lower side.
    pub members: Vec<u8>,
}

/// Runs the dual-cone test on all 30 proper faces.
pub fn lower_side_faces(
    emb: &MinkowskiEmbedding,
    orient: ConeOrientation,
    tol: &Tolerances,
) -> Result<LowerSideFaces, ComplexError> {
    check_embedding(emb)?;
    check_orientation(orient)?;
    let normals = all_normals(emb)?;
    let mut tested = Vec::new();
    let mut members = Vec::new();
    for mask in 1..FULL_MASK {
        let r = lower_cone_test(emb, &normals, mask, orient.tau(), tol.spacelike);
        tested.push((mask, r.margin));
        if r.member {
            members.push(mask);
        }
    }
    Ok(LowerSideFaces { tested, members })
}

fn edge_table(emb: &MinkowskiEmbedding) -> Vec<Vec<f64>> {
    let n = emb.len();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { emb.interval(i, j).max(0.0).sqrt() }).collect())
        .collect()
}

fn closure(cells: &[u8]) -> Vec<Vec<usize>> {
    let mut masks: Vec<u8> = (1..=FULL_MASK)
        .filter(|&m| cells.iter().any(|&c| m & c == m))
        .collect();
    masks.sort_by_key(|&m| (m.count_ones(), mask_vertices(m)));
    masks.into_iter().map(mask_vertices).collect()
}

/// Builds the lower side of the hull as a simplicial complex, returning any
/// near-boundary warnings alongside it.
pub fn build_complex_diagnosed(
    emb: &MinkowskiEmbedding,
    orient: ConeOrientation,
    tol: &Tolerances,
) -> Result<(SpacelikeComplex, Vec<String>), ComplexError> {
    let sides = lower_side_faces(emb, orient, tol)?;
    let mut warnings = Vec::new();
    for &(mask, margin) in &sides.tested {
        if margin.is_finite() && margin.abs() <= NEAR_BOUNDARY {
            warnings.push(format!(
                "face {:?} is within {:.1e} of the lightlike boundary (margin {margin:.3e})",
                mask_vertices(mask),
                NEAR_BOUNDARY
            ));
        }
    }
    let members = &sides.members;
    let maximal: Vec<u8> = members
        .iter()
        .copied()
        .filter(|&m| !members.iter().any(|&o| o != m && o & m == m))
        .collect();
    let mut missing = Vec::new();
    for i in 0..N_VERTICES {
        for j in (i + 1)..N_VERTICES {
            let e = (1u8 << i) | (1u8 << j);
            if !maximal.iter().any(|&c| c & e == e) {
                missing.push([i, j]);
            }
        }
    }
    if !missing.is_empty() {
        return Err(ComplexError::EdgesNotCovered(missing));
    }
    let mut facets: Vec<[usize; 4]> = maximal
        .iter()
        .filter(|m| m.count_ones() == 4)
        .map(|&m| mask_vertices(m).try_into().expect("four vertices"))
        .collect();
    facets.sort_unstable();
    let mut cells: Vec<Vec<usize>> = maximal.iter().map(|&m| mask_vertices(m)).collect();
    cells.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let complex = SpacelikeComplex {
        format_version: COMPLEX_FORMAT_VERSION,
        branch: Branch::MinkowskiLowerBoundary,
        vertices: emb.coords.clone(),
        metric_signs: emb.metric_signs,
        time_sign: Some(orient.time_sign),
        facets,
        faces: closure(&maximal),
        cells,
        edge_lengths: edge_table(emb),
        solid: false,
    };
    Ok((complex, warnings))
}

/// Builds the lower side of the hull as a simplicial complex.
pub fn build_complex(
    emb: &MinkowskiEmbedding,
    orient: ConeOrientation,
    tol: &Tolerances,
) -> Result<SpacelikeComplex, ComplexError> {
    build_complex_diagnosed(emb, orient, tol).map(|(c, _)| c)
}

/// The full solid simplex of a Euclidean embedding.
pub fn solid_simplex(emb: &MinkowskiEmbedding) -> SpacelikeComplex {
    let facets = (0..N_VERTICES).rev().map(facet_omitting).collect();
    SpacelikeComplex {
        format_version: COMPLEX_FORMAT_VERSION,
        branch: Branch::EuclideanFullSimplex,
        vertices: emb.coords.clone(),
        metric_signs: emb.metric_signs,
        time_sign: None,
        facets,
        cells: vec![(0..N_VERTICES).collect()],
        faces: closure(&[FULL_MASK]),
        edge_lengths: edge_table(emb),
        solid: true,
    }
}

/// Whether moving from the barycenter of `face` in the direction `-v` leaves
/// the hull immediately (the per-direction lower side `Σ⁻(v)`).
///
/// Solves for the barycentric velocity `μ` of `v` (`Σ μ_j x_j = v`,
/// `Σ μ_j = 0`); the motion exits iff some vertex outside the face has
/// `μ_j > 0`. Returns `None` if the points are affinely dependent.
pub fn exits_along_past(emb: &MinkowskiEmbedding, face: &[usize], v: &[f64; AMBIENT_DIM]) -> Option<bool> {
    if emb.len() != N_VERTICES {
        return None;
    }
    let m = Matrix::from_fn(N_VERTICES, N_VERTICES, |r, c| if r < AMBIENT_DIM { emb.coords[c][r] } else { 1.0 });
    let mut rhs = [0.0; N_VERTICES];
    rhs[..AMBIENT_DIM].copy_from_slice(v);
    let mu = linalg::solve(&m, &rhs, 1e-14).ok()?;
    let size: f64 = mu.iter().map(|x| x.abs()).sum();
    let mask = mask_of(face);
    Some((0..N_VERTICES).any(|j| mask & (1 << j) == 0 && mu[j] > 1e-12 * size))
}

/// Runs the whole pipeline: comparison pre-check, associated form, spectral
/// branch selection, embedding, orientation choice, and complex assembly.
pub fn toyoda_embed(space: &FiniteMetricSpace, tol: &Tolerances) -> Result<EmbeddingResult, EmbedError> {
    if space.len() != N_VERTICES {
        return Err(EmbedError::WrongPointCount(space.len()));
    }
    let comparison = cat0_comparison_all(space, tol);
    if !comparison.holds {
        let witness = comparison.worst.expect("a failing space has a witness");
        return Err(EmbedError::ComparisonFailed { witness, report: Box::new(comparison) });
    }
    let form = associated_form(space, N_VERTICES - 1)?;
    let spectrum = eigendecompose(&form, tol)?;
    let mut warnings = Vec::new();
    let (embedding, mut complex, profile, orientation) = if is_euclidean(&spectrum) {
        let emb = euclidean_embedding(&spectrum, &form)?;
        let cx = solid_simplex(&emb);
        (emb, cx, None, None)
    } else {
        let emb = minkowski_embedding(&spectrum, &form).map_err(|e| match e {
            FormError::TooManyNegativeEigenvalues(k) => EmbedError::TooManyNegativeEigenvalues(k),
            other => EmbedError::Form(other),
        })?;
        let (orient, profile) = choose_time_orientation(&emb, tol)?;
        let (cx, w) = build_complex_diagnosed(&emb, orient, tol)?;
        warnings.extend(w);
        (emb, cx, Some(profile), Some(orient))
    };

    let length_tol = tol.distance * space.diameter();
    let mut worst = (0.0f64, 0, 0);
    for i in 0..N_VERTICES {
        for j in (i + 1)..N_VERTICES {
            let d = space.dist(i, j);
            let w = embedding.interval(i, j);
            if w <= length_tol * length_tol {
                warnings.push(format!("edge {i}-{j} is numerically lightlike (W = {w:e}); clamped to the input distance"));
                complex.edge_lengths[i][j] = d;
                complex.edge_lengths[j][i] = d;
            }
            let residual = (complex.edge_lengths[i][j] - d).abs() / d;
            if residual > worst.0 {
                worst = (residual, i, j);
            }
        }
    }
    // a loose guard against a broken embedding; the tight check is verification's job
    if worst.0 > 1e3 * tol.distance.max(1e-9) {
        return Err(EmbedError::DistanceMismatch { i: worst.1, j: worst.2, residual: worst.0 });
    }
    Ok(EmbeddingResult {
        space: space.clone(),
        embedding,
        complex,
        profile,
        orientation,
        diagnostics: EmbedDiagnostics {
            comparison,
            eigenvalues: spectrum.eigenvalues.clone(),
            signature: spectrum.signature,
            max_edge_residual: worst.0,
            warnings,
        },
    })
}
