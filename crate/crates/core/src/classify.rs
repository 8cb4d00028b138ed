//! Facet-orientation classification of 5-point arrays in R^3.
//!
//! Five points define an affine map from a 4-simplex to R^3. With the simplex
//! oriented by its vertex order, facet `i` (the one omitting vertex `i`)
//! carries the induced orientation `(-1)^i`, so its image is positively
//! oriented when `(-1)^i * det[p_j1 - p_j0, p_j2 - p_j0, p_j3 - p_j0] > 0`.
//! The counts `(n_plus, n_zero, n_minus)` and `m = n_minus - n_plus` sort
//! nondegenerate arrays into seven strata `A_-3 ..= A_3`; `A_0` separates
//! the two sides `A_-` and `A_+`.
//!
//! Up to a global sign, facet signs are the signs of the coefficients of the
//! unique affine dependency of the five points, which is what ties the strata
//! to the hull shapes checked by [`structural_check`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::form::{MinkowskiEmbedding, AMBIENT_DIM};
use crate::linalg::{self, det3, Matrix};
use crate::tolerance::Tolerances;

pub type Point3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error("expected 5 points, got {0}")]
    WrongPointCount(usize),
    #[error("array contains a non-finite coordinate")]
    NonFinite,
    #[error("points {0}, {1}, {2} are collinear")]
    Collinear(usize, usize, usize),
    #[error("all five points lie in one plane")]
    Coplanar,
    #[error("facet counts ({n_plus}, {n_zero}, {n_minus}) are inconsistent with a nondegenerate array")]
    InconsistentCounts { n_plus: usize, n_zero: usize, n_minus: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectError {
    #[error("embedding has {0} points, projection needs 5")]
    WrongPointCount(usize),
    #[error("embedding has no timelike axis")]
    NoTimeAxis,
    #[error("direction is not timelike (W(v) = {0:e})")]
    NotTimelike(f64),
    #[error("projected array is degenerate: {0}")]
    Degenerate(#[from] ClassifyError),
}

/// A nondegenerate array of five points in R^3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArrayJson", into = "ArrayJson")]
pub struct Array5R3 {
    pts: [Point3; 5],
    /// Absolute determinant threshold, `degeneracy * scale^3`.
    det_tol: f64,
}

/// Serialized shape: `{"points": [[x, y, z], ...]}` with exactly five rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayJson {
    pub points: Vec<Point3>,
}

impl TryFrom<ArrayJson> for Array5R3 {
    type Error = ClassifyError;

    fn try_from(raw: ArrayJson) -> Result<Self, ClassifyError> {
        let n = raw.points.len();
        let pts: [Point3; 5] = raw.points.try_into().map_err(|_| ClassifyError::WrongPointCount(n))?;
        Array5R3::new(pts, &Tolerances::default())
    }
}

impl From<Array5R3> for ArrayJson {
    fn from(a: Array5R3) -> Self {
        ArrayJson { points: a.pts.to_vec() }
    }
}

fn sub3(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Sorted indices other than `skip`.
fn others(skip: usize) -> [usize; 4] {
    let mut out = [0; 4];
    let mut k = 0;
    for i in 0..5 {
        if i != skip {
            out[k] = i;
            k += 1;
        }
    }
    out
}

impl Array5R3 {
    /// Validates nondegeneracy: no three points collinear, not all five coplanar.
    pub fn new(pts: [Point3; 5], tol: &Tolerances) -> Result<Self, ClassifyError> {
        if pts.iter().flatten().any(|x| !x.is_finite()) {
            return Err(ClassifyError::NonFinite);
        }
        let mut scale = 0.0f64;
        for i in 0..5 {
            for j in (i + 1)..5 {
                scale = scale.max(linalg::norm(&sub3(&pts[i], &pts[j])));
            }
        }
        let det_tol = tol.degeneracy * scale.powi(3);
        let area_tol = tol.degeneracy * scale * scale;
        for i in 0..5 {
            for j in (i + 1)..5 {
                for k in (j + 1)..5 {
                    let c = cross(sub3(&pts[j], &pts[i]), sub3(&pts[k], &pts[i]));
                    if linalg::norm(&c) <= area_tol {
                        return Err(ClassifyError::Collinear(i, j, k));
                    }
                }
            }
        }
        let arr = Self { pts, det_tol };
        if (0..5).all(|i| arr.facet_det(i).abs() <= det_tol) {
            return Err(ClassifyError::Coplanar);
        }
        Ok(arr)
    }

    pub fn points(&self) -> &[Point3; 5] {
        &self.pts
    }

    /// `det[p_j1 - p_j0, p_j2 - p_j0, p_j3 - p_j0]` over the vertices of facet `i`.
    pub fn facet_det(&self, i: usize) -> f64 {
        let [j0, j1, j2, j3] = others(i);
        let p = &self.pts;
        det3(sub3(&p[j1], &p[j0]), sub3(&p[j2], &p[j0]), sub3(&p[j3], &p[j0]))
    }

    /// Determinant threshold below which a facet counts as flat.
    pub fn det_tolerance(&self) -> f64 {
        self.det_tol
    }

    /// Same array with the first coordinate negated (orientation reversal of R^3).
    pub fn reflected(&self) -> Self {
        let mut pts = self.pts;
        for p in &mut pts {
            p[0] = -p[0];
        }
        Self { pts, det_tol: self.det_tol }
    }
}

/// Induced-orientation sign of each facet: `+1`, `0` or `-1`.
pub fn facet_orientations(arr: &Array5R3) -> [i8; 5] {
    let mut signs = [0i8; 5];
    for (i, s) in signs.iter_mut().enumerate() {
        let d = arr.facet_det(i);
        if d.abs() > arr.det_tol {
            let alt = if i % 2 == 0 { 1.0 } else { -1.0 };
            *s = if alt * d > 0.0 { 1 } else { -1 };
        }
    }
    signs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "A_minus")]
    AMinus,
    #[serde(rename = "A_zero")]
    AZero,
    #[serde(rename = "A_plus")]
    APlus,
}

/// Stratum label `A_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Stratum(pub i8);

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A_{}", self.0)
    }
}

impl From<Stratum> for String {
    fn from(s: Stratum) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Stratum {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.strip_prefix("A_")
            .and_then(|m| m.parse::<i8>().ok())
            .filter(|m| (-3..=3).contains(m))
            .map(Stratum)
            .ok_or_else(|| format!("not a stratum label: {s}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationProfile {
    pub facet_signs: [i8; 5],
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
    pub m: i8,
    pub stratum: Stratum,
    pub side: Side,
}

impl OrientationProfile {
    pub fn from_signs(facet_signs: [i8; 5]) -> Result<Self, ClassifyError> {
        let n_plus = facet_signs.iter().filter(|&&s| s > 0).count();
        let n_minus = facet_signs.iter().filter(|&&s| s < 0).count();
        let n_zero = 5 - n_plus - n_minus;
        if n_plus == 0 || n_minus == 0 || n_zero > 1 {
            return Err(ClassifyError::InconsistentCounts { n_plus, n_zero, n_minus });
        }
        let m = n_minus as i8 - n_plus as i8;
        let side = match m {
            m if m < 0 => Side::AMinus,
            0 => Side::AZero,
            _ => Side::APlus,
        };
        Ok(Self { facet_signs, n_plus, n_zero, n_minus, m, stratum: Stratum(m), side })
    }

    /// `(n_plus, n_zero, n_minus)`.
    pub fn triple(&self) -> (usize, usize, usize) {
        (self.n_plus, self.n_zero, self.n_minus)
    }
}

pub fn classify(arr: &Array5R3) -> Result<OrientationProfile, ClassifyError> {
    OrientationProfile::from_signs(facet_orientations(arr))
}

/// Orientation determinant of the simplex in R^4, `det[x_1 - x_0, ..., x_4 - x_0]`.
pub fn simplex_orientation(emb: &MinkowskiEmbedding) -> f64 {
    let x = &emb.coords;
    let m = Matrix::from_fn(AMBIENT_DIM, AMBIENT_DIM, |r, c| x[c + 1][r] - x[0][r]);
    linalg::det(&m)
}

/// Projects the five embedded points along `v` onto the hyperplane spanned by
/// the non-time axes (the W-orthogonal complement of the time axis, kernel
/// axes included), then drops the time coordinate.
///
/// The quotient R^4 / span(v) is oriented so that a basis `b` is positive
/// when `(b, v)` agrees with the orientation of the embedded simplex. With
/// this choice the positively oriented facets of the projection are exactly
/// the facets whose outward normal `n` has `n . v < 0`, i.e. the facets on the
/// lower side with respect to `v`.
pub fn project_along(
    emb: &MinkowskiEmbedding,
    v: &[f64; AMBIENT_DIM],
    tol: &Tolerances,
) -> Result<Array5R3, ProjectError> {
    if emb.len() != 5 {
        return Err(ProjectError::WrongPointCount(emb.len()));
    }
    let t = emb.time_axis.ok_or(ProjectError::NoTimeAxis)?;
    let wv = emb.form(v);
    let vv = v.iter().map(|x| x * x).sum::<f64>();
    if !(wv < -1e-12 * vv) {
        return Err(ProjectError::NotTimelike(wv));
    }
    let keep: Vec<usize> = (0..AMBIENT_DIM).filter(|&k| k != t).collect();
    let mut pts = [[0.0; 3]; 5];
    for (p, x) in pts.iter_mut().zip(&emb.coords) {
        let s = x[t] / v[t];
        for (slot, &k) in keep.iter().enumerate() {
            p[slot] = x[k] - s * v[k];
        }
    }
    // (e_keep, e_t) has orientation (-1)^(t+1) in R^4
    let axis_sign = if t % 2 == 1 { 1.0 } else { -1.0 };
    let flip = simplex_orientation(emb).signum() * v[t].signum() * axis_sign < 0.0;
    if flip {
        for p in &mut pts {
            p[0] = -p[0];
        }
    }
    Ok(Array5R3::new(pts, tol)?)
}

/// Convex-hull shape of a 5-point array, computed without facet signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HullShape {
    /// One point strictly inside the tetrahedron of the other four.
    InteriorPoint(usize),
    /// One point in the relative interior of a face of the other four's tetrahedron.
    PointOnFace(usize),
    /// All five points are hull vertices, six triangular faces.
    Bipyramid,
    /// Four coplanar points in convex position plus an apex.
    QuadPyramid,
    Other,
}

fn barycentric(arr: &Array5R3, i: usize) -> Option<([f64; 4], f64)> {
    let [a, b, c, d] = others(i);
    let p = arr.points();
    let cols = [sub3(&p[b], &p[a]), sub3(&p[c], &p[a]), sub3(&p[d], &p[a])];
    let m = Matrix::from_fn(3, 3, |r, k| cols[k][r]);
    let vol = linalg::det(&m);
    let rhs = sub3(&p[i], &p[a]);
    let x = linalg::solve(&m, &rhs, 1e-14).ok()?;
    Some(([1.0 - x[0] - x[1] - x[2], x[0], x[1], x[2]], vol.abs()))
}

fn orient(p: &[Point3; 5], a: usize, b: usize, c: usize, d: usize) -> f64 {
    det3(sub3(&p[b], &p[a]), sub3(&p[c], &p[a]), sub3(&p[d], &p[a]))
}

pub fn hull_shape(arr: &Array5R3) -> HullShape {
    let p = arr.points();
    let tol = arr.det_tolerance();
    // a point inside the closed tetrahedron of the others is not a hull vertex
    for i in 0..5 {
        let Some((bary, vol)) = barycentric(arr, i) else { continue };
        // barycentric coordinate times tetrahedron volume is a sub-volume determinant
        let zero = |l: f64| (l * vol).abs() <= tol;
        if bary.iter().all(|&l| l > 0.0 || zero(l)) {
            let zeros = bary.iter().filter(|&&l| zero(l)).count();
            return match zeros {
                0 => HullShape::InteriorPoint(i),
                1 => HullShape::PointOnFace(i),
                _ => HullShape::Other,
            };
        }
    }
    // all five are vertices: look for a coplanar quadruple
    let coplanar: Vec<usize> = (0..5)
        .filter(|&skip| {
            let [a, b, c, d] = others(skip);
            orient(p, a, b, c, d).abs() <= tol
        })
        .collect();
    match coplanar.len() {
        0 => {
            let faces = count_hull_faces(p, tol);
            if faces == 6 {
                HullShape::Bipyramid
            } else {
                HullShape::Other
            }
        }
        1 => HullShape::QuadPyramid,
        _ => HullShape::Other,
    }
}

/// Triangles whose plane has the remaining two points strictly on one side.
fn count_hull_faces(p: &[Point3; 5], tol: f64) -> usize {
    let mut faces = 0;
    for a in 0..5 {
        for b in (a + 1)..5 {
            for c in (b + 1)..5 {
                let rest: Vec<f64> = (0..5)
                    .filter(|&k| k != a && k != b && k != c)
                    .map(|k| orient(p, a, b, c, k))
                    .collect();
                if rest.iter().all(|&s| s > tol) || rest.iter().all(|&s| s < -tol) {
                    faces += 1;
                }
            }
        }
    }
    faces
}

/// Checks a profile against the hull shape: `|m| = 3` one point strictly
/// inside, `|m| = 2` one point on a face, `|m| = 1` a bipyramid, `m = 0` a
/// pyramid over a convex quadrilateral.
pub fn structural_check(arr: &Array5R3, profile: &OrientationProfile) -> bool {
    if profile.n_plus + profile.n_zero + profile.n_minus != 5
        || profile.m != profile.n_minus as i8 - profile.n_plus as i8
    {
        return false;
    }
    matches!(
        (profile.m.unsigned_abs(), hull_shape(arr)),
        (3, HullShape::InteriorPoint(_))
            | (2, HullShape::PointOnFace(_))
            | (1, HullShape::Bipyramid)
            | (0, HullShape::QuadPyramid)
    )
}
