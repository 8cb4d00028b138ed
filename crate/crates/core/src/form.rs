//! The quadratic form associated to a point array, its signature, and
//! coordinate realizations.
//!
//! For points `x_0..x_{n-1}` with a chosen base point `b`, take the standard
//! simplex whose vertex `v_b` sits at the origin and whose other vertices form
//! the standard basis (in ascending index order). The form is fixed by
//! `W(v_i - v_j) = d(x_i, x_j)^2`, which in that basis gives the Gram-type
//! matrix `B[i][j] = (d(i,b)^2 + d(j,b)^2 - d(i,j)^2) / 2`.
//!
//! The array embeds isometrically in Euclidean space exactly when `W >= 0`.
//! With one negative eigenvalue the same diagonalization places the points in
//! a Minkowski space instead.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{symmetric_eigen, EigenError};
use crate::linalg::Matrix;
use crate::metric::FiniteMetricSpace;
use crate::tolerance::Tolerances;

/// Ambient dimension of the embeddings (the 4-simplex lives in R^4).
pub const AMBIENT_DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("base index {base} out of range for {n} points")]
    BaseOutOfRange { base: usize, n: usize },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("form has dimension {0}; coordinates are only produced up to dimension {AMBIENT_DIM}")]
    TooManyPoints(usize),
    #[error("form is not positive semidefinite ({0} negative eigenvalues)")]
    NotPsd(usize),
    #[error("form has {0} negative eigenvalues; at most one is compatible with the CAT(0) comparison")]
    TooManyNegativeEigenvalues(usize),
    #[error("form has no negative eigenvalue; use the Euclidean embedding")]
    NoNegativeEigenvalue,
}

/// `B` in the basis `v_i - v_base`, rows/columns ordered by `indices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub base_index: usize,
    /// Point index carried by each row of `matrix`.
    pub indices: Vec<usize>,
    pub matrix: Matrix,
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `W(v)` for a coefficient vector in the form's basis.
    pub fn eval(&self, v: &[f64]) -> f64 {
        let bv = self.matrix.mul_vec(v);
        crate::linalg::dot(v, &bv)
    }

    /// `W(v_i - v_j)` for point indices `i`, `j`.
    pub fn eval_edge(&self, i: usize, j: usize) -> f64 {
        let mut v = vec![0.0; self.dim()];
        if let Some(r) = self.row_of(i) {
            v[r] += 1.0;
        }
        if let Some(r) = self.row_of(j) {
            v[r] -= 1.0;
        }
        self.eval(&v)
    }

    /// Row of point `i`, or `None` for the base point.
    pub fn row_of(&self, i: usize) -> Option<usize> {
        self.indices.iter().position(|&k| k == i)
    }
}

pub fn associated_form(space: &FiniteMetricSpace, base_index: usize) -> Result<QuadraticForm, FormError> {
    let n = space.len();
    if base_index >= n {
        return Err(FormError::BaseOutOfRange { base: base_index, n });
    }
    let indices: Vec<usize> = (0..n).filter(|&i| i != base_index).collect();
    let sq = |i: usize, j: usize| space.dist(i, j) * space.dist(i, j);
    let matrix = Matrix::from_fn(n - 1, n - 1, |r, c| {
        let (i, j) = (indices[r], indices[c]);
        0.5 * (sq(i, base_index) + sq(j, base_index) - sq(i, j))
    });
    Ok(QuadraticForm { base_index, indices, matrix })
}

/// Form with the last point as base.
pub fn default_form(space: &FiniteMetricSpace) -> QuadraticForm {
    associated_form(space, space.len() - 1).expect("last index is always in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub frame: Matrix,
    pub signature: Signature,
    pub zero_tol: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `+1`, `0` or `-1` per eigenvalue.
    pub fn signs(&self) -> Vec<i8> {
        self.eigenvalues.iter().map(|&l| classify_eigenvalue(l, self.zero_tol)).collect()
    }
}

fn classify_eigenvalue(l: f64, zero_tol: f64) -> i8 {
    if l > zero_tol {
        1
    } else if l < -zero_tol {
        -1
    } else {
        0
    }
}

pub fn eigendecompose(form: &QuadraticForm, tol: &Tolerances) -> Result<Spectrum, FormError> {
    let eig = symmetric_eigen(&form.matrix)?;
    let radius = eig.values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let zero_tol = tol.zero * radius.max(1.0);
    let mut signature = Signature { positive: 0, zero: 0, negative: 0 };
    for &l in &eig.values {
        match classify_eigenvalue(l, zero_tol) {
            1 => signature.positive += 1,
            -1 => signature.negative += 1,
            _ => signature.zero += 1,
        }
    }
    Ok(Spectrum { eigenvalues: eig.values, frame: eig.vectors, signature, zero_tol })
}

pub fn is_euclidean(spectrum: &Spectrum) -> bool {
    spectrum.signature.negative == 0
}

/// Points of the array in R^4 together with a diagonal form `diag(metric_signs)`
/// that reproduces every squared distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiEmbedding {
    /// Indexed by point.
    pub coords: Vec<[f64; AMBIENT_DIM]>,
    pub metric_signs: [i8; AMBIENT_DIM],
    pub time_axis: Option<usize>,
}

impl MinkowskiEmbedding {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// The diagonal form evaluated on a vector.
    pub fn form(&self, v: &[f64; AMBIENT_DIM]) -> f64 {
        (0..AMBIENT_DIM).map(|k| f64::from(self.metric_signs[k]) * v[k] * v[k]).sum()
    }

    /// Squared interval between points `i` and `j`.
    pub fn interval(&self, i: usize, j: usize) -> f64 {
        self.form(&sub(&self.coords[i], &self.coords[j]))
    }

    /// Largest relative error `|interval(i,j) - d(i,j)^2| / d(i,j)^2`.
    pub fn max_relative_residual(&self, space: &FiniteMetricSpace) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d2 = space.dist(i, j) * space.dist(i, j);
                worst = worst.max((self.interval(i, j) - d2).abs() / d2);
            }
        }
        worst
    }

    /// Axes with sign `0`.
    pub fn kernel_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..AMBIENT_DIM).filter(|&k| self.metric_signs[k] == 0)
    }

    /// Axes with sign `+1`.
    pub fn space_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..AMBIENT_DIM).filter(|&k| self.metric_signs[k] == 1)
    }
}

#[inline]
pub(crate) fn sub(a: &[f64; AMBIENT_DIM], b: &[f64; AMBIENT_DIM]) -> [f64; AMBIENT_DIM] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn check_dim(form: &QuadraticForm, spectrum: &Spectrum) -> Result<(), FormError> {
    if form.dim() > AMBIENT_DIM {
        return Err(FormError::TooManyPoints(form.dim() + 1));
    }
    debug_assert_eq!(form.dim(), spectrum.dim());
    Ok(())
}

/// Coordinates `coord_k(x_i) = scale_k * frame[row(i)][k]`, base point at the origin.
fn eigen_coordinates(form: &QuadraticForm, spectrum: &Spectrum, scale: &[f64]) -> Vec<[f64; AMBIENT_DIM]> {
    let n = form.dim() + 1;
    let mut coords = vec![[0.0; AMBIENT_DIM]; n];
    for (row, &i) in form.indices.iter().enumerate() {
        for k in 0..spectrum.dim() {
            coords[i][k] = scale[k] * spectrum.frame[(row, k)];
        }
    }
    coords
}

fn padded_signs(spectrum: &Spectrum) -> [i8; AMBIENT_DIM] {
    let mut signs = [0i8; AMBIENT_DIM];
    for (k, s) in spectrum.signs().into_iter().enumerate() {
        signs[k] = s;
    }
    signs
}

/// Euclidean coordinates `diag(sqrt λ) * frame`; kernel axes are identically zero.
pub fn euclidean_embedding(spectrum: &Spectrum, form: &QuadraticForm) -> Result<MinkowskiEmbedding, FormError> {
    if !is_euclidean(spectrum) {
        return Err(FormError::NotPsd(spectrum.signature.negative));
    }
    check_dim(form, spectrum)?;
    let signs = padded_signs(spectrum);
    let scale: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .zip(&signs)
        .map(|(&l, &s)| if s == 1 { l.sqrt() } else { 0.0 })
        .collect();
    Ok(MinkowskiEmbedding {
        coords: eigen_coordinates(form, spectrum, &scale),
        metric_signs: signs,
        time_axis: None,
    })
}

/// Coordinates in the eigenframe scaled by `sqrt|λ|`, with one timelike axis.
///
/// Kernel axes keep the unscaled frame coordinate (their sign is `0`, so they
/// never contribute to an interval). This keeps the image of the simplex
/// full-dimensional, which the facet normals downstream rely on.
pub fn minkowski_embedding(spectrum: &Spectrum, form: &QuadraticForm) -> Result<MinkowskiEmbedding, FormError> {
    match spectrum.signature.negative {
        0 => return Err(FormError::NoNegativeEigenvalue),
        1 => {}
        k => return Err(FormError::TooManyNegativeEigenvalues(k)),
    }
    check_dim(form, spectrum)?;
    let signs = padded_signs(spectrum);
    let scale: Vec<f64> = spectrum
        .eigenvalues
        .iter()
        .zip(&signs)
        .map(|(&l, &s)| if s == 0 { 1.0 } else { l.abs().sqrt() })
        .collect();
    let time_axis = signs.iter().position(|&s| s == -1);
    Ok(MinkowskiEmbedding { coords: eigen_coordinates(form, spectrum, &scale), metric_signs: signs, time_axis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;

    fn tripod() -> FiniteMetricSpace {
        // tips 0..=2, center 3
        validate_metric(&[
            vec![0.0, 2.0, 2.0, 1.0],
            vec![2.0, 0.0, 2.0, 1.0],
            vec![2.0, 2.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    fn regular(n: usize) -> FiniteMetricSpace {
        let rows: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        validate_metric(&rows).unwrap()
    }

    #[test]
    fn tripod_form_entries() {
        let f = associated_form(&tripod(), 3).unwrap();
        let expect = [[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        for (r, row) in expect.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                assert_eq!(f.matrix[(r, c)], e);
            }
        }
    }

    #[test]
    fn regular_simplex_form_entries() {
        let f = default_form(&regular(5));
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(f.matrix[(r, c)], if r == c { 1.0 } else { 0.5 });
            }
        }
    }

    #[test]
    fn two_point_form() {
        let s = validate_metric(&[vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
        let f = default_form(&s);
        assert_eq!(f.matrix.to_rows(), vec![vec![25.0]]);
    }

    #[test]
    fn tripod_spectrum() {
        // (λ - 2)^2 (λ + 1)
        let sp = eigendecompose(&associated_form(&tripod(), 3).unwrap(), &Tolerances::default()).unwrap();
        let expect = [2.0, 2.0, -1.0];
        for (l, e) in sp.eigenvalues.iter().zip(expect) {
            assert!((l - e).abs() < 1e-12);
        }
        assert_eq!(sp.signature, Signature { positive: 2, zero: 0, negative: 1 });
        assert!(!is_euclidean(&sp));
    }

    #[test]
    fn regular_simplex_spectrum() {
        // 0.5 I + 0.5 J
        let sp = eigendecompose(&default_form(&regular(5)), &Tolerances::default()).unwrap();
        let expect = [2.5, 0.5, 0.5, 0.5];
        for (l, e) in sp.eigenvalues.iter().zip(expect) {
            assert!((l - e).abs() < 1e-12);
        }
        assert_eq!(sp.signature, Signature { positive: 4, zero: 0, negative: 0 });
        assert!(is_euclidean(&sp));
    }

    #[test]
    fn zero_form_signature() {
        let f = QuadraticForm { base_index: 3, indices: vec![0, 1, 2], matrix: Matrix::zeros(3, 3) };
        let sp = eigendecompose(&f, &Tolerances::default()).unwrap();
        assert_eq!(sp.signature, Signature { positive: 0, zero: 3, negative: 0 });
        assert!(is_euclidean(&sp));
    }

    #[test]
    fn regular_simplex_embeds_with_unit_edges() {
        let s = regular(5);
        let f = default_form(&s);
        let sp = eigendecompose(&f, &Tolerances::default()).unwrap();
        let e = euclidean_embedding(&sp, &f).unwrap();
        assert_eq!(e.metric_signs, [1, 1, 1, 1]);
        assert_eq!(e.coords[4], [0.0; 4]);
        assert!(e.max_relative_residual(&s) < 1e-9);
    }

    #[test]
    fn collinear_points_embed_in_rank_one() {
        let rows: Vec<Vec<f64>> =
            (0..5).map(|i| (0..5).map(|j| (i as f64 - j as f64).abs()).collect()).collect();
        let s = validate_metric(&rows).unwrap();
        let f = default_form(&s);
        let sp = eigendecompose(&f, &Tolerances::default()).unwrap();
        let e = euclidean_embedding(&sp, &f).unwrap();
        assert_eq!(e.metric_signs, [1, 0, 0, 0]);
        assert!(e.max_relative_residual(&s) < 1e-9);
    }

    #[test]
    fn tripod_minkowski_signs_are_padded() {
        let f = associated_form(&tripod(), 3).unwrap();
        let sp = eigendecompose(&f, &Tolerances::default()).unwrap();
        let e = minkowski_embedding(&sp, &f).unwrap();
        assert_eq!(e.metric_signs, [1, 1, -1, 0]);
        assert_eq!(e.time_axis, Some(2));
        assert!(e.max_relative_residual(&tripod()) < 1e-9);
    }

    #[test]
    fn minkowski_rejects_psd() {
        let f = default_form(&regular(4));
        let sp = eigendecompose(&f, &Tolerances::default()).unwrap();
        assert_eq!(minkowski_embedding(&sp, &f), Err(FormError::NoNegativeEigenvalue));
        let t = associated_form(&tripod(), 3).unwrap();
        let spt = eigendecompose(&t, &Tolerances::default()).unwrap();
        assert_eq!(euclidean_embedding(&spt, &t), Err(FormError::NotPsd(1)));
    }

    #[test]
    fn base_out_of_range() {
        assert_eq!(associated_form(&tripod(), 4), Err(FormError::BaseOutOfRange { base: 4, n: 4 }));
    }
}
