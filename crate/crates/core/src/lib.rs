//! Computational tools for testing the CAT(0) four-point comparison on small
//! finite metric spaces, embedding five-point spaces into Minkowski space as
//! the lower spacelike boundary of a simplex, and checking Γ-comparison
//! feasibility via Gram-matrix alternating projections.

// `!(x > t)` is deliberate: it treats NaN as failing the test. Index loops
// mirror the matrix formulas they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classify;
pub mod complex;
pub mod eigen;
pub mod form;
pub mod gamma;
pub mod linalg;
pub mod metric;
pub mod tolerance;
pub mod verify;

pub use classify::{classify, Array5R3, ClassifyError, OrientationProfile, Point3, Side, Stratum};
pub use complex::{
    toyoda_embed, Branch, ComplexError, ConeOrientation, EmbedError, EmbeddingResult,
    FacetSide, SpacelikeComplex,
};
pub use form::{
    associated_form, eigendecompose, FormError, MinkowskiEmbedding, QuadraticForm, Signature,
    Spectrum,
};
pub use gamma::{
    builtin_graph, c4_equivalence_check, cycle_implication_check, gamma_feasible,
    ComparisonGraph, GammaError, GammaInstance, GammaSettings, GammaStatus, GramWitness, Verdict,
};
pub use linalg::Matrix;
pub use metric::{
    cat0_comparison_all, quad_comparison, validate_metric, ComparisonReport, FiniteMetricSpace,
    Labeling, MetricError, QuadCheckResult,
};
pub use tolerance::Tolerances;
pub use verify::{
    check_complex, hunt_counterexamples, random_metric, HuntConfig, HuntPredicate, HuntReport,
    MetricKind, VerificationReport, VerifyError,
};
