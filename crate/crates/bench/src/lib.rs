//! Deterministic inputs shared by the benchmarks in `benches/`.

use cat5_core::{random_metric, toyoda_embed, Branch, FiniteMetricSpace, MetricKind, SpacelikeComplex, Tolerances};

/// The first `count` spaces of the given kind and size, seeds `0, 1, ...`.
/// Seeds the generator rejects are skipped.
pub fn spaces(kind: MetricKind, n: usize, count: usize) -> Vec<FiniteMetricSpace> {
    (0u64..).filter_map(|seed| random_metric(kind, n, seed).ok()).take(count).collect()
}

/// A 5-point tree-like space whose complex lies on the lower boundary of the
/// hull, paired with that complex.
pub fn lower_boundary_complex() -> (FiniteMetricSpace, SpacelikeComplex) {
    (0u64..)
        .filter_map(|seed| random_metric(MetricKind::PerturbedTree { delta: 0.05 }, 5, seed).ok())
        .find_map(|space| {
            let r = toyoda_embed(&space, &Tolerances::default()).ok()?;
            (r.complex.branch == Branch::MinkowskiLowerBoundary).then_some((space, r.complex))
        })
        .expect("perturbed trees produce Lorentzian spaces")
}
