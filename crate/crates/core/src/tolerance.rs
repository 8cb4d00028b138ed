//! Numerical tolerances shared by the pipeline stages.

use serde::{Deserialize, Serialize};

/// Every threshold the pipeline compares against. All values are relative;
/// each consumer documents what it scales them by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Comparison slack allowance, times the space diameter.
    pub compare: f64,
    /// Eigenvalues with `|λ| <= zero * max(1, max|λ|)` count as zero.
    pub zero: f64,
    /// Facet determinants below `degeneracy * (max pairwise distance)^3` count as flat.
    pub degeneracy: f64,
    /// Slack on the spacelike/lightlike boundary when testing supporting hyperplanes.
    pub spacelike: f64,
    /// Relative residual allowed when checking that edge lengths reproduce the metric.
    pub distance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { compare: 1e-9, zero: 1e-9, degeneracy: 1e-10, spacelike: 1e-9, distance: 1e-9 }
    }
}
