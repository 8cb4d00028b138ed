#![allow(dead_code)]

use cat5_core::{random_metric, FiniteMetricSpace, MetricKind};

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn space_from_points(pts: &[Vec<f64>]) -> Option<FiniteMetricSpace> {
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| pts.iter().map(|q| euclid(p, q)).collect()).collect();
    cat5_core::validate_metric(&rows).ok()
}

pub fn tree_space(n: usize, seed: u64) -> FiniteMetricSpace {
    random_metric(MetricKind::Tree, n, seed).expect("tree generator never rejects")
}

pub fn mixed_space(n: usize, seed: u64) -> FiniteMetricSpace {
    random_metric(MetricKind::Mixed, n, seed).expect("mixed generator at small n")
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

pub fn fixture_space(name: &str) -> FiniteMetricSpace {
    serde_json::from_str(&fixture(name)).unwrap()
}
