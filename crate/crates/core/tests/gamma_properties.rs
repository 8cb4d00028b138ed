mod common;

use cat5_core::eigen::symmetric_eigen;
use cat5_core::gamma::{c4_instance, constraint_residual, project_psd};
use cat5_core::{gamma_feasible, ComparisonGraph, GammaSettings, GammaStatus, Labeling, Matrix};
use common::mixed_space;
use proptest::prelude::*;

fn squared(d: &[Vec<f64>]) -> Matrix {
    Matrix::from_fn(d.len(), d.len(), |i, j| d[i][j] * d[i][j])
}

fn max_sq(d: &[Vec<f64>]) -> f64 {
    d.iter().flatten().fold(0.0f64, |m, x| m.max(x * x))
}

fn scaled(d: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    d.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scaling_distances_scales_the_witness(seed in any::<u64>(), pick in 0usize..3) {
        let space = mixed_space(4, seed);
        let l = Labeling::splits(0, 1, 2, 3)[pick];
        let d = c4_instance(&space, l);
        let c4 = ComparisonGraph::cycle(4).unwrap();
        let settings = GammaSettings::default();
        let base = gamma_feasible(&c4, &d, &settings).unwrap();
        for s in [0.5, 2.0, 10.0] {
            let ds = scaled(&d, s);
            let other = gamma_feasible(&c4, &ds, &settings).unwrap();
            let decided = |st| st != GammaStatus::Undecided;
            if decided(base.status) && decided(other.status) {
                prop_assert_eq!(base.status, other.status, "scale {}", s);
            }
            if base.status == GammaStatus::Feasible {
                let g = Matrix::from_rows(&base.gram).scale(s * s);
                let r = constraint_residual(&c4, &squared(&ds), &g);
                prop_assert!(r <= settings.feas_tol * max_sq(&ds), "scale {s}: residual {r}");
            }
        }
    }

    #[test]
    fn shrinking_a_slack_diagonal_keeps_the_witness(seed in any::<u64>(), pick in 0usize..3, frac in 0.0f64..1.0) {
        let space = mixed_space(4, seed);
        let d = c4_instance(&space, Labeling::splits(0, 1, 2, 3)[pick]);
        let c4 = ComparisonGraph::cycle(4).unwrap();
        let settings = GammaSettings::default();
        let w = gamma_feasible(&c4, &d, &settings).unwrap();
        prop_assume!(w.status == GammaStatus::Feasible);
        let g = Matrix::from_rows(&w.gram);
        for [i, j] in c4.non_edges() {
            let slack = w.squared_distance(i, j) - d[i][j] * d[i][j];
            if slack <= 0.0 {
                continue;
            }
            let mut e = d.clone();
            let d2 = d[i][j] * d[i][j] - frac * slack;
            prop_assume!(d2 > 0.0);
            e[i][j] = d2.sqrt();
            e[j][i] = e[i][j];
            let r = constraint_residual(&c4, &squared(&e), &g);
            prop_assert!(r <= settings.feas_tol * max_sq(&d), "pair ({i},{j}): residual {r}");
        }
    }

    #[test]
    fn psd_projection_clips_the_spectrum(entries in prop::collection::vec(-5.0f64..5.0, 36), n in 2usize..=6) {
        let m = Matrix::from_fn(n, n, |i, j| if i <= j { entries[i * 6 + j] } else { entries[j * 6 + i] });
        let p = project_psd(&m).unwrap();
        let eig = symmetric_eigen(&p).unwrap();
        let radius = eig.values.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let min = eig.values.iter().fold(f64::INFINITY, |a, &l| a.min(l));
        prop_assert!(min >= -1e-12 * radius.max(1.0), "min eigenvalue {min}");
        prop_assert!(p.asymmetry() == 0.0);
    }
}

/// Six points whose octahedral antipodes `(0,1)` and `(2,3)` carry the failing
/// quadruple: unit sides, `d(0,1) = 1`, `d(2,3) = 2`.
fn octahedral_with_failing_quadruple(to4: [f64; 4], to5: [f64; 4], d45: f64) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; 6]; 6];
    let mut set = |i: usize, j: usize, v: f64| {
        d[i][j] = v;
        d[j][i] = v;
    };
    for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
        set(i, j, 1.0);
    }
    set(0, 1, 1.0);
    set(2, 3, 2.0);
    for k in 0..4 {
        set(k, 4, to4[k]);
        set(k, 5, to5[k]);
    }
    set(4, 5, d45);
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn octahedral_comparison_is_at_least_as_strong_as_c4(
        to4 in prop::array::uniform4(1.0f64..1.5),
        to5 in prop::array::uniform4(1.0f64..1.5),
        d45 in 1.0f64..2.0,
    ) {
        let d = octahedral_with_failing_quadruple(to4, to5, d45);
        let settings = GammaSettings::default();
        // the induced C_4 on {0, 2, 1, 3} has diagonals {0,1} and {2,3}
        let order = [0, 2, 1, 3];
        let sub: Vec<Vec<f64>> = order.iter().map(|&i| order.iter().map(|&j| d[i][j]).collect()).collect();
        let c4 = gamma_feasible(&ComparisonGraph::cycle(4).unwrap(), &sub, &settings).unwrap();
        prop_assert_eq!(c4.status, GammaStatus::Infeasible);
        let o3 = gamma_feasible(&ComparisonGraph::octahedron(), &d, &settings).unwrap();
        prop_assert_eq!(o3.status, GammaStatus::Infeasible, "residual {}", o3.relative_residual);
    }
}
