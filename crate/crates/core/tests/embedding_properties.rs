mod common;

use cat5_core::classify::{facet_orientations, hull_shape, project_along, structural_check};
use cat5_core::complex::{choose_time_orientation, facet_omitting, facet_side_test, outward_normal};
use cat5_core::form::{euclidean_embedding, minkowski_embedding, AMBIENT_DIM};
use cat5_core::linalg::det3;
use cat5_core::{
    associated_form, classify, eigendecompose, Array5R3, ClassifyError, FacetSide, MinkowskiEmbedding, Point3,
    FiniteMetricSpace, Side, Tolerances,
};
use common::{euclid, mixed_space, space_from_points, tree_space};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// The first tree metric at or after `seed` whose associated form has exactly
/// one negative eigenvalue, with its Minkowski embedding.
fn lorentzian_tree(n: usize, seed: u64) -> (FiniteMetricSpace, MinkowskiEmbedding) {
    for s in seed..seed.wrapping_add(200) {
        let space = tree_space(n, s);
        let form = associated_form(&space, n - 1).unwrap();
        let spectrum = eigendecompose(&form, &tol()).unwrap();
        if spectrum.signature.negative == 1 {
            let emb = minkowski_embedding(&spectrum, &form).unwrap();
            return (space, emb);
        }
    }
    panic!("no Lorentzian tree metric among 200 consecutive seeds from {seed}");
}

fn tree_embedding(seed: u64) -> MinkowskiEmbedding {
    lorentzian_tree(5, seed).1
}

/// A timelike direction: the time axis plus a tilt of Euclidean size below one
/// (in units of the time component), with arbitrary kernel components.
fn timelike(emb: &MinkowskiEmbedding, time_sign: f64, tilt: &[f64; AMBIENT_DIM], lean: f64) -> [f64; AMBIENT_DIM] {
    let t = emb.time_axis.unwrap();
    let space: Vec<usize> = emb.space_axes().collect();
    let len = space.iter().map(|&k| tilt[k] * tilt[k]).sum::<f64>().sqrt().max(1e-12);
    let mut v = *tilt;
    for &k in &space {
        v[k] = tilt[k] / len * lean;
    }
    v[t] = time_sign;
    v
}

fn arrays() -> impl Strategy<Value = [Point3; 5]> {
    prop::array::uniform5(prop::array::uniform3(-1.0f64..1.0))
}

fn orient(p: &[Point3; 5], a: usize, b: usize, c: usize, d: usize) -> f64 {
    let s = |i: usize| [p[i][0] - p[a][0], p[i][1] - p[a][1], p[i][2] - p[a][2]];
    det3(s(b), s(c), s(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn form_reproduces_squared_distances(n in 3usize..=6, seed in any::<u64>(), base in 0usize..8) {
        let space = mixed_space(n, seed);
        let base = base % n;
        let form = associated_form(&space, base).unwrap();
        let scale = space.diameter().powi(2);
        for i in 0..n {
            for j in 0..n {
                let d2 = space.dist(i, j).powi(2);
                prop_assert!((form.eval_edge(i, j) - d2).abs() <= 1e-12 * scale, "({i},{j})");
            }
        }
    }

    #[test]
    fn signature_does_not_depend_on_the_base_point(n in 3usize..=6, seed in any::<u64>()) {
        let space = mixed_space(n, seed);
        let sig = |b| eigendecompose(&associated_form(&space, b).unwrap(), &tol()).unwrap().signature;
        let first = sig(0);
        for b in 1..n {
            prop_assert_eq!(sig(b), first, "base {}", b);
        }
    }

    #[test]
    fn euclidean_embedding_round_trip(pts in (1usize..=4).prop_flat_map(|k| prop::collection::vec(prop::collection::vec(-1.0f64..1.0, k), 5))) {
        let Some(space) = space_from_points(&pts) else { return Ok(()) };
        let form = associated_form(&space, 4).unwrap();
        let spectrum = eigendecompose(&form, &tol()).unwrap();
        prop_assume!(spectrum.signature.negative == 0);
        let emb = euclidean_embedding(&spectrum, &form).unwrap();
        for i in 0..5 {
            for j in (i + 1)..5 {
                let got = euclid(&emb.coords[i], &emb.coords[j]);
                prop_assert!((got - space.dist(i, j)).abs() <= 1e-9 * space.dist(i, j));
            }
        }
    }

    #[test]
    fn minkowski_embedding_round_trip(n in 4usize..=5, seed in any::<u64>()) {
        let (space, emb) = lorentzian_tree(n, seed);
        prop_assert!(emb.max_relative_residual(&space) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn orientation_counts_obey_the_constraints(pts in arrays()) {
        let arr = match Array5R3::new(pts, &tol()) {
            Ok(a) => a,
            Err(ClassifyError::Collinear(..) | ClassifyError::Coplanar) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let p = classify(&arr).unwrap();
        prop_assert_eq!(p.n_plus + p.n_zero + p.n_minus, 5);
        prop_assert!(p.n_plus >= 1 && p.n_minus >= 1 && p.n_zero <= 1);
        prop_assert!(p.m.abs() <= 3);
        prop_assert!(structural_check(&arr, &p), "{:?} vs {:?}", p, hull_shape(&arr));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reflection_negates_m(pts in arrays()) {
        let Ok(arr) = Array5R3::new(pts, &tol()) else { return Ok(()) };
        let p = classify(&arr).unwrap();
        let q = classify(&arr.reflected()).unwrap();
        prop_assert_eq!(q.m, -p.m);
    }

    #[test]
    fn facet_pairs_agree_with_plane_sides(pts in arrays()) {
        let Ok(arr) = Array5R3::new(pts, &tol()) else { return Ok(()) };
        let signs = facet_orientations(&arr);
        let eps = arr.det_tolerance();
        for i in 0..5 {
            for j in (i + 1)..5 {
                if signs[i] == 0 || signs[j] == 0 {
                    continue;
                }
                let shared: Vec<usize> = (0..5).filter(|&k| k != i && k != j).collect();
                let si = orient(&pts, shared[0], shared[1], shared[2], i);
                let sj = orient(&pts, shared[0], shared[1], shared[2], j);
                if si.abs() <= eps || sj.abs() <= eps {
                    continue;
                }
                let opposite = si.signum() != sj.signum();
                prop_assert_eq!(signs[i] == signs[j], opposite, "facets {} and {}", i, j);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projected_triangles_never_collapse(
        seed in any::<u64>(),
        tilt in prop::array::uniform4(-1.0f64..1.0),
        lean in 0.0f64..0.95,
        past in any::<bool>(),
    ) {
        let emb = tree_embedding(seed);
        let v = timelike(&emb, if past { -1.0 } else { 1.0 }, &tilt, lean);
        match project_along(&emb, &v, &tol()) {
            Ok(_) => {}
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        }
    }

    #[test]
    fn side_is_constant_along_timelike_paths(
        seed in any::<u64>(),
        a in prop::array::uniform4(-1.0f64..1.0),
        b in prop::array::uniform4(-1.0f64..1.0),
        lean_a in 0.0f64..0.95,
        lean_b in 0.0f64..0.95,
    ) {
        let emb = tree_embedding(seed);
        let va = timelike(&emb, 1.0, &a, lean_a);
        let vb = timelike(&emb, 1.0, &b, lean_b);
        let mut sides = Vec::new();
        for k in 0..=40 {
            let s = k as f64 / 40.0;
            let v: [f64; AMBIENT_DIM] = std::array::from_fn(|i| (1.0 - s) * va[i] + s * vb[i]);
            prop_assert!(emb.form(&v) < 0.0);
            let Ok(arr) = project_along(&emb, &v, &tol()) else { return Ok(()) };
            let p = classify(&arr).unwrap();
            if p.side == Side::AZero {
                return Ok(());
            }
            sides.push(p.side);
        }
        prop_assert!(sides.windows(2).all(|w| w[0] == w[1]), "{:?}", sides);
    }

    #[test]
    fn positive_projected_facets_are_lower_for_v(
        seed in any::<u64>(),
        tilt in prop::array::uniform4(-1.0f64..1.0),
        lean in 0.0f64..0.95,
        past in any::<bool>(),
    ) {
        let emb = tree_embedding(seed);
        let v = timelike(&emb, if past { -1.0 } else { 1.0 }, &tilt, lean);
        let arr = project_along(&emb, &v, &tol()).unwrap();
        let signs = facet_orientations(&arr);
        for (i, &s) in signs.iter().enumerate() {
            let n = outward_normal(&emb, i).unwrap();
            let nv: f64 = n.iter().zip(&v).map(|(a, b)| a * b).sum();
            if s == 0 || nv.abs() <= 1e-9 {
                continue;
            }
            prop_assert_eq!(s == 1, nv < 0.0, "facet {} n.v = {}", i, nv);
        }
    }

    #[test]
    fn flipping_time_swaps_lower_and_upper(seed in any::<u64>()) {
        let emb = tree_embedding(seed);
        let Ok((orient, _)) = choose_time_orientation(&emb, &tol()) else { return Ok(()) };
        for omit in 0..5 {
            let f = facet_omitting(omit);
            let here = facet_side_test(&emb, f, orient, &tol()).unwrap();
            let there = facet_side_test(&emb, f, orient.flipped(), &tol()).unwrap();
            let expected = match here {
                FacetSide::Lower => FacetSide::Upper,
                FacetSide::Upper => FacetSide::Lower,
                FacetSide::Timelike => FacetSide::Timelike,
            };
            prop_assert_eq!(there, expected);
        }
    }
}
