//! Acceptance suite: nine criteria at their stated sample sizes and
//! tolerances. Each prints one PASS/FAIL line; the process exits nonzero if
//! any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use cat5_core::classify::structural_check;
use cat5_core::complex::{exits_along_past, facet_omitting, facet_side_test};
use cat5_core::form::AMBIENT_DIM;
use cat5_core::verify::geodesic_upper_bounds;
use cat5_core::{
    c4_equivalence_check, cat0_comparison_all, classify, cycle_implication_check, hunt_counterexamples,
    random_metric, toyoda_embed, Array5R3, Branch, ClassifyError,
    EmbedError, EmbeddingResult, FacetSide, FiniteMetricSpace, GammaSettings, HuntConfig, HuntPredicate,
    MetricKind, Side, Tolerances,
};
use common::{fixture, fixture_space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn relative_edge_residual(result: &EmbeddingResult) -> f64 {
    let s = &result.space;
    let mut worst = 0.0f64;
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            worst = worst.max((result.complex.edge_lengths[i][j] - s.dist(i, j)).abs() / s.dist(i, j));
        }
    }
    worst
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    common::euclid(a, b)
}

/// Samples kept across criteria 1-3.
#[derive(Default)]
struct Pool {
    /// Comparison-passing spaces with their pipeline outcome.
    passing: Vec<(String, FiniteMetricSpace, Result<EmbeddingResult, EmbedError>)>,
}

fn criterion_1(pool: &mut Pool) -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (k, seeds) in [(3usize, 0..500u64), (4, 500..1000)] {
        for seed in seeds {
            let space = random_metric(MetricKind::Euclidean { k }, 5, seed).unwrap();
            let result = toyoda_embed(&space, &tol());
            match &result {
                Ok(r) if r.complex.branch == Branch::EuclideanFullSimplex => {
                    let c = &r.embedding.coords;
                    for i in 0..5 {
                        for j in (i + 1)..5 {
                            let e = (euclid(&c[i], &c[j]) - space.dist(i, j)).abs() / space.dist(i, j);
                            worst = worst.max(e);
                            if e > 1e-9 {
                                failures.push(format!("euclidean_{k} seed {seed}: edge {i}-{j} residual {e:e}"));
                            }
                        }
                    }
                }
                Ok(r) => failures.push(format!("euclidean_{k} seed {seed}: branch {:?}", r.complex.branch)),
                Err(e) => failures.push(format!("euclidean_{k} seed {seed}: {e}")),
            }
            pool.passing.push((format!("euclidean_{k}/{seed}"), space, result));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("1000 samples, {} failures, worst relative residual {worst:.2e}{}", failures.len(), first(&failures)),
    )
}

fn first(failures: &[String]) -> String {
    failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
}

fn criterion_2(pool: &mut Pool) -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..1000u64 {
        let space = random_metric(MetricKind::Tree, 5, seed).unwrap();
        let cmp = cat0_comparison_all(&space, &tol());
        if !cmp.holds {
            failures.push(format!("tree seed {seed}: comparison fails, worst {:?}", cmp.worst));
            continue;
        }
        let result = toyoda_embed(&space, &tol());
        match &result {
            Ok(r) => {
                let e = relative_edge_residual(r);
                worst = worst.max(e);
                if e.is_nan() || e >= 1e-8 {
                    failures.push(format!("tree seed {seed}: edge residual {e:e}"));
                }
            }
            Err(e) => failures.push(format!("tree seed {seed}: {e}")),
        }
        pool.passing.push((format!("tree/{seed}"), space, result));
    }
    let tripod = fixture_space("tripod_extension.json");
    let tripod_ok = match toyoda_embed(&tripod, &tol()) {
        Ok(r) => r.complex.branch == Branch::MinkowskiLowerBoundary && r.diagnostics.signature.negative == 1,
        Err(_) => false,
    };
    if !tripod_ok {
        failures.push("tripod extension does not take the Minkowski branch with one negative eigenvalue".into());
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "1000 tree samples, {} failures, worst edge residual {worst:.2e}, tripod extension Minkowski with n_neg = 1: {tripod_ok}{}",
            failures.len(),
            first(&failures)
        ),
    )
}

fn criterion_3(pool: &mut Pool) -> Outcome {
    let mut skipped = 0;
    for seed in 0..1000u64 {
        let space = random_metric(MetricKind::PerturbedTree { delta: 0.05 }, 5, seed).unwrap();
        if !cat0_comparison_all(&space, &tol()).holds {
            skipped += 1;
            continue;
        }
        let result = toyoda_embed(&space, &tol());
        pool.passing.push((format!("perturbed_tree/{seed}"), space, result));
    }
    let mut violations = Vec::new();
    let mut projected = 0;
    for (label, _, result) in &pool.passing {
        match result {
            Ok(r) => {
                if r.diagnostics.signature.negative > 1 {
                    violations.push(format!("{label}: n_neg = {}", r.diagnostics.signature.negative));
                }
                if let Some(p) = &r.profile {
                    projected += 1;
                    if p.side == Side::AZero {
                        violations.push(format!("{label}: projection in A_0"));
                    }
                }
            }
            Err(EmbedError::TooManyNegativeEigenvalues(k)) => violations.push(format!("{label}: n_neg = {k}")),
            Err(EmbedError::StratumA0(_)) => violations.push(format!("{label}: projection in A_0")),
            Err(e) => violations.push(format!("{label}: pipeline error {e}")),
        }
    }
    Outcome::new(
        violations.is_empty(),
        format!(
            "{} comparison-passing samples ({} perturbed-tree samples failed the comparison and were excluded), {projected} projected, {} violations{}",
            pool.passing.len(),
            skipped,
            violations.len(),
            first(&violations)
        ),
    )
}

fn fixture_array(name: &str) -> Array5R3 {
    serde_json::from_str(&fixture(name)).unwrap()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut samples = 0;
    let mut count_failures = 0;
    let mut structural_failures = 0;
    let mut rejected = 0;
    while samples < 10_000 {
        let pts: [[f64; 3]; 5] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let arr = match Array5R3::new(pts, &tol()) {
            Ok(a) => a,
            Err(ClassifyError::Collinear(..) | ClassifyError::Coplanar) => {
                rejected += 1;
                continue;
            }
            Err(e) => panic!("unexpected array error {e}"),
        };
        samples += 1;
        match classify(&arr) {
            Ok(p) => {
                let ok = p.n_plus + p.n_zero + p.n_minus == 5
                    && p.n_plus >= 1
                    && p.n_minus >= 1
                    && p.n_zero <= 1
                    && p.m.abs() <= 3;
                count_failures += usize::from(!ok);
                structural_failures += usize::from(!structural_check(&arr, &p));
            }
            Err(_) => count_failures += 1,
        }
    }
    let mut fixtures_ok = true;
    let mut fixture_notes = Vec::new();
    for (name, triple) in
        [("array_inside.json", (1, 0, 4)), ("array_on_facet.json", (1, 1, 3)), ("array_square_pyramid.json", (2, 1, 2))]
    {
        let arr = fixture_array(name);
        let p = classify(&arr).unwrap();
        let reversed = (triple.2, triple.1, triple.0);
        let ok = (p.triple() == triple || p.triple() == reversed) && structural_check(&arr, &p);
        fixtures_ok &= ok;
        fixture_notes.push(format!("{name} -> {:?}", p.triple()));
    }
    let passed = count_failures == 0 && structural_failures == 0 && fixtures_ok;
    Outcome::new(
        passed,
        format!(
            "10000 arrays ({rejected} degenerate draws redrawn): {count_failures} count violations, {structural_failures} structural disagreements; fixtures [{}] (triples compared up to orientation reversal)",
            fixture_notes.join(", ")
        ),
    )
}

/// A random direction in the future cone: spatial part strictly inside the
/// unit ball (time component `±1`), arbitrary kernel components.
fn future_direction(result: &EmbeddingResult, rng: &mut ChaCha8Rng) -> [f64; AMBIENT_DIM] {
    let emb = &result.embedding;
    let t = emb.time_axis.unwrap();
    let tau = f64::from(result.orientation.unwrap().time_sign);
    loop {
        let mut v: [f64; AMBIENT_DIM] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let space: Vec<usize> = emb.space_axes().collect();
        for &k in &space {
            v[k] = rng.gen_range(-1.0..1.0);
        }
        let r2: f64 = space.iter().map(|&k| v[k] * v[k]).sum();
        if r2 < 0.98 {
            v[t] = tau;
            return v;
        }
    }
}

/// Per facet: Lower facets must exit along every past direction, Upper facets
/// never. Returns (facets checked, disagreements, min |Σ⁻(v)| facets over v).
fn membership_oracle(result: &EmbeddingResult, rng: &mut ChaCha8Rng, directions: usize) -> (usize, usize, usize) {
    let emb = &result.embedding;
    let orient = result.orientation.unwrap();
    let sides: Vec<FacetSide> =
        (0..5).map(|i| facet_side_test(emb, facet_omitting(i), orient, &tol()).unwrap()).collect();
    let mut disagreements = 0;
    let mut min_lower_v = usize::MAX;
    for _ in 0..directions {
        let v = future_direction(result, rng);
        let mut lower_v = 0;
        for (i, side) in sides.iter().enumerate() {
            let exits = exits_along_past(emb, &facet_omitting(i), &v).unwrap();
            lower_v += usize::from(exits);
            let bad = match side {
                FacetSide::Lower => !exits,
                FacetSide::Upper => exits,
                FacetSide::Timelike => false,
            };
            disagreements += usize::from(bad);
        }
        min_lower_v = min_lower_v.min(lower_v);
    }
    (sides.len(), disagreements, min_lower_v)
}

fn criterion_5(pool: &Pool) -> Outcome {
    let mut runs = 0;
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    let mut uncovered = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut per_direction_min = usize::MAX;
    for (_, _, result) in &pool.passing {
        let Ok(r) = result else { continue };
        if r.complex.branch != Branch::MinkowskiLowerBoundary {
            continue;
        }
        runs += 1;
        *histogram.entry(r.complex.facets.len()).or_default() += 1;
        let all_edges = (0..5).all(|i| ((i + 1)..5).all(|j| r.complex.contains_edge(i, j)));
        uncovered += usize::from(!all_edges);
        let (_, _, m) = membership_oracle(r, &mut rng, 10);
        per_direction_min = per_direction_min.min(m);
    }
    let tripod = toyoda_embed(&fixture_space("tripod_extension.json"), &tol()).unwrap();
    runs += 1;
    *histogram.entry(tripod.complex.facets.len()).or_default() += 1;
    let (facets, disagreements, m) = membership_oracle(&tripod, &mut rng, 100);
    per_direction_min = per_direction_min.min(m);

    let bad_counts: usize = histogram.iter().filter(|(k, _)| !(3..=4).contains(*k)).map(|(_, v)| v).sum();
    let passed = bad_counts == 0 && uncovered == 0 && disagreements == 0;
    Outcome::new(
        passed,
        format!(
            "{runs} Minkowski-branch runs: Lower-facet counts {histogram:?} ({bad_counts} outside {{3,4}}), {uncovered} runs missing an edge; \
             oracle on the tripod extension: {disagreements} disagreements over {facets} facets x 100 directions; \
             every sampled v has >= {per_direction_min} facets in the per-direction lower side"
        ),
    )
}

fn criterion_6() -> Outcome {
    let space = fixture_space("tripod_extension.json");
    let result = toyoda_embed(&space, &tol()).unwrap();
    let bounds: Vec<Vec<Vec<f64>>> =
        [4, 8, 16].iter().map(|&r| geodesic_upper_bounds(&result.complex, r).unwrap()).collect();
    let mut monotone = true;
    let mut below = 0.0f64;
    let mut excess = 0.0f64;
    for i in 0..5 {
        for j in (i + 1)..5 {
            let d = space.dist(i, j);
            monotone &= bounds[1][i][j] <= bounds[0][i][j] && bounds[2][i][j] <= bounds[1][i][j];
            for b in &bounds {
                below = below.max(d - b[i][j]);
            }
            excess = excess.max((bounds[2][i][j] - d) / d);
        }
    }
    let passed = monotone && below <= 1e-9 && excess <= 0.02;
    Outcome::new(
        passed,
        format!(
            "monotone over 4/8/16: {monotone}; max undercut {below:.2e}; max relative excess at 16: {:.3}%",
            excess * 100.0
        ),
    )
}

fn criterion_7() -> Outcome {
    let settings = GammaSettings::default();
    let (mut instances, mut agreements, mut disagreements, mut undecided) = (0, 0, 0, 0);
    for seed in 0..1000u64 {
        let space = random_metric(MetricKind::Mixed, 4, seed).unwrap();
        let report = c4_equivalence_check(&space, &tol(), &settings).unwrap();
        instances += report.instances.len();
        agreements += report.agreements;
        disagreements += report.disagreements;
        undecided += report.undecided;
    }
    let rate = undecided as f64 / instances as f64;
    Outcome::new(
        disagreements == 0 && rate < 0.02,
        format!(
            "1000 metrics, {instances} labelings: {agreements} agree, {disagreements} disagree, {undecided} undecided ({:.2}%)",
            rate * 100.0
        ),
    )
}

fn criterion_8() -> Outcome {
    let settings = GammaSettings::default();
    let (mut spaces, mut feasible, mut infeasible, mut undecided) = (0, 0, 0, 0);
    let mut seed = 0u64;
    while spaces < 200 {
        let space = random_metric(MetricKind::Mixed, 5, seed).unwrap();
        seed += 1;
        let report = cycle_implication_check(&space, 5, &tol(), &settings).unwrap();
        if report.skipped.is_some() {
            continue;
        }
        spaces += 1;
        feasible += report.feasible;
        infeasible += report.infeasible;
        undecided += report.undecided;
    }
    Outcome::new(
        infeasible == 0 && undecided == 0,
        format!(
            "{spaces} comparison-passing spaces ({seed} drawn): {feasible} C_5 labelings feasible, {infeasible} infeasible, {undecided} undecided"
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut cfg = HuntConfig::new(MetricKind::Mixed, 5, 10_000, 2024, HuntPredicate::NegativeIndexAtLeastTwo);
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    let a = hunt_counterexamples(&cfg);
    let b = hunt_counterexamples(&cfg);
    let ja = serde_json::to_string(&a).unwrap();
    let jb = serde_json::to_string(&b).unwrap();
    let identical = ja == jb;
    Outcome::new(
        a.hits.is_empty() && a.errors.is_empty() && identical,
        format!(
            "{} samples, {} applicable, {} hits, {} errors; repeat run byte-identical: {identical}",
            a.samples,
            a.applicable,
            a.hits.len(),
            a.errors.len()
        ),
    )
}

type Criterion = Box<dyn FnOnce(&mut Pool) -> Outcome>;

fn main() -> ExitCode {
    let mut pool = Pool::default();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("Euclidean round trip", Box::new(criterion_1)),
        ("tree-metric pipeline", Box::new(criterion_2)),
        ("negative index at most one, no A_0 projection", Box::new(criterion_3)),
        ("orientation-count combinatorics", Box::new(|_| criterion_4())),
        ("lower-side structure", Box::new(|p| criterion_5(p))),
        ("geodesic upper bounds", Box::new(|_| criterion_6())),
        ("C_4 oracle equivalence", Box::new(|_| criterion_7())),
        ("cycle implication", Box::new(|_| criterion_8())),
        ("hunter consistency", Box::new(|_| criterion_9())),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run(&mut pool);
        failed += usize::from(!outcome.passed);
        println!(
            "criterion {} [{}] {name}: {} ({:.1}s)",
            k + 1,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
