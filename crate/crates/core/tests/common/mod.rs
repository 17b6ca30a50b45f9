//! Randomized property suites shared by the property and acceptance targets.

#![allow(dead_code)]

use nashnet::convex::{
    distance, finite_difference, project, subgradient_x, subgradient_y, BoxSet, ObjectiveCatalog, Side,
};
use nashnet::digraph::{
    build_cycle_matrix, disagreement_span, ergodicity_coefficient, limiting_stochastic_vector, perron_vector,
    transition_product, CrossEdge, GeometricRateBound, GraphPhase, GraphSequenceSpec, Matrix, Subnet, Windows,
};
use nashnet::stepsize::{learner_init_common, learner_init_periodic, learner_step_common, learner_step_periodic};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

/// Randomized trials per property.
pub const CASES: u32 = 1000;

fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// Row-normalised matrix from raw weights; `keep` zeroes off-diagonal
/// entries, the diagonal always stays positive.
fn stochastic(n: usize, raw: &[f64], keep: &[bool]) -> Matrix {
    let rows = (0..n)
        .map(|i| {
            let row: Vec<f64> = (0..n)
                .map(|j| if i == j || keep[i * n + j] { raw[i * n + j] } else { 0.0 })
                .collect();
            let s: f64 = row.iter().sum();
            row.iter().map(|v| v / s).collect()
        })
        .collect();
    Matrix::from_rows(rows).unwrap()
}

prop_compose! {
    fn random_stochastic(max_n: usize)(n in 2..=max_n)
        (raw in prop::collection::vec(0.05f64..1.0, n * n), keep in prop::collection::vec(any::<bool>(), n * n), n in Just(n))
        -> Matrix {
        stochastic(n, &raw, &keep)
    }
}

/// A periodic sequence on `n` nodes whose union over a period contains a
/// ring, so it is UJSC with window equal to the period.
#[derive(Debug, Clone)]
pub struct RandomSequence {
    spec: GraphSequenceSpec,
}

prop_compose! {
    fn random_sequence()(n in 2usize..=5, p in 1usize..=3)
        (raw in prop::collection::vec(0.05f64..1.0, p * n * n),
         keep in prop::collection::vec(prop::bool::weighted(0.3), p * n * n),
         n in Just(n), p in Just(p)) -> RandomSequence {
        let mut phases = Vec::new();
        let mut eta = 1.0f64;
        for q in 0..p {
            let mut k = keep[q * n * n..(q + 1) * n * n].to_vec();
            for i in 0..n {
                if i % p == q {
                    k[i * n + (i + n - 1) % n] = true;
                }
            }
            let m = stochastic(n, &raw[q * n * n..(q + 1) * n * n], &k);
            eta = eta.min(m.min_positive().unwrap());
            let mut cross: Vec<CrossEdge> = (0..n)
                .map(|i| CrossEdge { target_subnet: Subnet::First, target: i, source: 0, weight: 1.0 })
                .collect();
            cross.push(CrossEdge { target_subnet: Subnet::Second, target: 0, source: 0, weight: 1.0 });
            phases.push(GraphPhase { first: m, second: Matrix::identity(1), cross });
        }
        let windows = Windows { first: p, second: 1, cross: 1 };
        RandomSequence { spec: GraphSequenceSpec::new(phases, windows, eta).unwrap() }
    }
}

fn point(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, dim)
}


pub fn projection_is_non_expansive() -> Result<(), String> {
    let strategy = (
        1usize..=4,
        prop::collection::vec((-10.0f64..10.0, 0.0f64..5.0), 4),
        point(4, -30.0, 30.0),
        point(4, 0.0, 1.0),
    );
    check(strategy, |(dim, seed, p, t)| {
        let lower: Vec<f64> = seed[..dim].iter().map(|s| s.0).collect();
        let upper: Vec<f64> = seed[..dim].iter().map(|s| s.0 + s.1).collect();
        let bx = BoxSet::new(lower.clone(), upper.clone()).unwrap();
        let z: Vec<f64> = (0..dim).map(|d| lower[d] + t[d] * (upper[d] - lower[d])).collect();
        let p = &p[..dim];
        let q = project(p, &bx);
        prop_assert!(bx.contains(&q));
        prop_assert!(distance(&q, &z) <= distance(p, &z) + 1e-12);
        Ok(())
    })
}

pub fn ergodicity_coefficient_contracts_spread() -> Result<(), String> {
    let strategy = (random_stochastic(6), prop::collection::vec(point(2, -10.0, 10.0), 6));
    check(strategy, |(a, v)| {
        let v = &v[..a.n()];
        let tau = ergodicity_coefficient(&a);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tau));
        let mixed = a.mix(v);
        prop_assert!(disagreement_span(&mixed).unwrap() <= tau * disagreement_span(v).unwrap() + 1e-12);
        Ok(())
    })
}

pub fn cycle_matrix_perron_round_trip() -> Result<(), String> {
    let strategy = (prop::collection::vec(0.02f64..1.0, 2..=6), 0.01f64..0.99);
    check(strategy, |(raw, b11)| {
        let s: f64 = raw.iter().sum();
        let mu: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let b = build_cycle_matrix(&mu, b11).unwrap();
        let back = perron_vector(&b, 1e-12).unwrap();
        for (g, w) in back.phi.iter().zip(&mu) {
            prop_assert!((g - w).abs() <= 1e-9, "{:?} vs {:?}", back.phi, mu);
        }
        Ok(())
    })
}

/// Row-stochastic closure, the limit-vector floor and the geometric envelope.
pub fn transition_products_obey_envelope() -> Result<(), String> {
    check((random_sequence(), 0usize..3), |(seq, s)| {
        let spec = &seq.spec;
        let (n, t) = (spec.n(Subnet::First), spec.windows().first);
        let eta = spec.eta();
        let s = s % spec.period();
        let limit = limiting_stochastic_vector(spec, Subnet::First, s, 1e-13).unwrap();
        let floor = eta.powi(((n - 1) * t) as i32);
        prop_assert!(limit.phi.iter().all(|&v| v >= floor - 1e-12), "{:?} below {floor}", limit.phi);
        let bound = GeometricRateBound::new(eta, n, t);
        for k in s..s + 40 {
            let prod = transition_product(spec, Subnet::First, k, s).unwrap();
            for i in 0..n {
                prop_assert!((prod.row_sum(i) - 1.0).abs() <= 1e-10);
                for j in 0..n {
                    let gap = (prod.get(i, j) - limit.phi[j]).abs();
                    prop_assert!(gap <= bound.at(k - s) + 1e-9, "k={k} s={s} ({i},{j}): {gap}");
                }
            }
        }
        Ok(())
    })
}

/// Learner rows against transition products; `stochastic` checks every
/// auxiliary vector of common and periodic learners instead.
fn learners(stochastic: bool) -> Result<(), String> {
    check((random_sequence(), 1usize..30), |(seq, steps)| {
        let spec = &seq.spec;
        let n = spec.n(Subnet::First);
        let mut common = learner_init_common(n);
        let mut periodic = learner_init_periodic(n, spec.period());
        for k in 0..steps {
            let a = spec.matrix(Subnet::First, k);
            common = learner_step_common(&common, a);
            periodic = learner_step_periodic(&periodic, a);
            if stochastic {
                for v in common.all_vectors().into_iter().chain(periodic.all_vectors()) {
                    prop_assert!(v.iter().all(|&e| e >= 0.0));
                    prop_assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                }
            }
        }
        if !stochastic {
            let phi = transition_product(spec, Subnet::First, steps - 1, 0).unwrap();
            let rows = common.vectors().unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((rows[i][j] - phi.get(i, j)).abs() <= 1e-12);
                }
            }
        }
        Ok(())
    })
}

pub fn learner_rows_match_transition_products() -> Result<(), String> {
    learners(false)
}

pub fn learners_stay_stochastic() -> Result<(), String> {
    learners(true)
}

pub fn catalog_subgradient_inequalities() -> Result<(), String> {
    let root20 = 20f64.sqrt();
    let strategy = (
        0usize..5,
        prop_oneof![Just(1.0), -5.0f64..5.0],
        -5.0f64..5.0,
        prop_oneof![Just(0.0), -5.0f64..5.0],
        -5.0f64..5.0,
        // concavity in y holds where 20 − x² ≥ 0
        -root20..root20,
        -5.0f64..5.0,
    );
    let catalog = ObjectiveCatalog::new();
    check(strategy, |(which, x0, x1, y0, y1, xc, yc)| {
        let e = &catalog.entries()[which];
        let (f, sel) = (&e.expr, &e.selection);
        let val = |x: f64, y: f64| f.evaluate(&[x], &[y]).unwrap();
        let gx = subgradient_x(f, &[x0], &[yc], sel)[0];
        prop_assert!(val(x1, yc) >= val(x0, yc) + (x1 - x0) * gx - 1e-9, "{} convex in x", e.name);
        let gy = subgradient_y(f, &[xc], &[y0], sel)[0];
        prop_assert!(val(xc, y1) <= val(xc, y0) + (y1 - y0) * gy + 1e-9, "{} concave in y", e.name);
        Ok(())
    })
}

pub fn catalog_gradients_match_finite_differences() -> Result<(), String> {
    // every kink argument stays away from zero
    let away = |lo: f64, hi: f64, kink: f64| (lo..hi).prop_filter("near kink", move |v| (v - kink).abs() > 1e-3);
    let strategy = (0usize..5, away(-5.0, 5.0, 1.0), away(-5.0, 5.0, 0.0));
    let catalog = ObjectiveCatalog::new();
    check(strategy, |(which, x, y)| {
        let e = &catalog.entries()[which];
        for side in [Side::X, Side::Y] {
            let g = e.expr.gradient(side, &[x], &[y], &e.selection)[0];
            let fd = finite_difference(&e.expr, side, &[x], &[y], 1e-5)[0];
            prop_assert!((g - fd).abs() <= 1e-6 * (1.0 + g.abs()), "{} {side:?}: {g} vs {fd}", e.name);
        }
        Ok(())
    })
}

/// Every suite by name.
pub fn suites() -> Vec<(&'static str, fn() -> Result<(), String>)> {
    vec![
        ("projection non-expansiveness", projection_is_non_expansive),
        ("ergodicity contraction", ergodicity_coefficient_contracts_spread),
        ("cycle-matrix Perron round trip", cycle_matrix_perron_round_trip),
        ("geometric envelope of transition products", transition_products_obey_envelope),
        ("learner-row identity", learner_rows_match_transition_products),
        ("learner stochasticity", learners_stay_stochastic),
        ("catalog subgradient inequalities", catalog_subgradient_inequalities),
        ("catalog finite differences", catalog_gradients_match_finite_differences),
    ]
}
