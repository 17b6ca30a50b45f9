//! One PASS/FAIL line per acceptance criterion, written straight to stderr
//! so the lines show without `--nocapture`.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use nashnet::convex::distance;
use nashnet::digraph::{perron_vector, StochasticMatrix, Subnet};
use nashnet::engine::{run, Scenario, Trace};
use nashnet::oracle::{grid_minimax_with, GridOptions};
use nashnet::scenario::metrics::{
    check_disagreement_recursion, compute_metrics, derive_reference, final_distance, reference_resolution,
    sampled_lipschitz, stored_reference, MetricsSeries, CERTIFY_TOL,
};
use nashnet::scenario::output::{write_metrics_csv, write_trace_csv};
use nashnet::scenario::{bundled, BUNDLED};
use nashnet::stepsize::StepsizeRule;

const EQUILIBRIUM: (f64, f64) = (0.6102, 0.8844);
const REPRO_TOL: f64 = 5e-2;
const HORIZON: usize = 100_000;
const RUNTIME_LIMIT: Duration = Duration::from_secs(5);
const LEARNER_TOL: f64 = 1e-8;
const LEARNER_BY: usize = 200;
const COMMON_SADDLE_TOL: f64 = 1e-2;
const MIN_SEPARATION: f64 = 0.1;
const PLATEAU_TOL: f64 = 0.1;
const RESIDUAL_FLOOR: f64 = -1e-9;
// listed limit vectors carry four decimals
const LISTED_TOL: f64 = 5e-5;
const LIPSCHITZ_GRID: usize = 101;

struct BundledRun {
    sc: Scenario,
    trace: Trace,
    certified: bool,
    metrics: MetricsSeries,
    elapsed: Duration,
}

fn execute(name: &str) -> BundledRun {
    let sc = bundled(name).unwrap().scenario;
    let start = Instant::now();
    let trace = run(&sc, sc.iterations).unwrap();
    let elapsed = start.elapsed();
    let (reference, violation) = stored_reference(&sc).unwrap().expect("bundled scenarios carry a reference");
    let metrics = compute_metrics(&trace, &sc, &reference).unwrap();
    BundledRun {
        sc,
        trace,
        certified: violation <= CERTIFY_TOL,
        metrics,
        elapsed,
    }
}

fn csv_bytes(trace: &Trace, m: &MetricsSeries) -> (Vec<u8>, Vec<u8>) {
    let (mut t, mut w) = (Vec::new(), Vec::new());
    write_trace_csv(&mut t, trace).unwrap();
    write_metrics_csv(&mut w, m).unwrap();
    (t, w)
}

fn near_equilibrium(r: &BundledRun) -> f64 {
    final_distance(&r.trace, &[EQUILIBRIUM.0], &[EQUILIBRIUM.1])
}

/// Largest gap between `γ_k / α_{i,k}` and `want(k, subnet)[i]` over `ks`.
fn readout_gap(r: &BundledRun, ks: impl Iterator<Item = usize>, want: impl Fn(usize, Subnet) -> Vec<f64>) -> f64 {
    let schedule = r.sc.rule.schedule();
    let mut worst = 0.0f64;
    for k in ks {
        for subnet in [Subnet::First, Subnet::Second] {
            let w = want(k, subnet);
            for (i, wi) in w.iter().enumerate() {
                let readout = schedule.at(k) / r.trace.stepsize(k, subnet, i);
                worst = worst.max((readout - wi).abs());
            }
        }
    }
    worst
}

struct Verdicts {
    failed: Vec<u8>,
}

impl Verdicts {
    fn record(&mut self, id: u8, title: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        let _ = writeln!(std::io::stderr(), "[{verdict}] {id}. {title}: {detail}");
        if !pass {
            self.failed.push(id);
        }
    }
}

#[test]
fn acceptance() {
    let mut v = Verdicts { failed: Vec::new() };
    let runs: Vec<(&str, BundledRun)> = BUNDLED.iter().map(|(name, _)| (*name, execute(name))).collect();
    let get = |name: &str| &runs.iter().find(|(n, _)| *n == name).unwrap().1;

    // 1
    let ex1 = get("example1");
    let derived = derive_reference(&ex1.sc).unwrap();
    let oracle_gap = (derived.x_star[0] - EQUILIBRIUM.0).abs().max((derived.y_star[0] - EQUILIBRIUM.1).abs());
    let d1 = near_equilibrium(ex1);
    v.record(
        1,
        "example1 reproduction",
        ex1.trace.last() == HORIZON && d1 <= REPRO_TOL && oracle_gap <= 0.005 && ex1.elapsed < RUNTIME_LIMIT,
        format!(
            "K={} max distance {d1:.2e} (tol {REPRO_TOL}), grid saddle ({:.6}, {:.6}), run {:.2?}",
            ex1.trace.last(),
            derived.x_star[0],
            derived.y_star[0],
            ex1.elapsed
        ),
    );

    // 2
    let ex2 = get("example2");
    let listed = |k: usize, subnet: Subnet| match (subnet, k % 2) {
        (Subnet::First, 0) => vec![0.5336, 0.1525, 0.3139],
        (Subnet::First, _) => vec![0.5336, 0.3408, 0.1256],
        (Subnet::Second, _) => vec![0.8889, 0.1111],
    };
    let vec_gap = readout_gap(ex2, 0..4, listed);
    let d2 = near_equilibrium(ex2);
    v.record(
        2,
        "example2 reproduction",
        ex2.trace.last() == HORIZON && d2 <= REPRO_TOL && vec_gap <= LISTED_TOL,
        format!("K={} max distance {d2:.2e}, stepsize vectors off listed values by {vec_gap:.1e}", ex2.trace.last()),
    );

    // 3
    let ex3 = get("example3");
    let StepsizeRule::OracleHeterogeneous { first, second, .. } = &ex2.sc.rule else {
        panic!("example2 uses oracle stepsizes")
    };
    let oracle = |k: usize, subnet: Subnet| match subnet {
        Subnet::First => first[(k + 1) % first.len()].clone(),
        Subnet::Second => second[(k + 1) % second.len()].clone(),
    };
    let learn_gap = readout_gap(ex3, LEARNER_BY..=2 * LEARNER_BY, oracle);
    let d3 = near_equilibrium(ex3);
    v.record(
        3,
        "example3 adaptive learners",
        ex3.trace.last() == HORIZON && d3 <= REPRO_TOL && learn_gap <= LEARNER_TOL,
        format!("readouts off oracle vectors by {learn_gap:.1e} for k >= {LEARNER_BY}, max distance {d3:.2e}"),
    );

    // 4
    let th2 = get("unbalanced_homogeneous");
    let a = StochasticMatrix::new(th2.sc.graph.matrix(Subnet::First, 0).clone()).unwrap();
    let mu = perron_vector(&a, 1e-12).unwrap().phi;
    let weighted = grid_minimax_with(
        &th2.sc.weighted_objective(&mu).unwrap(),
        &th2.sc.x_box,
        &th2.sc.y_box,
        &GridOptions::certified(reference_resolution(1, 1)),
    )
    .unwrap();
    let unit = derive_reference(&th2.sc).unwrap();
    let separation = distance(
        &[weighted.x_star[0], weighted.y_star[0]],
        &[unit.x_star[0], unit.y_star[0]],
    );
    let to_weighted = final_distance(&th2.trace, &weighted.x_star, &weighted.y_star);
    let last = th2.trace.last();
    // joint distance of every (x_i, y_j) profile to the unit-weight saddle
    let star = [unit.x_star[0], unit.y_star[0]];
    let to_unit = th2
        .trace
        .states(last, Subnet::First)
        .iter()
        .flat_map(|x| {
            th2.trace.states(last, Subnet::Second).into_iter().map(move |y| {
                distance(&[x[0], y[0]], &star)
            })
        })
        .fold(f64::INFINITY, f64::min);
    let (dx, dy) = (weighted.x_star[0] - unit.x_star[0], weighted.y_star[0] - unit.y_star[0]);
    let plateau = th2.sc.n(Subnet::First) as f64 * dx * dx + th2.sc.n(Subnet::Second) as f64 * dy * dy;
    let nash = compute_metrics(&th2.trace, &th2.sc, &unit).unwrap().last().nash_error;
    let plateau_ok = (nash - plateau).abs() <= PLATEAU_TOL * plateau;
    v.record(
        4,
        "unbalanced graph with homogeneous stepsizes",
        separation > MIN_SEPARATION
            && to_weighted <= REPRO_TOL
            && to_unit > separation / 2.0
            && plateau_ok,
        format!(
            "separation {separation:.4}, distance to weighted saddle {to_weighted:.2e}, to unit saddle >= {to_unit:.4}, nash_error {nash:.4} vs plateau {plateau:.4}"
        ),
    );

    // 5
    let th3 = get("common_saddle");
    let d5 = final_distance(&th3.trace, &[1.5], &[-2.0]);
    v.record(
        5,
        "common saddle under unbalanced switching",
        d5 <= COMMON_SADDLE_TOL,
        format!("max distance to (1.5, -2) {d5:.2e} (tol {COMMON_SADDLE_TOL})"),
    );

    // 6
    let mut broken = Vec::new();
    for (name, suite) in common::suites() {
        if let Err(e) = suite() {
            broken.push(format!("{name}: {e}"));
        }
    }
    v.record(
        6,
        "property suites",
        broken.is_empty(),
        if broken.is_empty() {
            format!("{} suites x {} trials, no failures", common::suites().len(), common::CASES)
        } else {
            broken.join("; ")
        },
    );

    // 7
    let mut positions = 0;
    let mut bad = Vec::new();
    for (name, r) in &runs {
        let l = sampled_lipschitz(&r.sc, LIPSCHITZ_GRID);
        for c in check_disagreement_recursion(&r.trace, &r.sc, l).unwrap() {
            positions += c.positions;
            if !c.holds() {
                bad.push(format!("{name} subnet {}: {} violations", c.subnet, c.violations));
            }
        }
    }
    v.record(
        7,
        "disagreement recursion",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{positions} window positions over {} traces", runs.len())
        } else {
            bad.join("; ")
        },
    );

    // 8
    let mut worst = f64::INFINITY;
    let mut uncertified = Vec::new();
    for (name, r) in &runs {
        if !r.certified {
            uncertified.push(*name);
            continue;
        }
        for row in &r.metrics.rows {
            worst = worst.min(row.saddle_residual);
        }
    }
    v.record(
        8,
        "saddle residual non-negative",
        uncertified.is_empty() && worst >= RESIDUAL_FLOOR,
        format!("smallest residual {worst:.3e}; uncertified references: {uncertified:?}"),
    );

    // 9
    let mut differing = Vec::new();
    for (name, r) in &runs {
        let first = csv_bytes(&r.trace, &r.metrics);
        let again = execute(name);
        if csv_bytes(&again.trace, &again.metrics) != first {
            differing.push(*name);
        }
    }
    v.record(
        9,
        "determinism",
        differing.is_empty(),
        format!("{} bundled scenarios rerun, differing: {differing:?}", runs.len()),
    );

    assert!(v.failed.is_empty(), "failed criteria: {:?}", v.failed);
}
