use crate::convex::{distance, lipschitz_bound, BoxSet};
use crate::digraph::{disagreement_span, Subnet};
use crate::engine::{Scenario, Trace};
use crate::error::{Error, Result};
use crate::oracle::{grid_budget, grid_minimax_with, verify_saddle, GridOptions, SaddleReport};

/// Metrics of one trace frame. Disabled metrics are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub k: usize,
    pub h1: f64,
    pub h2: f64,
    pub nash_error: f64,
    pub saddle_residual: f64,
    pub stepsize_min: f64,
    pub stepsize_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsSeries {
    pub rows: Vec<MetricsRow>,
}

impl MetricsSeries {
    pub fn last(&self) -> &MetricsRow {
        self.rows.last().expect("metrics of a non-empty trace")
    }
}

fn mean(points: &[&[f64]]) -> Vec<f64> {
    let mut m = vec![0.0; points[0].len()];
    for p in points {
        for (a, v) in m.iter_mut().zip(*p) {
            *a += v;
        }
    }
    let n = points.len() as f64;
    m.iter_mut().for_each(|a| *a /= n);
    m
}

/// Disagreements, Nash error `Σ|x_i − x*|² + Σ|y_i − y*|²` and the saddle
/// residual `U(x̄, y*) − U(x*, ȳ)` with subnet means `x̄`, `ȳ`.
pub fn compute_metrics(trace: &Trace, sc: &Scenario, saddle: &SaddleReport) -> Result<MetricsSeries> {
    if saddle.x_star.len() != trace.dim(Subnet::First) || saddle.y_star.len() != trace.dim(Subnet::Second) {
        return Err(Error::contract("saddle point and trace dimensions differ"));
    }
    if trace.n(Subnet::First) != sc.first.len() || trace.n(Subnet::Second) != sc.second.len() {
        return Err(Error::contract("trace and scenario agent counts differ"));
    }
    let u = sc.total_objective()?;
    let (xs, ys) = (&saddle.x_star, &saddle.y_star);
    let toggles = sc.metrics;
    let mut rows = Vec::with_capacity(trace.len());
    for k in 0..trace.len() {
        let x = trace.states(k, Subnet::First);
        let y = trace.states(k, Subnet::Second);
        let (h1, h2) = if toggles.disagreement {
            (disagreement_span(&x)?, disagreement_span(&y)?)
        } else {
            (f64::NAN, f64::NAN)
        };
        let nash_error = if toggles.nash_error {
            x.iter().map(|p| distance(p, xs).powi(2)).sum::<f64>() + y.iter().map(|p| distance(p, ys).powi(2)).sum::<f64>()
        } else {
            f64::NAN
        };
        let saddle_residual = if toggles.saddle_residual {
            u.value(&mean(&x), ys) - u.value(xs, &mean(&y))
        } else {
            f64::NAN
        };
        let steps = (0..sc.first.len())
            .map(|i| trace.stepsize(k, Subnet::First, i))
            .chain((0..sc.second.len()).map(|i| trace.stepsize(k, Subnet::Second, i)));
        let (lo, hi) = steps.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
        rows.push(MetricsRow {
            k,
            h1,
            h2,
            nash_error,
            saddle_residual,
            stepsize_min: lo,
            stepsize_max: hi,
        });
    }
    Ok(MetricsSeries { rows })
}

/// Grid resolution used for references: 2001 points per dimension, or the
/// largest resolution the budget allows.
pub fn reference_resolution(m1: usize, m2: usize) -> usize {
    let by_budget = grid_budget().powf(1.0 / (m1 + m2) as f64).floor() as usize + 1;
    by_budget.clamp(3, 2001)
}

/// Sample count used when certifying a reference.
pub const CERTIFY_SAMPLES: usize = 10_000;

/// Largest tolerated sampled saddle violation for a certified reference.
pub const CERTIFY_TOL: f64 = 1e-9;

/// Saddle point of `U = Σ f_i` by refined grid min-max.
pub fn derive_reference(sc: &Scenario) -> Result<SaddleReport> {
    let u = sc.total_objective()?;
    grid_minimax_with(
        &u,
        &sc.x_box,
        &sc.y_box,
        &GridOptions::certified(reference_resolution(sc.m1(), sc.m2())),
    )
}

/// The scenario's stored reference as a report, with its sampled violation.
pub fn stored_reference(sc: &Scenario) -> Result<Option<(SaddleReport, f64)>> {
    let Some(r) = &sc.reference else {
        return Ok(None);
    };
    let u = sc.total_objective()?;
    let violation = verify_saddle(&u, (&r.x, &r.y), &sc.x_box, &sc.y_box, CERTIFY_SAMPLES)?;
    Ok(Some((
        SaddleReport {
            x_star: r.x.clone(),
            y_star: r.y.clone(),
            value: u.value(&r.x, &r.y),
            minimax_gap: None,
            grid_resolution: None,
            cell_width: None,
            tie_value_spread: 0.0,
        },
        violation,
    )))
}

/// Reference saddle for metrics: the stored one when `trust_stored` is set
/// and the scenario carries one, otherwise derived by the grid oracle.
pub fn resolve_reference(sc: &Scenario, trust_stored: bool) -> Result<SaddleReport> {
    if trust_stored {
        if let Some((r, _)) = stored_reference(sc)? {
            return Ok(r);
        }
    }
    derive_reference(sc)
}

/// Bound `L` on all agents' subgradients, sampled on a grid.
pub fn sampled_lipschitz(sc: &Scenario, grid: usize) -> f64 {
    sc.first
        .iter()
        .chain(&sc.second)
        .map(|o| lipschitz_bound(&o.expr, &sc.x_box, &sc.y_box, grid, &o.selection))
        .fold(0.0, f64::max)
}

/// Outcome of the windowed disagreement contraction check for one subnet.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionCheck {
    pub subnet: Subnet,
    /// Window length `(n(n − 2) + 1)·T_ℓ`, at least 1.
    pub window: usize,
    pub contraction: f64,
    pub lipschitz: f64,
    pub positions: usize,
    pub violations: usize,
    /// Smallest `rhs − lhs` seen.
    pub worst_margin: f64,
}

impl RecursionCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `h(tT + q) ≤ (1 − η^T)·h((t−1)T + q) + 2L·Σ_r λ_r` at every window
/// position of the trace, where `λ_r` is the subnet's largest stepsize at
/// `r`. Round-off slack of `1e-12·(1 + h)` is allowed.
pub fn check_disagreement_recursion(trace: &Trace, sc: &Scenario, lipschitz: f64) -> Result<Vec<RecursionCheck>> {
    let eta = sc.graph.eta();
    let mut out = Vec::new();
    for subnet in [Subnet::First, Subnet::Second] {
        let n = sc.n(subnet);
        let base = sc.graph.windows().of(subnet);
        let window = ((n * n.saturating_sub(2) + 1) * base).max(1);
        let contraction = 1.0 - eta.powi(window as i32);
        let h: Vec<f64> = (0..trace.len())
            .map(|k| disagreement_span(&trace.states(k, subnet)))
            .collect::<Result<_>>()?;
        let lambda: Vec<f64> = (0..trace.len())
            .map(|k| (0..n).map(|i| trace.stepsize(k, subnet, i)).fold(0.0, f64::max))
            .collect();
        let mut prefix = vec![0.0];
        for l in &lambda {
            prefix.push(prefix.last().unwrap() + l);
        }
        let mut check = RecursionCheck {
            subnet,
            window,
            contraction,
            lipschitz,
            positions: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
        };
        for end in window..trace.len() {
            let start = end - window;
            let rhs = contraction * h[start] + 2.0 * lipschitz * (prefix[end] - prefix[start]);
            let margin = rhs - h[end];
            check.positions += 1;
            check.worst_margin = check.worst_margin.min(margin);
            if margin < -1e-12 * (1.0 + h[end]) {
                check.violations += 1;
            }
        }
        out.push(check);
    }
    Ok(out)
}

/// Largest distance of any agent's final state to `(x, y)`.
pub fn final_distance(trace: &Trace, x: &[f64], y: &[f64]) -> f64 {
    let k = trace.last();
    let dx = trace.states(k, Subnet::First).iter().map(|p| distance(p, x)).fold(0.0, f64::max);
    let dy = trace.states(k, Subnet::Second).iter().map(|p| distance(p, y)).fold(0.0, f64::max);
    dx.max(dy)
}

/// `true` when every state of every frame lies in its box.
pub fn states_feasible(trace: &Trace, bx: &BoxSet, by: &BoxSet, from: usize) -> bool {
    (from..trace.len()).all(|k| {
        trace.states(k, Subnet::First).iter().all(|p| bx.contains(p))
            && trace.states(k, Subnet::Second).iter().all(|p| by.contains(p))
    })
}
