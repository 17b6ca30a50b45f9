use std::fmt;

use super::matrix::{strongly_connected, Matrix, STOCHASTIC_TOL};
use crate::error::{Error, Result};

/// One of the two competing subnetworks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subnet {
    /// The minimizing player (states `x`).
    First,
    /// The maximizing player (states `y`).
    Second,
}

impl Subnet {
    pub fn other(self) -> Subnet {
        match self {
            Subnet::First => Subnet::Second,
            Subnet::Second => Subnet::First,
        }
    }

    /// 1 or 2.
    pub fn number(self) -> usize {
        match self {
            Subnet::First => 1,
            Subnet::Second => 2,
        }
    }
}

impl fmt::Display for Subnet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Arc from `source` in the other subnetwork into `target` of `target_subnet`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossEdge {
    pub target_subnet: Subnet,
    pub target: usize,
    pub source: usize,
    pub weight: f64,
}

/// Graph layers active at one phase of the period.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphPhase {
    pub first: Matrix,
    pub second: Matrix,
    pub cross: Vec<CrossEdge>,
}

/// Declared connectivity windows: UJSC windows for each subnetwork and the
/// joint-bipartite window of the cross layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Windows {
    pub first: usize,
    pub second: usize,
    pub cross: usize,
}

impl Windows {
    pub fn of(&self, subnet: Subnet) -> usize {
        match subnet {
            Subnet::First => self.first,
            Subnet::Second => self.second,
        }
    }
}

/// Periodic description of the three time-varying layers. Phase `k mod period`
/// is active at time `k`; a fixed graph has period one.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSequenceSpec {
    n1: usize,
    n2: usize,
    phases: Vec<GraphPhase>,
    windows: Windows,
    eta: f64,
}

impl GraphSequenceSpec {
    /// Checks structure only (shapes, signs, indices). The weight rule is a
    /// separate report, see [`validate_weight_rule`].
    pub fn new(phases: Vec<GraphPhase>, windows: Windows, eta: f64) -> Result<Self> {
        let first = phases
            .first()
            .ok_or_else(|| Error::contract("graph needs at least one phase"))?;
        let (n1, n2) = (first.first.n(), first.second.n());
        for (p, phase) in phases.iter().enumerate() {
            if phase.first.n() != n1 || phase.second.n() != n2 {
                return Err(Error::contract(format!(
                    "phase {p}: matrix sizes {}x{} / {}x{} differ from phase 0",
                    phase.first.n(),
                    phase.first.n(),
                    phase.second.n(),
                    phase.second.n()
                )));
            }
            for (subnet, m) in [(Subnet::First, &phase.first), (Subnet::Second, &phase.second)] {
                for i in 0..m.n() {
                    if let Some(j) = (0..m.n()).find(|&j| m.get(i, j) < 0.0) {
                        return Err(Error::contract(format!(
                            "phase {p}, subnet {subnet}: negative weight at ({i}, {j})"
                        )));
                    }
                }
            }
            for e in &phase.cross {
                let (nt, ns) = match e.target_subnet {
                    Subnet::First => (n1, n2),
                    Subnet::Second => (n2, n1),
                };
                if e.target >= nt || e.source >= ns {
                    return Err(Error::contract(format!(
                        "phase {p}: cross edge {} -> {} into subnet {} out of range",
                        e.source, e.target, e.target_subnet
                    )));
                }
                if !(e.weight.is_finite() && e.weight > 0.0) {
                    return Err(Error::contract(format!(
                        "phase {p}: cross edge {} -> {} has non-positive weight {}",
                        e.source, e.target, e.weight
                    )));
                }
            }
        }
        if windows.first == 0 || windows.second == 0 || windows.cross == 0 {
            return Err(Error::contract("connectivity windows must be at least 1"));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::contract(format!("eta = {eta} outside (0, 1)")));
        }
        Ok(GraphSequenceSpec {
            n1,
            n2,
            phases,
            windows,
            eta,
        })
    }

    pub fn n(&self, subnet: Subnet) -> usize {
        match subnet {
            Subnet::First => self.n1,
            Subnet::Second => self.n2,
        }
    }

    pub fn period(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[GraphPhase] {
        &self.phases
    }

    pub fn phase(&self, k: usize) -> &GraphPhase {
        &self.phases[k % self.phases.len()]
    }

    pub fn windows(&self) -> Windows {
        self.windows
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `A_ℓ(k)`.
    pub fn matrix(&self, subnet: Subnet, k: usize) -> &Matrix {
        let phase = self.phase(k);
        match subnet {
            Subnet::First => &phase.first,
            Subnet::Second => &phase.second,
        }
    }

    /// Cross in-arcs of `node` in `subnet` at time `k`.
    pub fn cross_in(&self, subnet: Subnet, node: usize, k: usize) -> impl Iterator<Item = &CrossEdge> {
        self.phase(k)
            .cross
            .iter()
            .filter(move |e| e.target_subnet == subnet && e.target == node)
    }

    /// The subnet layers repeat with period `p` (which need not be the sequence period).
    pub fn subnet_has_period(&self, subnet: Subnet, p: usize) -> bool {
        p >= 1 && (0..self.period().max(p) * 2).all(|k| self.matrix(subnet, k) == self.matrix(subnet, k + p))
    }
}

/// Which clause of the weight rule a violation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightClause {
    /// A positive weight falls below the declared floor η.
    Floor,
    /// In-subnetwork weights of a node do not sum to one.
    RowSum,
    /// Cross weights of a node with cross neighbors do not sum to one.
    CrossSum,
    /// A node lacks its self-loop.
    SelfLoop,
}

impl WeightClause {
    pub fn id(self) -> &'static str {
        match self {
            WeightClause::Floor => "weight-floor",
            WeightClause::RowSum => "row-sum",
            WeightClause::CrossSum => "cross-sum",
            WeightClause::SelfLoop => "self-loop",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightViolation {
    pub clause: WeightClause,
    pub phase: usize,
    pub subnet: Subnet,
    pub node: usize,
    pub detail: String,
}

impl fmt::Display for WeightViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] phase {}, subnet {}, node {}: {}",
            self.clause.id(),
            self.phase,
            self.subnet,
            self.node,
            self.detail
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightRuleReport {
    pub violations: Vec<WeightViolation>,
}

impl WeightRuleReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, clause: WeightClause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }
}

/// Lists every violated weight-rule clause with phase and node indices.
pub fn validate_weight_rule(spec: &GraphSequenceSpec, eta: f64) -> WeightRuleReport {
    let mut violations = Vec::new();
    for (p, phase) in spec.phases().iter().enumerate() {
        for (subnet, m) in [(Subnet::First, &phase.first), (Subnet::Second, &phase.second)] {
            for i in 0..m.n() {
                let mut push = |clause, detail: String| {
                    violations.push(WeightViolation {
                        clause,
                        phase: p,
                        subnet,
                        node: i,
                        detail,
                    })
                };
                if m.get(i, i) <= 0.0 {
                    push(WeightClause::SelfLoop, "zero diagonal entry".into());
                }
                for (j, &w) in m.row(i).iter().enumerate() {
                    if w > 0.0 && w < eta {
                        push(WeightClause::Floor, format!("weight {w} from node {j} below {eta}"));
                    }
                }
                let s = m.row_sum(i);
                if (s - 1.0).abs() > STOCHASTIC_TOL {
                    push(WeightClause::RowSum, format!("weights sum to {s}"));
                }
            }
            for node in 0..spec.n(subnet) {
                let edges: Vec<_> = phase
                    .cross
                    .iter()
                    .filter(|e| e.target_subnet == subnet && e.target == node)
                    .collect();
                if edges.is_empty() {
                    continue;
                }
                for e in &edges {
                    if e.weight < eta {
                        violations.push(WeightViolation {
                            clause: WeightClause::Floor,
                            phase: p,
                            subnet,
                            node,
                            detail: format!("cross weight {} from node {} below {eta}", e.weight, e.source),
                        });
                    }
                }
                let s: f64 = edges.iter().map(|e| e.weight).sum();
                if (s - 1.0).abs() > STOCHASTIC_TOL {
                    violations.push(WeightViolation {
                        clause: WeightClause::CrossSum,
                        phase: p,
                        subnet,
                        node,
                        detail: format!("cross weights sum to {s}"),
                    });
                }
            }
        }
    }
    WeightRuleReport { violations }
}

/// Every window `[k, k+T)` of the subnet's layers has a strongly connected union.
pub fn check_ujsc(spec: &GraphSequenceSpec, subnet: Subnet, window: usize) -> bool {
    assert!(window >= 1, "window must be at least 1");
    let n = spec.n(subnet);
    (0..spec.period()).all(|k| {
        let mut adj = vec![vec![false; n]; n];
        for t in k..k + window {
            let m = spec.matrix(subnet, t);
            for (i, row) in adj.iter_mut().enumerate() {
                for (j, a) in row.iter_mut().enumerate() {
                    *a |= m.get(i, j) > 0.0;
                }
            }
        }
        strongly_connected(&adj)
    })
}

/// Every window `[k, k+T)` of the cross layer gives each node of both
/// subnetworks at least one cross in-neighbor.
pub fn check_jointly_bipartite(spec: &GraphSequenceSpec, window: usize) -> bool {
    assert!(window >= 1, "window must be at least 1");
    (0..spec.period()).all(|k| {
        let mut heard = [vec![false; spec.n(Subnet::First)], vec![false; spec.n(Subnet::Second)]];
        for t in k..k + window {
            for e in &spec.phase(t).cross {
                heard[e.target_subnet.number() - 1][e.target] = true;
            }
        }
        heard.iter().flatten().all(|&h| h)
    })
}
