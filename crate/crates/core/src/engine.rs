//! The distributed projected subgradient iteration.
//!
//! At each time `k` every agent of the first subnetwork averages its
//! neighbors' states, looks at the most recent cross observation of the
//! second subnetwork, and takes a projected descent step on its own `f_i`;
//! agents of the second subnetwork do the same with an ascent step on `g_i`.
//! All quantities of one step are computed from the time-`k` snapshot.

use crate::convex::{project, BoxSet, Expr, Side, SubgradientSelection};
use crate::digraph::{CrossEdge, GraphPhase, GraphSequenceSpec, Matrix, Subnet, Windows};
use crate::error::{Error, Result};
use crate::oracle::WeightedObjective;
use crate::stepsize::{stepsize_for, GammaSchedule, LearnerState, StepsizeRule};

/// Private objective of one agent with its kink selections.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentObjective {
    pub expr: Expr,
    pub selection: SubgradientSelection,
}

impl AgentObjective {
    /// Kinks at slope zero.
    pub fn new(expr: Expr) -> Self {
        let selection = SubgradientSelection::zeros_for(&expr);
        AgentObjective { expr, selection }
    }

    pub fn with_selection(expr: Expr, selection: SubgradientSelection) -> Result<Self> {
        let selection = selection.fitted_to(&expr)?;
        Ok(AgentObjective { expr, selection })
    }
}

/// Which per-iteration metrics a run reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MetricToggles {
    pub disagreement: bool,
    pub nash_error: bool,
    pub saddle_residual: bool,
}

impl Default for MetricToggles {
    fn default() -> Self {
        MetricToggles {
            disagreement: true,
            nash_error: true,
            saddle_residual: true,
        }
    }
}

/// Precomputed equilibrium with a note on where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub note: String,
}

/// Everything one reproducible run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub x_box: BoxSet,
    pub y_box: BoxSet,
    pub first: Vec<AgentObjective>,
    pub second: Vec<AgentObjective>,
    pub graph: GraphSequenceSpec,
    pub rule: StepsizeRule,
    pub x0: Vec<Vec<f64>>,
    pub y0: Vec<Vec<f64>>,
    pub iterations: usize,
    pub metrics: MetricToggles,
    pub reference: Option<Reference>,
}

impl Scenario {
    pub fn m1(&self) -> usize {
        self.x_box.dim()
    }

    pub fn m2(&self) -> usize {
        self.y_box.dim()
    }

    pub fn n(&self, subnet: Subnet) -> usize {
        match subnet {
            Subnet::First => self.first.len(),
            Subnet::Second => self.second.len(),
        }
    }

    /// Structural consistency: agent counts, variable indices, initial
    /// states. Initial states may lie outside the boxes.
    pub fn check(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (subnet, objs, init, dim) in [
            (Subnet::First, &self.first, &self.x0, self.m1()),
            (Subnet::Second, &self.second, &self.y0, self.m2()),
        ] {
            if objs.len() != self.graph.n(subnet) {
                problems.push(format!(
                    "subnet {subnet}: {} objectives for {} graph nodes",
                    objs.len(),
                    self.graph.n(subnet)
                ));
            }
            if init.len() != objs.len() {
                problems.push(format!("subnet {subnet}: {} initial states for {} agents", init.len(), objs.len()));
            }
            for (i, s) in init.iter().enumerate() {
                if s.len() != dim || s.iter().any(|v| !v.is_finite()) {
                    problems.push(format!("subnet {subnet}, agent {i}: initial state {s:?} is not a finite {dim}-vector"));
                }
            }
            for (i, o) in objs.iter().enumerate() {
                let (p, q) = o.expr.required_dims();
                if p > self.m1() || q > self.m2() {
                    problems.push(format!(
                        "subnet {subnet}, agent {i}: objective uses x{} / y{} beyond m1={}, m2={}",
                        p.saturating_sub(1),
                        q.saturating_sub(1),
                        self.m1(),
                        self.m2()
                    ));
                }
                if o.selection.slopes().len() != o.expr.abs_count() {
                    problems.push(format!("subnet {subnet}, agent {i}: kink selection count mismatch"));
                }
            }
        }
        if let Err(e) = self.rule.check_against(&self.graph) {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::contract(problems.join("; ")))
        }
    }

    /// `U = Σ_i f_i` with unit weights.
    pub fn total_objective(&self) -> Result<WeightedObjective> {
        WeightedObjective::new(
            self.first
                .iter()
                .map(|o| (1.0, o.expr.clone(), o.selection.clone()))
                .collect(),
        )
    }

    /// `Σ_i μ_i f_i`.
    pub fn weighted_objective(&self, mu: &[f64]) -> Result<WeightedObjective> {
        if mu.len() != self.first.len() {
            return Err(Error::contract(format!("{} weights for {} agents", mu.len(), self.first.len())));
        }
        WeightedObjective::new(
            self.first
                .iter()
                .zip(mu)
                .map(|(o, w)| (*w, o.expr.clone(), o.selection.clone()))
                .collect(),
        )
    }
}

/// Last cross contact `k̆` and the mixed value observed then.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossCache {
    pub time: usize,
    pub value: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub subnet: Subnet,
    pub state: Vec<f64>,
    pub cross_cache: Option<CrossCache>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkState {
    pub k: usize,
    pub first: Vec<AgentState>,
    pub second: Vec<AgentState>,
}

impl NetworkState {
    pub fn initial(sc: &Scenario) -> Self {
        let agents = |subnet, init: &[Vec<f64>]| {
            init.iter()
                .enumerate()
                .map(|(id, s)| AgentState {
                    id,
                    subnet,
                    state: s.clone(),
                    cross_cache: None,
                })
                .collect()
        };
        NetworkState {
            k: 0,
            first: agents(Subnet::First, &sc.x0),
            second: agents(Subnet::Second, &sc.y0),
        }
    }

    pub fn states(&self, subnet: Subnet) -> Vec<Vec<f64>> {
        self.agents(subnet).iter().map(|a| a.state.clone()).collect()
    }

    pub fn agents(&self, subnet: Subnet) -> &[AgentState] {
        match subnet {
            Subnet::First => &self.first,
            Subnet::Second => &self.second,
        }
    }
}

/// `x̂_i = Σ_j a_ij x_j`.
pub fn mix_within(states: &[Vec<f64>], a: &Matrix) -> Vec<Vec<f64>> {
    a.mix(states)
}

/// New cross cache of `agent` at time `k`: the weighted cross in-neighbor
/// average if there are cross in-arcs at `k`, the old cache otherwise.
pub fn cross_observe(
    agent: &AgentState,
    k: usize,
    spec: &GraphSequenceSpec,
    other_states: &[Vec<f64>],
) -> Option<CrossCache> {
    let mut edges = spec.cross_in(agent.subnet, agent.id, k).peekable();
    if edges.peek().is_none() {
        return agent.cross_cache.clone();
    }
    let dim = other_states.first().map_or(0, Vec::len);
    let mut value = vec![0.0; dim];
    for e in edges {
        for (v, s) in value.iter_mut().zip(&other_states[e.source]) {
            *v += e.weight * s;
        }
    }
    Some(CrossCache { time: k, value })
}

fn update_subnet(
    sc: &Scenario,
    net: &NetworkState,
    subnet: Subnet,
    steps: &[f64],
) -> Result<Vec<AgentState>> {
    let k = net.k;
    let own = net.states(subnet);
    let other = net.states(subnet.other());
    let mixed = mix_within(&own, sc.graph.matrix(subnet, k));
    let (objs, bx) = match subnet {
        Subnet::First => (&sc.first, &sc.x_box),
        Subnet::Second => (&sc.second, &sc.y_box),
    };
    net.agents(subnet)
        .iter()
        .zip(mixed)
        .map(|(agent, hat)| {
            let cache = cross_observe(agent, k, &sc.graph, &other);
            let obj = &objs[agent.id];
            let target = match &cache {
                None => hat,
                Some(c) => {
                    let (q, sign) = match subnet {
                        Subnet::First => (obj.expr.gradient(Side::X, &hat, &c.value, &obj.selection), -1.0),
                        Subnet::Second => (obj.expr.gradient(Side::Y, &c.value, &hat, &obj.selection), 1.0),
                    };
                    let a = sign * steps[agent.id];
                    hat.iter().zip(&q).map(|(h, g)| h + a * g).collect()
                }
            };
            let state = project(&target, bx);
            if state.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric {
                    iteration: k,
                    detail: format!("agent {} of subnet {subnet} produced {state:?}", agent.id),
                });
            }
            Ok(AgentState {
                id: agent.id,
                subnet,
                state,
                cross_cache: cache,
            })
        })
        .collect()
}

/// One synchronous iteration with stepsizes `alpha` (first subnet) and
/// `beta` (second subnet). Agents without any cross contact so far only mix
/// and project.
pub fn step(net: &NetworkState, sc: &Scenario, alpha: &[f64], beta: &[f64]) -> Result<NetworkState> {
    if alpha.len() != net.first.len() || beta.len() != net.second.len() {
        return Err(Error::contract("one stepsize per agent expected"));
    }
    if alpha.iter().chain(beta).any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(Error::contract("stepsizes must be finite and nonnegative"));
    }
    Ok(NetworkState {
        k: net.k + 1,
        first: update_subnet(sc, net, Subnet::First, alpha)?,
        second: update_subnet(sc, net, Subnet::Second, beta)?,
    })
}

/// Per-iteration states and applied stepsizes in flat storage. Frame `k`
/// holds the states at time `k` and the stepsizes used to go from `k` to
/// `k + 1` (for the last frame, the ones that would be used).
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    n1: usize,
    n2: usize,
    m1: usize,
    m2: usize,
    frames: usize,
    states: Vec<f64>,
    stepsizes: Vec<f64>,
}

impl Trace {
    fn new(n1: usize, n2: usize, m1: usize, m2: usize, capacity: usize) -> Self {
        Trace {
            n1,
            n2,
            m1,
            m2,
            frames: 0,
            states: Vec::with_capacity(capacity * (n1 * m1 + n2 * m2)),
            stepsizes: Vec::with_capacity(capacity * (n1 + n2)),
        }
    }

    fn push(&mut self, net: &NetworkState, alpha: &[f64], beta: &[f64]) {
        for a in net.first.iter().chain(&net.second) {
            self.states.extend_from_slice(&a.state);
        }
        self.stepsizes.extend_from_slice(alpha);
        self.stepsizes.extend_from_slice(beta);
        self.frames += 1;
    }

    /// Number of frames, iterations plus one.
    pub fn len(&self) -> usize {
        self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.frames == 0
    }

    pub fn n(&self, subnet: Subnet) -> usize {
        match subnet {
            Subnet::First => self.n1,
            Subnet::Second => self.n2,
        }
    }

    pub fn dim(&self, subnet: Subnet) -> usize {
        match subnet {
            Subnet::First => self.m1,
            Subnet::Second => self.m2,
        }
    }

    fn width(&self) -> usize {
        self.n1 * self.m1 + self.n2 * self.m2
    }

    /// State of agent `i` of `subnet` at frame `k`.
    pub fn state(&self, k: usize, subnet: Subnet, i: usize) -> &[f64] {
        let base = k * self.width()
            + match subnet {
                Subnet::First => i * self.m1,
                Subnet::Second => self.n1 * self.m1 + i * self.m2,
            };
        &self.states[base..base + self.dim(subnet)]
    }

    pub fn states(&self, k: usize, subnet: Subnet) -> Vec<&[f64]> {
        (0..self.n(subnet)).map(|i| self.state(k, subnet, i)).collect()
    }

    pub fn stepsize(&self, k: usize, subnet: Subnet, i: usize) -> f64 {
        let off = match subnet {
            Subnet::First => i,
            Subnet::Second => self.n1 + i,
        };
        self.stepsizes[k * (self.n1 + self.n2) + off]
    }

    pub fn last(&self) -> usize {
        self.frames - 1
    }
}

fn stepsizes_at(
    rule: &StepsizeRule,
    k: usize,
    n1: usize,
    n2: usize,
    learners: Option<&(LearnerState, LearnerState)>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let one = |subnet, n, l: Option<&LearnerState>| -> Result<Vec<f64>> {
        (0..n).map(|i| stepsize_for(rule, i, subnet, k, l)).collect()
    };
    Ok((
        one(Subnet::First, n1, learners.map(|l| &l.0))?,
        one(Subnet::Second, n2, learners.map(|l| &l.1))?,
    ))
}

/// Runs `iterations` steps from the initial states.
pub fn run(sc: &Scenario, iterations: usize) -> Result<Trace> {
    sc.check()?;
    let (n1, n2) = (sc.first.len(), sc.second.len());
    let mut trace = Trace::new(n1, n2, sc.m1(), sc.m2(), iterations + 1);
    let mut net = NetworkState::initial(sc);
    let mut learners = sc.rule.learners(n1, n2);
    for k in 0..=iterations {
        let (alpha, beta) = stepsizes_at(&sc.rule, k, n1, n2, learners.as_ref())?;
        trace.push(&net, &alpha, &beta);
        if k == iterations {
            break;
        }
        net = step(&net, sc, &alpha, &beta)?;
        if let Some((l1, l2)) = learners.as_mut() {
            l1.advance(sc.graph.matrix(Subnet::First, k));
            l2.advance(sc.graph.matrix(Subnet::Second, k));
        }
    }
    Ok(trace)
}

/// Data for the identical-subnetwork construction: one network whose agents
/// each hold a state pair `(x_i, y_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdenticalBase {
    pub name: String,
    pub objectives: Vec<AgentObjective>,
    /// One matrix per phase of the period.
    pub matrices: Vec<Matrix>,
    pub x_box: BoxSet,
    pub y_box: BoxSet,
    pub x0: Vec<Vec<f64>>,
    pub y0: Vec<Vec<f64>>,
    pub schedule: GammaSchedule,
    pub eta: f64,
    pub window: usize,
    pub iterations: usize,
}

/// Two copies of the same network, `g_i = f_i`, `A_2 = A_1`, and every pair
/// `(i, i)` linked both ways at all times, with homogeneous stepsizes.
pub fn make_identical_scenario(base: IdenticalBase) -> Result<Scenario> {
    let n = base.objectives.len();
    let pairing: Vec<CrossEdge> = [Subnet::First, Subnet::Second]
        .into_iter()
        .flat_map(|target_subnet| {
            (0..n).map(move |i| CrossEdge {
                target_subnet,
                target: i,
                source: i,
                weight: 1.0,
            })
        })
        .collect();
    let phases = base
        .matrices
        .iter()
        .map(|a| GraphPhase {
            first: a.clone(),
            second: a.clone(),
            cross: pairing.clone(),
        })
        .collect();
    let graph = GraphSequenceSpec::new(
        phases,
        Windows {
            first: base.window,
            second: base.window,
            cross: 1,
        },
        base.eta,
    )?;
    let sc = Scenario {
        name: base.name,
        description: "identical subnetworks with full pairing".into(),
        x_box: base.x_box,
        y_box: base.y_box,
        first: base.objectives.clone(),
        second: base.objectives,
        graph,
        rule: StepsizeRule::Homogeneous(base.schedule),
        x0: base.x0,
        y0: base.y0,
        iterations: base.iterations,
        metrics: MetricToggles::default(),
        reference: None,
    };
    sc.check()?;
    Ok(sc)
}
