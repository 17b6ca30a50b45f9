//! TOML scenario documents.
//!
//! ```toml
//! [meta]
//! name = "toy"
//! description = "free text"
//!
//! [dimensions]
//! m1 = 1
//! m2 = 1
//!
//! [boxes]
//! x = { lower = [-5.0], upper = [5.0] }
//! y = { lower = [-5.0], upper = [5.0] }
//!
//! [[agents.first]]
//! objective = "(sub (pow x0 2) (pow y0 2))"
//! selection = [0.0]          # optional, one slope per abs node in pre-order
//!
//! [[agents.second]]
//! objective = "(sub (pow x0 2) (pow y0 2))"
//!
//! [graph]
//! eta = 0.5
//! windows = { first = 1, second = 1, cross = 1 }
//!
//! [[graph.phases]]
//! first = [[1.0]]
//! second = [[1.0]]
//! cross = [
//!   { into = "first", target = 0, source = 0, weight = 1.0 },
//!   { into = "second", target = 0, source = 0, weight = 1.0 },
//! ]
//!
//! [stepsize]
//! rule = "homogeneous"       # or oracle-heterogeneous, adaptive-common, adaptive-periodic
//! schedule = { kind = "power-law", c = 1.0, b = 50.0, eps = 0.5 }
//! # oracle-heterogeneous: optional first/second limit vectors per phase,
//! #   computed from the graph when absent
//! # adaptive-periodic: p1, p2
//!
//! [initial]
//! x = [[2.0]]
//! y = [[1.0]]
//!
//! [run]
//! iterations = 1000
//! metrics = { disagreement = true, nash_error = true, saddle_residual = true }
//!
//! [reference]                # optional precomputed equilibrium
//! x = [0.0]
//! y = [0.0]
//! note = "how it was obtained"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::convex::{convexity_warnings, parse_expr, BoxSet, SubgradientSelection};
use crate::digraph::{
    check_jointly_bipartite, check_ujsc, validate_weight_rule, CrossEdge, GraphPhase, GraphSequenceSpec, Matrix,
    Subnet, Windows,
};
use crate::engine::{AgentObjective, MetricToggles, Reference, Scenario};
use crate::error::{Error, Result};
use crate::stepsize::{oracle_heterogeneous_build, validate_schedule, GammaSchedule, StepsizeRule};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    meta: MetaDoc,
    dimensions: DimsDoc,
    boxes: BoxesDoc,
    agents: AgentsDoc,
    graph: GraphDoc,
    stepsize: StepsizeDoc,
    initial: InitialDoc,
    run: RunDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<ReferenceDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaDoc {
    name: String,
    #[serde(default)]
    description: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimsDoc {
    m1: usize,
    m2: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalDoc {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxesDoc {
    x: IntervalDoc,
    y: IntervalDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    objective: Spanned<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    selection: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentsDoc {
    first: Vec<AgentDoc>,
    second: Vec<AgentDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowsDoc {
    first: usize,
    second: usize,
    cross: usize,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
enum SubnetDoc {
    First,
    Second,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossDoc {
    into: SubnetDoc,
    target: usize,
    source: usize,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseDoc {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    #[serde(default)]
    cross: Vec<CrossDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    eta: f64,
    windows: WindowsDoc,
    phases: Vec<PhaseDoc>,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq)]
#[serde(rename_all = "kebab-case")]
enum RuleKind {
    Homogeneous,
    OracleHeterogeneous,
    AdaptiveCommon,
    AdaptivePeriodic,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum ScheduleDoc {
    PowerLaw { c: f64, b: f64, eps: f64 },
    Table { values: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepsizeDoc {
    rule: RuleKind,
    schedule: ScheduleDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    first: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    second: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p2: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialDoc {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricsDoc {
    #[serde(default = "yes")]
    disagreement: bool,
    #[serde(default = "yes")]
    nash_error: bool,
    #[serde(default = "yes")]
    saddle_residual: bool,
}

impl Default for MetricsDoc {
    fn default() -> Self {
        MetricsDoc {
            disagreement: true,
            nash_error: true,
            saddle_residual: true,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    iterations: usize,
    #[serde(default)]
    metrics: MetricsDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceDoc {
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(default)]
    note: String,
}

/// A validated scenario plus advisory findings (connectivity windows,
/// convexity sampling, schedule heuristics).
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub warnings: Vec<String>,
}

/// 1-based line and column of byte offset `pos`.
fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let pos = pos.min(src.len());
    let before = &src[..pos];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn parse_error(src: &str, pos: usize, message: impl Into<String>) -> Error {
    let (line, column) = line_col(src, pos);
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn matrix(rows: &[Vec<f64>], what: &str, problems: &mut Vec<String>) -> Option<Matrix> {
    match Matrix::from_rows(rows.to_vec()) {
        Ok(m) => Some(m),
        Err(e) => {
            problems.push(format!("{what}: {e}"));
            None
        }
    }
}

fn schedule_from(doc: &ScheduleDoc) -> Result<GammaSchedule> {
    match doc {
        ScheduleDoc::PowerLaw { c, b, eps } => GammaSchedule::power_law(*c, *b, *eps),
        ScheduleDoc::Table { values } => GammaSchedule::table(values.clone()),
    }
}

/// Parses and validates a scenario document.
///
/// TOML syntax, type errors and malformed expressions are parse errors with
/// line and column. Weight-rule violations and inconsistent sizes are
/// validation errors; connectivity windows, convexity sampling and schedule
/// heuristics only produce warnings.
pub fn parse_scenario(src: &str) -> Result<LoadedScenario> {
    let doc: Doc = toml::from_str(src).map_err(|e| {
        let pos = e.span().map_or(0, |s| s.start);
        parse_error(src, pos, e.message().trim().to_string())
    })?;

    let mut objectives = Vec::new();
    for (subnet, agents) in [("first", &doc.agents.first), ("second", &doc.agents.second)] {
        let mut objs = Vec::new();
        for (i, a) in agents.iter().enumerate() {
            let expr = parse_expr(a.objective.get_ref()).map_err(|e| {
                // +1 skips the opening quote of a basic string
                parse_error(
                    src,
                    a.objective.span().start + 1 + e.offset,
                    format!("agents.{subnet}[{i}].objective: {}", e.message),
                )
            })?;
            objs.push((expr, a.selection.clone()));
        }
        objectives.push(objs);
    }
    let second_objs = objectives.pop().unwrap_or_default();
    let first_objs = objectives.pop().unwrap_or_default();

    let mut problems = Vec::new();
    let mut agent_objectives = |objs: Vec<(crate::convex::Expr, Vec<f64>)>, subnet: &str| -> Vec<AgentObjective> {
        objs.into_iter()
            .enumerate()
            .filter_map(|(i, (expr, sel))| {
                match SubgradientSelection::new(sel).and_then(|s| AgentObjective::with_selection(expr, s)) {
                    Ok(o) => Some(o),
                    Err(e) => {
                        problems.push(format!("agents.{subnet}[{i}].selection: {e}"));
                        None
                    }
                }
            })
            .collect()
    };
    let first = agent_objectives(first_objs, "first");
    let second = agent_objectives(second_objs, "second");

    let boxes = [("x", &doc.boxes.x, doc.dimensions.m1), ("y", &doc.boxes.y, doc.dimensions.m2)].map(
        |(name, iv, m)| {
            if iv.lower.len() != m || iv.upper.len() != m {
                problems.push(format!("boxes.{name}: bounds must have dimension {m}"));
                return None;
            }
            BoxSet::new(iv.lower.clone(), iv.upper.clone())
                .map_err(|e| problems.push(format!("boxes.{name}: {e}")))
                .ok()
        },
    );

    let mut phases = Vec::new();
    for (p, ph) in doc.graph.phases.iter().enumerate() {
        let a1 = matrix(&ph.first, &format!("graph.phases[{p}].first"), &mut problems);
        let a2 = matrix(&ph.second, &format!("graph.phases[{p}].second"), &mut problems);
        let cross = ph
            .cross
            .iter()
            .map(|c| CrossEdge {
                target_subnet: match c.into {
                    SubnetDoc::First => Subnet::First,
                    SubnetDoc::Second => Subnet::Second,
                },
                target: c.target,
                source: c.source,
                weight: c.weight,
            })
            .collect();
        if let (Some(first), Some(second)) = (a1, a2) {
            phases.push(GraphPhase { first, second, cross });
        }
    }
    let windows = Windows {
        first: doc.graph.windows.first,
        second: doc.graph.windows.second,
        cross: doc.graph.windows.cross,
    };
    let graph = if problems.is_empty() {
        match GraphSequenceSpec::new(phases, windows, doc.graph.eta) {
            Ok(g) => {
                let report = validate_weight_rule(&g, doc.graph.eta);
                problems.extend(report.violations.iter().map(ToString::to_string));
                Some(g)
            }
            Err(e) => {
                problems.push(format!("graph: {e}"));
                None
            }
        }
    } else {
        None
    };

    let schedule = schedule_from(&doc.stepsize.schedule).map_err(|e| problems.push(format!("stepsize.schedule: {e}")));
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let (graph, schedule) = (graph.expect("graph built"), schedule.expect("schedule built"));
    let [Some(x_box), Some(y_box)] = boxes else {
        unreachable!("box problems were reported")
    };

    let st = &doc.stepsize;
    let rule = match st.rule {
        RuleKind::Homogeneous => StepsizeRule::Homogeneous(schedule),
        RuleKind::AdaptiveCommon => StepsizeRule::AdaptiveCommon(schedule),
        RuleKind::AdaptivePeriodic => StepsizeRule::AdaptivePeriodic {
            schedule,
            p1: st.p1.unwrap_or(graph.period()),
            p2: st.p2.unwrap_or(graph.period()),
        },
        RuleKind::OracleHeterogeneous => match (&st.first, &st.second) {
            (Some(first), Some(second)) => StepsizeRule::OracleHeterogeneous {
                schedule,
                first: first.clone(),
                second: second.clone(),
            },
            (None, None) => oracle_heterogeneous_build(&graph, schedule)?,
            _ => {
                return Err(Error::Validation(vec![
                    "stepsize: give limit vectors for both subnets or for neither".into(),
                ]))
            }
        },
    };

    let scenario = Scenario {
        name: doc.meta.name,
        description: doc.meta.description,
        x_box,
        y_box,
        first,
        second,
        graph,
        rule,
        x0: doc.initial.x,
        y0: doc.initial.y,
        iterations: doc.run.iterations,
        metrics: MetricToggles {
            disagreement: doc.run.metrics.disagreement,
            nash_error: doc.run.metrics.nash_error,
            saddle_residual: doc.run.metrics.saddle_residual,
        },
        reference: doc.reference.map(|r| Reference {
            x: r.x,
            y: r.y,
            note: r.note,
        }),
    };
    let mut problems = Vec::new();
    if let Err(e) = scenario.check() {
        problems.push(match e {
            Error::Contract(m) | Error::Domain(m) => m,
            other => other.to_string(),
        });
    }
    if let Some(r) = &scenario.reference {
        if r.x.len() != scenario.m1() || r.y.len() != scenario.m2() {
            problems.push("reference: dimensions differ from m1, m2".into());
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let warnings = scenario_warnings(&scenario);
    Ok(LoadedScenario { scenario, warnings })
}

/// Advisory checks: declared windows, convexity sampling, schedule heuristics.
pub fn scenario_warnings(sc: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    let w = sc.graph.windows();
    for subnet in [Subnet::First, Subnet::Second] {
        if !check_ujsc(&sc.graph, subnet, w.of(subnet)) {
            out.push(format!(
                "subnet {subnet} is not jointly strongly connected over windows of {}",
                w.of(subnet)
            ));
        }
    }
    if !check_jointly_bipartite(&sc.graph, w.cross) {
        out.push(format!(
            "cross layer leaves a node without cross in-neighbors over some window of {}",
            w.cross
        ));
    }
    for (subnet, objs) in [(Subnet::First, &sc.first), (Subnet::Second, &sc.second)] {
        for (i, o) in objs.iter().enumerate() {
            for msg in convexity_warnings(&o.expr, &sc.x_box, &sc.y_box, 1000, i as u64) {
                out.push(format!("subnet {subnet}, agent {i}: {msg}"));
            }
        }
    }
    let horizon = sc.iterations.max(1000);
    if let Ok(report) = validate_schedule(sc.rule.schedule(), horizon) {
        for c in report.checks.iter().filter(|c| !c.passed) {
            out.push(format!("stepsize schedule check '{}' failed over {horizon} steps: {}", c.name, c.detail));
        }
    }
    out
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let src = std::fs::read_to_string(path)?;
    parse_scenario(&src)
}

/// Serializes a scenario; [`parse_scenario`] reads it back to an equal value.
pub fn scenario_to_string(sc: &Scenario) -> Result<String> {
    let agents = |objs: &[AgentObjective]| {
        objs.iter()
            .map(|o| AgentDoc {
                objective: Spanned::new(0..0, o.expr.to_string()),
                selection: if o.selection.slopes().iter().all(|s| *s == 0.0) {
                    Vec::new()
                } else {
                    o.selection.slopes().to_vec()
                },
            })
            .collect()
    };
    let schedule = match sc.rule.schedule() {
        GammaSchedule::PowerLaw { c, b, eps } => ScheduleDoc::PowerLaw { c: *c, b: *b, eps: *eps },
        GammaSchedule::Table(v) => ScheduleDoc::Table { values: v.clone() },
    };
    let mut stepsize = StepsizeDoc {
        rule: RuleKind::Homogeneous,
        schedule,
        first: None,
        second: None,
        p1: None,
        p2: None,
    };
    match &sc.rule {
        StepsizeRule::Homogeneous(_) => {}
        StepsizeRule::AdaptiveCommon(_) => stepsize.rule = RuleKind::AdaptiveCommon,
        StepsizeRule::AdaptivePeriodic { p1, p2, .. } => {
            stepsize.rule = RuleKind::AdaptivePeriodic;
            stepsize.p1 = Some(*p1);
            stepsize.p2 = Some(*p2);
        }
        StepsizeRule::OracleHeterogeneous { first, second, .. } => {
            stepsize.rule = RuleKind::OracleHeterogeneous;
            stepsize.first = Some(first.clone());
            stepsize.second = Some(second.clone());
        }
    }
    let w = sc.graph.windows();
    let doc = Doc {
        meta: MetaDoc {
            name: sc.name.clone(),
            description: sc.description.clone(),
        },
        dimensions: DimsDoc { m1: sc.m1(), m2: sc.m2() },
        boxes: BoxesDoc {
            x: IntervalDoc {
                lower: sc.x_box.lower().to_vec(),
                upper: sc.x_box.upper().to_vec(),
            },
            y: IntervalDoc {
                lower: sc.y_box.lower().to_vec(),
                upper: sc.y_box.upper().to_vec(),
            },
        },
        agents: AgentsDoc {
            first: agents(&sc.first),
            second: agents(&sc.second),
        },
        graph: GraphDoc {
            eta: sc.graph.eta(),
            windows: WindowsDoc {
                first: w.first,
                second: w.second,
                cross: w.cross,
            },
            phases: sc
                .graph
                .phases()
                .iter()
                .map(|p| PhaseDoc {
                    first: p.first.to_rows(),
                    second: p.second.to_rows(),
                    cross: p
                        .cross
                        .iter()
                        .map(|e| CrossDoc {
                            into: match e.target_subnet {
                                Subnet::First => SubnetDoc::First,
                                Subnet::Second => SubnetDoc::Second,
                            },
                            target: e.target,
                            source: e.source,
                            weight: e.weight,
                        })
                        .collect(),
                })
                .collect(),
        },
        stepsize,
        initial: InitialDoc {
            x: sc.x0.clone(),
            y: sc.y0.clone(),
        },
        run: RunDoc {
            iterations: sc.iterations,
            metrics: MetricsDoc {
                disagreement: sc.metrics.disagreement,
                nash_error: sc.metrics.nash_error,
                saddle_residual: sc.metrics.saddle_residual,
            },
        },
        reference: sc.reference.as_ref().map(|r| ReferenceDoc {
            x: r.x.clone(),
            y: r.y.clone(),
            note: r.note.clone(),
        }),
    };
    toml::to_string(&doc).map_err(|e| Error::contract(format!("scenario serialization failed: {e}")))
}

pub fn save_scenario(sc: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, scenario_to_string(sc)?)?;
    Ok(())
}
