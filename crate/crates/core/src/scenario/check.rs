use crate::digraph::{
    check_jointly_bipartite, check_ujsc, is_weight_balanced, limiting_stochastic_vector, perron_vector,
    validate_weight_rule, StochasticMatrix, Subnet, LIMIT_TOL,
};
use crate::engine::Scenario;

/// Verdicts on the connectivity assumptions of a scenario plus per-phase
/// balance, Perron and limit vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphReport {
    pub lines: Vec<String>,
    /// Failed assumption identifiers; empty when everything declared holds.
    pub failed: Vec<String>,
}

impl GraphReport {
    pub fn holds(&self) -> bool {
        self.failed.is_empty()
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("({})", parts.join(", "))
}

pub fn graph_report(sc: &Scenario) -> GraphReport {
    let g = &sc.graph;
    let mut lines = Vec::new();
    let mut failed = Vec::new();

    let weights = validate_weight_rule(g, g.eta());
    lines.push(format!("weight-rule (eta={}): {}", g.eta(), weights.holds()));
    for v in &weights.violations {
        lines.push(format!("  {v}"));
        failed.push(v.clause.id().to_string());
    }
    for subnet in [Subnet::First, Subnet::Second] {
        let t = g.windows().of(subnet);
        let ok = check_ujsc(g, subnet, t);
        lines.push(format!("subnet {subnet}: UJSC(T={t})={ok}"));
        if !ok {
            failed.push(format!("ujsc-subnet-{subnet}"));
        }
    }
    let t = g.windows().cross;
    let ok = check_jointly_bipartite(g, t);
    lines.push(format!("cross: jointly-bipartite(T={t})={ok}"));
    if !ok {
        failed.push("jointly-bipartite".into());
    }

    for p in 0..g.period() {
        for subnet in [Subnet::First, Subnet::Second] {
            let m = g.matrix(subnet, p);
            let mut line = format!("phase {p} subnet {subnet}:");
            match StochasticMatrix::new(m.clone()) {
                Ok(s) => {
                    line.push_str(&format!(" balanced={}", is_weight_balanced(&s, 1e-12)));
                    match perron_vector(&s, 1e-12) {
                        Ok(v) => line.push_str(&format!(" perron={}", fmt_vec(&v.phi))),
                        Err(_) => line.push_str(" perron=none"),
                    }
                }
                Err(_) => line.push_str(" balanced=n/a"),
            }
            match limiting_stochastic_vector(g, subnet, p, LIMIT_TOL) {
                Ok(v) => line.push_str(&format!(" limit={}", fmt_vec(&v.phi))),
                Err(_) => line.push_str(" limit=none"),
            }
            lines.push(line);
        }
    }
    GraphReport { lines, failed }
}
