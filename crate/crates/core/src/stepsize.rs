//! Stepsize schedules and per-agent stepsize rules.
//!
//! All rules scale one diminishing schedule `γ_k`. The heterogeneous and
//! adaptive rules divide it by an estimate of the agent's component of the
//! transition-product limit vector, which cancels the bias that unbalanced
//! graphs introduce into the weighted objective.

use crate::digraph::{limiting_stochastic_vector, GraphSequenceSpec, Matrix, Subnet};
use crate::error::{Error, Result};

/// Diminishing schedule `γ_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum GammaSchedule {
    /// `c / (k + b)^{1/2 + ε}`.
    PowerLaw { c: f64, b: f64, eps: f64 },
    /// Explicit values; the last one repeats past the end.
    Table(Vec<f64>),
}

impl GammaSchedule {
    pub fn power_law(c: f64, b: f64, eps: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0 && b.is_finite() && b > 0.0) {
            return Err(Error::domain(format!("power-law schedule needs c > 0 and b > 0, got c={c}, b={b}")));
        }
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::domain(format!("power-law exponent offset eps={eps} outside (0, 1/2]")));
        }
        Ok(GammaSchedule::PowerLaw { c, b, eps })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empty stepsize table"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(format!("stepsize table entry {v} is not positive")));
        }
        Ok(GammaSchedule::Table(values))
    }

    /// `γ_k = 1/(k + b)`.
    pub fn harmonic(b: f64) -> Self {
        GammaSchedule::PowerLaw { c: 1.0, b, eps: 0.5 }
    }

    pub fn at(&self, k: usize) -> f64 {
        match self {
            GammaSchedule::PowerLaw { c, b, eps } => {
                let base = k as f64 + b;
                if *eps == 0.5 {
                    c / base
                } else {
                    c / base.powf(0.5 + eps)
                }
            }
            GammaSchedule::Table(v) => v[k.min(v.len() - 1)],
        }
    }
}

pub fn gamma(schedule: &GammaSchedule, k: usize) -> f64 {
    schedule.at(k)
}

/// One numeric check of [`validate_schedule`]. Every check is a finite-horizon
/// heuristic for an asymptotic property, not a proof.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub heuristic: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleReport {
    pub horizon: usize,
    pub checks: Vec<ScheduleCheck>,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ScheduleCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Numeric checks over `0..horizon`: monotone, `γ_k Σ_{s<k} γ_s` decreasing
/// over the second half, and a local decay exponent near the horizon that is
/// above 1/2 (square summable) and at most 1 (divergent sum).
pub fn validate_schedule(schedule: &GammaSchedule, horizon: usize) -> Result<ScheduleReport> {
    if horizon < 100 {
        return Err(Error::contract(format!("schedule horizon {horizon} below 100")));
    }
    let g: Vec<f64> = (0..horizon).map(|k| schedule.at(k)).collect();
    let mut checks = Vec::new();

    let rise = g.windows(2).position(|w| w[1] > w[0]);
    checks.push(ScheduleCheck {
        name: "non-increasing",
        passed: rise.is_none(),
        detail: rise.map_or("no increase found".into(), |k| format!("γ increases at k={}", k + 1)),
        heuristic: true,
    });

    let mut partial = 0.0;
    let mut prod = Vec::with_capacity(horizon);
    for v in &g {
        prod.push(v * partial);
        partial += v;
    }
    let half = horizon / 2;
    let climb = (half..horizon - 1).find(|&k| prod[k + 1] > prod[k] * (1.0 + 1e-12));
    checks.push(ScheduleCheck {
        name: "vanishing-product",
        passed: climb.is_none(),
        detail: climb.map_or(format!("γ_k·Σγ_s = {:.3e} at the horizon", prod[horizon - 1]), |k| {
            format!("γ_k·Σγ_s grows at k={}", k + 1)
        }),
        heuristic: true,
    });

    // Local decay exponent p of γ_k ~ k^(-p) between k = H/2 and k = H.
    let (a, b) = (g[half - 1], g[horizon - 1]);
    let p = if b > 0.0 {
        (a / b).ln() / (horizon as f64 / half as f64).ln()
    } else {
        f64::INFINITY
    };
    checks.push(ScheduleCheck {
        name: "summable-squares",
        passed: 2.0 * p > 1.0 + 1e-9,
        detail: format!("γ² decays like k^-{:.3} near the horizon", 2.0 * p),
        heuristic: true,
    });
    checks.push(ScheduleCheck {
        name: "divergent-sum",
        passed: p <= 1.0 + 1e-9,
        detail: format!("γ decays like k^-{p:.3} near the horizon"),
        heuristic: true,
    });
    Ok(ScheduleReport { horizon, checks })
}

/// How each agent turns `γ_k` into its own stepsize.
#[derive(Clone, Debug, PartialEq)]
pub enum StepsizeRule {
    Homogeneous(GammaSchedule),
    /// `first[ν]`, `second[ν]` are the limit vectors of products starting at
    /// phase `ν`; time `k` uses phase `(k + 1) mod period`.
    OracleHeterogeneous {
        schedule: GammaSchedule,
        first: Vec<Vec<f64>>,
        second: Vec<Vec<f64>>,
    },
    /// Learned readouts, for sequences whose matrices share a left eigenvector.
    AdaptiveCommon(GammaSchedule),
    /// Learned readouts with one bank per phase of the subnet period.
    AdaptivePeriodic { schedule: GammaSchedule, p1: usize, p2: usize },
}

impl StepsizeRule {
    pub fn schedule(&self) -> &GammaSchedule {
        match self {
            StepsizeRule::Homogeneous(s) | StepsizeRule::AdaptiveCommon(s) => s,
            StepsizeRule::OracleHeterogeneous { schedule, .. } | StepsizeRule::AdaptivePeriodic { schedule, .. } => {
                schedule
            }
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, StepsizeRule::AdaptiveCommon(_) | StepsizeRule::AdaptivePeriodic { .. })
    }

    /// Fresh learners for both subnets, or `None` for non-adaptive rules.
    pub fn learners(&self, n1: usize, n2: usize) -> Option<(LearnerState, LearnerState)> {
        match self {
            StepsizeRule::AdaptiveCommon(_) => Some((learner_init_common(n1), learner_init_common(n2))),
            StepsizeRule::AdaptivePeriodic { p1, p2, .. } => {
                Some((learner_init_periodic(n1, *p1), learner_init_periodic(n2, *p2)))
            }
            _ => None,
        }
    }

    /// Checks vector shapes against a graph sequence.
    pub fn check_against(&self, spec: &GraphSequenceSpec) -> Result<()> {
        match self {
            StepsizeRule::OracleHeterogeneous { first, second, .. } => {
                for (subnet, vecs) in [(Subnet::First, first), (Subnet::Second, second)] {
                    if vecs.len() != spec.period() {
                        return Err(Error::contract(format!(
                            "subnet {subnet}: {} limit vectors for a period of {}",
                            vecs.len(),
                            spec.period()
                        )));
                    }
                    for (nu, v) in vecs.iter().enumerate() {
                        if v.len() != spec.n(subnet) {
                            return Err(Error::contract(format!(
                                "subnet {subnet}, phase {nu}: limit vector has {} entries for {} agents",
                                v.len(),
                                spec.n(subnet)
                            )));
                        }
                        let sum: f64 = v.iter().sum();
                        if v.iter().any(|c| !(*c > 0.0)) || (sum - 1.0).abs() > 1e-6 {
                            return Err(Error::domain(format!(
                                "subnet {subnet}, phase {nu}: limit vector is not positive stochastic"
                            )));
                        }
                    }
                }
                Ok(())
            }
            StepsizeRule::AdaptivePeriodic { p1, p2, .. } => {
                for (subnet, p) in [(Subnet::First, *p1), (Subnet::Second, *p2)] {
                    if !spec.subnet_has_period(subnet, p) {
                        return Err(Error::contract(format!("subnet {subnet} matrices do not repeat with period {p}")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Tolerance used for the stored limit vectors.
pub const ORACLE_LIMIT_TOL: f64 = 1e-12;

/// Computes `φ^ℓ(ν)` for every phase and subnet.
pub fn oracle_heterogeneous_build(spec: &GraphSequenceSpec, schedule: GammaSchedule) -> Result<StepsizeRule> {
    let per_subnet = |subnet| -> Result<Vec<Vec<f64>>> {
        (0..spec.period())
            .map(|nu| limiting_stochastic_vector(spec, subnet, nu, ORACLE_LIMIT_TOL).map(|l| l.phi))
            .collect()
    };
    Ok(StepsizeRule::OracleHeterogeneous {
        schedule,
        first: per_subnet(Subnet::First)?,
        second: per_subnet(Subnet::Second)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Banks {
    Common(Vec<Vec<f64>>),
    /// `banks[ν]` starts from the basis at time `ν + 1`.
    Periodic(Vec<Option<Vec<Vec<f64>>>>),
}

/// Auxiliary consensus vectors of one subnet. `time` is the index `k` the
/// current readouts belong to.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState {
    n: usize,
    time: usize,
    banks: Banks,
}

fn basis(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// `α^i(0) = e_i` for every agent.
pub fn learner_init_common(n: usize) -> LearnerState {
    LearnerState {
        n,
        time: 0,
        banks: Banks::Common(basis(n)),
    }
}

/// `p` inactive banks.
pub fn learner_init_periodic(n: usize, p: usize) -> LearnerState {
    LearnerState {
        n,
        time: 0,
        banks: Banks::Periodic(vec![None; p.max(1)]),
    }
}

/// `α^i(k+1) = Σ_j a_ij(k) α^j(k)`.
pub fn learner_step_common(state: &LearnerState, a: &Matrix) -> LearnerState {
    let mut next = state.clone();
    next.advance(a);
    next
}

/// Mixes every active bank by `A(k)` and activates the bank whose start time
/// is reached.
pub fn learner_step_periodic(state: &LearnerState, a: &Matrix) -> LearnerState {
    let mut next = state.clone();
    next.advance(a);
    next
}

impl LearnerState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn period(&self) -> Option<usize> {
        match &self.banks {
            Banks::Common(_) => None,
            Banks::Periodic(b) => Some(b.len()),
        }
    }

    /// In-place step with `A(time)`.
    pub fn advance(&mut self, a: &Matrix) {
        assert_eq!(a.n(), self.n, "learner and matrix sizes differ");
        match &mut self.banks {
            Banks::Common(v) => *v = a.mix(v),
            Banks::Periodic(banks) => {
                for v in banks.iter_mut().flatten() {
                    *v = a.mix(v);
                }
            }
        }
        self.time += 1;
        if let Banks::Periodic(banks) = &mut self.banks {
            if let Some(b) = self.time.checked_sub(1).and_then(|nu| banks.get_mut(nu)) {
                *b = Some(basis(self.n));
            }
        }
    }

    /// Auxiliary vectors in use at the current time: the common vectors, or
    /// the bank of phase `time mod p` (`None` before it activates).
    pub fn vectors(&self) -> Option<&[Vec<f64>]> {
        match &self.banks {
            Banks::Common(v) => Some(v),
            Banks::Periodic(banks) => banks[self.time % banks.len()].as_deref(),
        }
    }

    /// Every auxiliary vector currently held, across banks.
    pub fn all_vectors(&self) -> Vec<&[f64]> {
        match &self.banks {
            Banks::Common(v) => v.iter().map(Vec::as_slice).collect(),
            Banks::Periodic(banks) => banks.iter().flatten().flat_map(|b| b.iter().map(Vec::as_slice)).collect(),
        }
    }

    /// `α̂^i` at the current time; 1 before the relevant bank activates.
    pub fn readout(&self, i: usize) -> f64 {
        self.vectors().map_or(1.0, |v| v[i][i])
    }
}

/// Stepsize of agent `i` of `subnet` at time `k`.
pub fn stepsize_for(
    rule: &StepsizeRule,
    i: usize,
    subnet: Subnet,
    k: usize,
    learner: Option<&LearnerState>,
) -> Result<f64> {
    let g = rule.schedule().at(k);
    match (rule, learner) {
        (StepsizeRule::Homogeneous(_), None) => Ok(g),
        (StepsizeRule::OracleHeterogeneous { first, second, .. }, None) => {
            let vecs = match subnet {
                Subnet::First => first,
                Subnet::Second => second,
            };
            let phi = &vecs[(k + 1) % vecs.len()];
            phi.get(i)
                .map(|p| g / p)
                .ok_or_else(|| Error::contract(format!("agent {i} outside subnet {subnet}")))
        }
        (StepsizeRule::AdaptiveCommon(_) | StepsizeRule::AdaptivePeriodic { .. }, Some(l)) => {
            if l.time() != k {
                return Err(Error::contract(format!("learner is at time {}, stepsize asked for k={k}", l.time())));
            }
            if i >= l.n() {
                return Err(Error::contract(format!("agent {i} outside subnet {subnet}")));
            }
            let r = l.readout(i);
            if !(r > 0.0) {
                return Err(Error::Numeric {
                    iteration: k,
                    detail: format!("learner readout {r} of agent {i} in subnet {subnet} is not positive"),
                });
            }
            Ok(g / r)
        }
        _ => Err(Error::contract("a learner is required exactly for adaptive rules")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{transition_product, GraphPhase, Windows};

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn example2() -> GraphSequenceSpec {
        let a2 = mat(&[&[0.9, 0.1], &[0.8, 0.2]]);
        GraphSequenceSpec::new(
            vec![
                GraphPhase {
                    first: mat(&[&[0.8, 0.2, 0.0], &[0.7, 0.3, 0.0], &[0.0, 0.6, 0.4]]),
                    second: a2.clone(),
                    cross: vec![],
                },
                GraphPhase {
                    first: mat(&[&[1.0, 0.0, 0.0], &[0.0, 0.3, 0.7], &[0.0, 0.4, 0.6]]),
                    second: a2,
                    cross: vec![],
                },
            ],
            Windows { first: 2, second: 1, cross: 2 },
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn gamma_examples() {
        let s = GammaSchedule::harmonic(50.0);
        assert_eq!(s.at(0), 0.02);
        assert!(s.at(11) < s.at(10));
        let t = GammaSchedule::power_law(1.0, 1.0, 0.25).unwrap();
        assert_eq!(t.at(0), 1.0);
        assert!(GammaSchedule::power_law(1.0, 1.0, 0.0).is_err());
        assert!(GammaSchedule::power_law(1.0, 1.0, 0.6).is_err());
        let tab = GammaSchedule::table(vec![0.5, 0.25]).unwrap();
        assert_eq!(tab.at(7), 0.25);
    }

    #[test]
    fn schedule_validation() {
        let r = validate_schedule(&GammaSchedule::harmonic(50.0), 100_000).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.checks.iter().all(|c| c.heuristic));

        let constant = GammaSchedule::table(vec![0.01]).unwrap();
        let r = validate_schedule(&constant, 10_000).unwrap();
        assert!(!r.check("summable-squares").unwrap().passed);

        let boundary = GammaSchedule::Table((0..10_000).map(|k| 1.0 / (k as f64 + 1.0).sqrt()).collect());
        let r = validate_schedule(&boundary, 10_000).unwrap();
        assert!(!r.check("summable-squares").unwrap().passed);

        let summable = GammaSchedule::Table((0..10_000).map(|k| 1.0 / (k as f64 + 1.0).powi(2)).collect());
        assert!(!validate_schedule(&summable, 10_000).unwrap().check("divergent-sum").unwrap().passed);

        assert!(validate_schedule(&constant, 99).is_err());
    }

    #[test]
    fn oracle_rule_example2() {
        let spec = example2();
        let rule = oracle_heterogeneous_build(&spec, GammaSchedule::harmonic(50.0)).unwrap();
        let StepsizeRule::OracleHeterogeneous { first, .. } = &rule else {
            panic!()
        };
        for (got, want) in first[1].iter().zip([0.5336, 0.1525, 0.3139]) {
            assert!((got - want).abs() < 5e-5);
        }
        for (got, want) in first[0].iter().zip([0.5336, 0.3408, 0.1256]) {
            assert!((got - want).abs() < 5e-5);
        }
        // Even k reads phase 1.
        let a0 = stepsize_for(&rule, 1, Subnet::First, 0, None).unwrap();
        assert!((a0 - 0.02 / first[1][1]).abs() < 1e-15);
        for k in [0, 1, 7] {
            let b = stepsize_for(&rule, 1, Subnet::Second, k, None).unwrap();
            assert!((b - GammaSchedule::harmonic(50.0).at(k) * 9.0).abs() < 1e-9);
        }
        assert!(stepsize_for(&rule, 0, Subnet::First, 0, Some(&learner_init_common(3))).is_err());
    }

    #[test]
    fn oracle_rule_balanced_is_scaled_homogeneous() {
        let a = mat(&[&[0.6, 0.4, 0.0], &[0.4, 0.6, 0.0], &[0.0, 0.0, 1.0]]);
        let b = mat(&[&[1.0, 0.0, 0.0], &[0.0, 0.7, 0.3], &[0.0, 0.3, 0.7]]);
        let a2 = mat(&[&[0.9, 0.1], &[0.1, 0.9]]);
        let spec = GraphSequenceSpec::new(
            vec![
                GraphPhase { first: a, second: a2.clone(), cross: vec![] },
                GraphPhase { first: b, second: a2, cross: vec![] },
            ],
            Windows { first: 2, second: 1, cross: 2 },
            0.1,
        )
        .unwrap();
        let rule = oracle_heterogeneous_build(&spec, GammaSchedule::harmonic(50.0)).unwrap();
        for k in 0..4 {
            for i in 0..3 {
                let s = stepsize_for(&rule, i, Subnet::First, k, None).unwrap();
                assert!((s - 3.0 * rule.schedule().at(k)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn common_learner_examples() {
        let l0 = learner_init_common(2);
        assert_eq!(l0.vectors().unwrap(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!((l0.readout(0), l0.readout(1)), (1.0, 1.0));
        let a = mat(&[&[0.9, 0.1], &[0.8, 0.2]]);
        let l1 = learner_step_common(&l0, &a);
        assert_eq!(l1.vectors().unwrap(), &[vec![0.9, 0.1], vec![0.8, 0.2]]);
        assert_eq!((l1.readout(0), l1.readout(1)), (0.9, 0.2));
        let rule = StepsizeRule::AdaptiveCommon(GammaSchedule::harmonic(50.0));
        let s = stepsize_for(&rule, 1, Subnet::Second, 1, Some(&l1)).unwrap();
        assert!((s - (1.0 / 51.0) / 0.2).abs() < 1e-15);
        assert!(stepsize_for(&rule, 1, Subnet::Second, 2, Some(&l1)).is_err());

        let mut l = l1;
        for _ in 0..200 {
            l.advance(&a);
        }
        assert!((l.readout(0) - 8.0 / 9.0).abs() < 1e-12);
        assert!((l.readout(1) - 1.0 / 9.0).abs() < 1e-12);

        let id = Matrix::identity(2);
        assert_eq!(learner_step_common(&l0, &id), LearnerState { time: 1, ..l0 });
    }

    #[test]
    fn learner_rows_are_transition_rows() {
        let spec = example2();
        let mut l = learner_init_common(3);
        for k in 0..12 {
            l.advance(spec.matrix(Subnet::First, k));
            let phi = transition_product(&spec, Subnet::First, k, 0).unwrap();
            for (i, v) in l.vectors().unwrap().iter().enumerate() {
                for (j, x) in v.iter().enumerate() {
                    assert!((x - phi.get(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn periodic_banks() {
        let spec = example2();
        let mut l = learner_init_periodic(3, 2);
        let eta: f64 = spec.eta();
        for k in 0..200 {
            let r: Vec<f64> = (0..3).map(|i| l.readout(i)).collect();
            if k < 2 {
                assert_eq!(r, vec![1.0; 3]);
            }
            assert!(r.iter().all(|x| *x >= eta.powi(k as i32)));
            l.advance(spec.matrix(Subnet::First, k));
        }
        // time 200 is even: bank 0, which tracks φ(1).
        let odd = limiting_stochastic_vector(&spec, Subnet::First, 1, 1e-13).unwrap();
        let even = limiting_stochastic_vector(&spec, Subnet::First, 0, 1e-13).unwrap();
        for i in 0..3 {
            assert!((l.readout(i) - odd.phi[i]).abs() < 1e-8);
        }
        l.advance(spec.matrix(Subnet::First, 200));
        for i in 0..3 {
            assert!((l.readout(i) - even.phi[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn single_bank_lags_common_learner() {
        let spec = example2();
        let mut common = learner_init_common(3);
        let mut single = learner_init_periodic(3, 1);
        single.advance(spec.matrix(Subnet::First, 0));
        assert_eq!(single.vectors().unwrap(), common.vectors().unwrap());
        // Shifted sequence: the single bank sees A(1), A(2), … from time 1.
        for k in 1..6 {
            single.advance(spec.matrix(Subnet::First, k));
            common.advance(spec.matrix(Subnet::First, k));
        }
        let phi = transition_product(&spec, Subnet::First, 5, 1).unwrap();
        for (i, v) in single.vectors().unwrap().iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                assert!((x - phi.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
