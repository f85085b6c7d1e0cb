//! Scenario sets, decision problems and certification.

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundContext;
use crate::error::{Error, Result};
use crate::rng;

/// 1-based position of a scenario in its set.
pub type ScenarioId = usize;

/// Default absolute tolerance used by `decisions_equal`.
pub const DECISION_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOrigin {
    pub seed: Option<u64>,
    pub sampler: Option<String>,
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSet<S> {
    entries: Vec<(ScenarioId, S)>,
    pub origin: ScenarioOrigin,
}

impl<S> ScenarioSet<S> {
    /// Numbers the payloads `1..=n` in order.
    pub fn new(payloads: Vec<S>, origin: ScenarioOrigin) -> Self {
        let entries = payloads
            .into_iter()
            .enumerate()
            .map(|(i, s)| (i + 1, s))
            .collect();
        ScenarioSet { entries, origin }
    }

    pub fn from_entries(entries: Vec<(ScenarioId, S)>, origin: ScenarioOrigin) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (id, _) in &entries {
            if !seen.insert(*id) {
                return Err(Error::domain(format!("duplicate scenario id {id}")));
            }
        }
        Ok(ScenarioSet { entries, origin })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<ScenarioId> {
        self.entries.iter().map(|(id, _)| *id).collect()
    }

    pub fn get(&self, id: ScenarioId) -> Option<&S> {
        self.entries.iter().find(|(i, _)| *i == id).map(|(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ScenarioId, &S)> {
        self.entries.iter().map(|(id, s)| (*id, s))
    }

    pub fn payloads(&self) -> impl Iterator<Item = &S> {
        self.entries.iter().map(|(_, s)| s)
    }

    pub fn all(&self) -> Vec<(ScenarioId, &S)> {
        self.iter().collect()
    }

    /// The listed scenarios, in set order.
    pub fn select(&self, ids: &[ScenarioId]) -> Vec<(ScenarioId, &S)> {
        let wanted: BTreeSet<ScenarioId> = ids.iter().copied().collect();
        self.iter().filter(|(id, _)| wanted.contains(id)).collect()
    }

    pub fn into_payloads(self) -> Vec<S> {
        self.entries.into_iter().map(|(_, s)| s).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub variables: Vec<f64>,
    pub objective: f64,
    /// Problem-specific values that are not part of the compared decision.
    #[serde(default)]
    pub extra: Vec<f64>,
    /// Scenarios whose constraints are active at the decision, when known.
    #[serde(default)]
    pub active_scenarios: Option<Vec<ScenarioId>>,
}

impl Decision {
    pub fn new(variables: Vec<f64>, objective: f64) -> Self {
        Decision {
            variables,
            objective,
            extra: Vec::new(),
            active_scenarios: None,
        }
    }
}

/// Component-wise comparison with an absolute tolerance.
pub fn variables_equal(a: &Decision, b: &Decision, tol: f64) -> bool {
    a.variables.len() == b.variables.len()
        && a.variables
            .iter()
            .zip(&b.variables)
            .all(|(x, y)| (x - y).abs() <= tol)
}

/// A decision map over scenario lists with its two appropriateness criteria.
///
/// `solve` must be permutation invariant and must return the same decision
/// when scenarios for which the decision is baseline appropriate are added.
pub trait DecisionProblem {
    type Scenario;

    fn solve(&self, scenarios: &[(ScenarioId, &Self::Scenario)]) -> Result<Decision>;

    fn decisions_equal(&self, a: &Decision, b: &Decision) -> bool {
        variables_equal(a, b, DECISION_TOLERANCE)
    }

    fn baseline_ok(&self, decision: &Decision, scenario: &Self::Scenario) -> Result<bool>;

    fn postdesign_ok(&self, decision: &Decision, scenario: &Self::Scenario) -> Result<bool>;

    /// Post-design appropriateness implies baseline appropriateness.
    fn is_nested(&self) -> bool;

    /// The support list is asserted to be almost surely unique.
    fn nondegenerate(&self) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Minimality {
    Exact,
    UpperBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportInfo {
    pub indices: Vec<ScenarioId>,
    pub cardinality: usize,
    pub minimality: Minimality,
    /// The nominated candidates did not reproduce the decision and the search
    /// restarted from the full set.
    pub fell_back_to_full_set: bool,
}

/// `scenarios` sorted by payload content, ties by id. Deterministic solvers
/// fed this order return the same decision for any permutation of the input.
pub fn canonical_order<'a, S, K>(
    scenarios: &[(ScenarioId, &'a S)],
    key: K,
) -> Vec<(ScenarioId, &'a S)>
where
    K: Fn(&S) -> Vec<f64>,
{
    let mut keyed: Vec<(Vec<f64>, ScenarioId, &'a S)> =
        scenarios.iter().map(|&(id, s)| (key(s), id, s)).collect();
    keyed.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(a.0.len().cmp(&b.0.len()))
            .then(a.1.cmp(&b.1))
    });
    keyed.into_iter().map(|(_, id, s)| (id, s)).collect()
}

fn solve_on<P: DecisionProblem>(
    problem: &P,
    scenarios: &ScenarioSet<P::Scenario>,
    ids: &[ScenarioId],
) -> Result<Decision> {
    problem
        .solve(&scenarios.select(ids))
        .map_err(|e| Error::SublistSolve {
            sublist: ids.to_vec(),
            source: Box::new(e),
        })
}

/// Greedy irreducible support list for `decision`, the solution on the full
/// set.
pub fn support_for_decision<P: DecisionProblem>(
    problem: &P,
    scenarios: &ScenarioSet<P::Scenario>,
    decision: &Decision,
) -> Result<SupportInfo> {
    let all = scenarios.ids();
    let mut fell_back = false;
    let mut current: Vec<ScenarioId> = match &decision.active_scenarios {
        Some(active) => {
            let mut c = active.clone();
            c.sort_unstable();
            c.dedup();
            let d = solve_on(problem, scenarios, &c)?;
            if problem.decisions_equal(&d, decision) {
                c
            } else {
                fell_back = true;
                let mut a = all.clone();
                a.sort_unstable();
                a
            }
        }
        None => {
            let mut a = all.clone();
            a.sort_unstable();
            a
        }
    };
    loop {
        let mut removed_any = false;
        let sweep = current.clone();
        for id in sweep {
            let trial: Vec<ScenarioId> = current.iter().copied().filter(|&i| i != id).collect();
            let d = solve_on(problem, scenarios, &trial)?;
            if problem.decisions_equal(&d, decision) {
                current = trial;
                removed_any = true;
            }
        }
        if !removed_any {
            break;
        }
    }
    let cardinality = current.len();
    Ok(SupportInfo {
        indices: current,
        cardinality,
        minimality: if cardinality == 0 {
            Minimality::Exact
        } else {
            Minimality::UpperBound
        },
        fell_back_to_full_set: fell_back,
    })
}

pub fn compute_baseline_support<P: DecisionProblem>(
    problem: &P,
    scenarios: &ScenarioSet<P::Scenario>,
) -> Result<SupportInfo> {
    let decision = solve_on(problem, scenarios, &scenarios.ids())?;
    support_for_decision(problem, scenarios, &decision)
}

/// Scenarios for which `decision` is not post-design appropriate, ascending.
pub fn count_postdesign_violations<P: DecisionProblem>(
    problem: &P,
    decision: &Decision,
    scenarios: &ScenarioSet<P::Scenario>,
) -> Result<(usize, Vec<ScenarioId>)> {
    let mut ids = Vec::new();
    for (id, s) in scenarios.iter() {
        let ok = problem
            .postdesign_ok(decision, s)
            .map_err(|e| Error::Predicate {
                scenario: id,
                source: Box::new(e),
            })?;
        if !ok {
            ids.push(id);
        }
    }
    ids.sort_unstable();
    Ok((ids.len(), ids))
}

/// Size of the support augmented with the violators. With `prune`, elements
/// are then greedily dropped as long as both the decision and the number of
/// violators within the list are preserved.
pub fn instrumental_complexity<P: DecisionProblem>(
    problem: &P,
    scenarios: &ScenarioSet<P::Scenario>,
    support: &SupportInfo,
    violators: &[ScenarioId],
    prune: bool,
) -> Result<usize> {
    let union: BTreeSet<ScenarioId> = support.indices.iter().chain(violators).copied().collect();
    if !prune {
        return Ok(union.len());
    }
    let decision = solve_on(problem, scenarios, &scenarios.ids())?;
    let target = violators.len();
    let mut current: Vec<ScenarioId> = union.into_iter().collect();
    let violations_within = |d: &Decision, ids: &[ScenarioId]| -> Result<usize> {
        let mut count = 0;
        for (id, s) in scenarios.select(ids) {
            let ok = problem.postdesign_ok(d, s).map_err(|e| Error::Predicate {
                scenario: id,
                source: Box::new(e),
            })?;
            if !ok {
                count += 1;
            }
        }
        Ok(count)
    };
    loop {
        let mut removed_any = false;
        for id in current.clone() {
            let trial: Vec<ScenarioId> = current.iter().copied().filter(|&i| i != id).collect();
            let d = solve_on(problem, scenarios, &trial)?;
            if problem.decisions_equal(&d, &decision) && violations_within(&d, &trial)? == target {
                current = trial;
                removed_any = true;
            }
        }
        if !removed_any {
            break;
        }
    }
    Ok(current.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub sample_size: usize,
    pub confidence_beta: f64,
    pub baseline_complexity: usize,
    pub instrumental_complexity: usize,
    pub violator_ids: Vec<ScenarioId>,
    /// ε at the baseline complexity: bound on the baseline risk.
    pub baseline_upper: f64,
    pub theorem1_upper: f64,
    pub theorem2_interval: Option<Interval>,
    pub theorem3_interval: Option<Interval>,
    pub total_confidence: f64,
    pub is_nested: bool,
    pub nondegenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportInfo>,
}

pub fn certify_from_complexities(
    sample_size: usize,
    confidence_beta: f64,
    s_b: usize,
    s_plus: usize,
    is_nested: bool,
    nondegenerate: bool,
) -> Result<CertificationReport> {
    let ctx = BoundContext::new(sample_size, confidence_beta)?;
    certify_with_context(&ctx, s_b, s_plus, is_nested, nondegenerate)
}

pub fn certify_with_context(
    ctx: &BoundContext,
    s_b: usize,
    s_plus: usize,
    is_nested: bool,
    nondegenerate: bool,
) -> Result<CertificationReport> {
    let n = ctx.sample_size();
    let beta = ctx.confidence_beta();
    if s_b > s_plus || s_plus > n {
        return Err(Error::domain(format!(
            "complexities must satisfy s_b <= s_plus <= N, got {s_b}, {s_plus}, {n}"
        )));
    }
    let baseline_upper = ctx.epsilon_upper(s_b)?;
    let theorem1_upper = ctx.epsilon_upper(s_plus)?;
    let mut theorem2_interval = None;
    let mut theorem3_interval = None;
    let mut total_confidence = 1.0 - beta;
    if nondegenerate {
        let (lo, hi) = ctx.epsilon_pair(s_plus)?;
        if is_nested {
            theorem2_interval = Some(Interval {
                lower: lo,
                upper: hi,
            });
        } else {
            theorem3_interval = Some(Interval {
                lower: (lo - baseline_upper).max(0.0),
                upper: hi,
            });
            total_confidence = 1.0 - 2.0 * beta;
        }
    }
    Ok(CertificationReport {
        sample_size: n,
        confidence_beta: beta,
        baseline_complexity: s_b,
        instrumental_complexity: s_plus,
        violator_ids: Vec::new(),
        baseline_upper,
        theorem1_upper,
        theorem2_interval,
        theorem3_interval,
        total_confidence,
        is_nested,
        nondegenerate,
        support: None,
    })
}

/// Everything produced while certifying one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub decision: Decision,
    pub support: SupportInfo,
    pub report: CertificationReport,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CertifyOptions {
    pub prune: bool,
}

/// Solve, extract complexities and assemble the report.
pub fn certify<P: DecisionProblem>(
    problem: &P,
    scenarios: &ScenarioSet<P::Scenario>,
    confidence_beta: f64,
) -> Result<CertificationReport> {
    Ok(certify_full(
        problem,
        scenarios,
        confidence_beta,
        CertifyOptions::default(),
    )?
    .report)
}

pub fn certify_full<P: DecisionProblem>(
    problem: &P,
    scenarios: &ScenarioSet<P::Scenario>,
    confidence_beta: f64,
    options: CertifyOptions,
) -> Result<Certification> {
    let ctx =
        BoundContext::new(scenarios.len(), confidence_beta).map_err(|e| e.at_stage("bounds"))?;
    let decision =
        solve_on(problem, scenarios, &scenarios.ids()).map_err(|e| e.at_stage("solve"))?;
    let support =
        support_for_decision(problem, scenarios, &decision).map_err(|e| e.at_stage("support"))?;
    let (_, violators) = count_postdesign_violations(problem, &decision, scenarios)
        .map_err(|e| e.at_stage("violations"))?;
    let s_plus = instrumental_complexity(problem, scenarios, &support, &violators, options.prune)
        .map_err(|e| e.at_stage("instrumental"))?;
    let mut report = certify_with_context(
        &ctx,
        support.cardinality,
        s_plus,
        problem.is_nested(),
        problem.nondegenerate(),
    )
    .map_err(|e| e.at_stage("bounds"))?;
    report.violator_ids = violators;
    report.support = Some(support.clone());
    Ok(Certification {
        decision,
        support,
        report,
    })
}

/// A seeded generator of scenarios.
pub trait ScenarioSampler {
    type Scenario;

    fn name(&self) -> &str;

    fn sample(&self, rng: &mut ChaCha20Rng) -> Result<Self::Scenario>;

    /// `n` training scenarios for `seed`.
    fn sample_set(&self, n: usize, seed: u64) -> Result<ScenarioSet<Self::Scenario>> {
        if n == 0 {
            return Err(Error::domain("number of scenarios must be at least 1"));
        }
        let mut r = rng::training_rng(seed);
        let payloads = (0..n)
            .map(|_| self.sample(&mut r))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScenarioSet::new(
            payloads,
            ScenarioOrigin {
                seed: Some(seed),
                sampler: Some(self.name().to_string()),
                path: None,
            },
        ))
    }
}

/// Fraction of fresh scenarios on which `predicate` fails.
pub fn monte_carlo_risk<S, F>(
    mut predicate: F,
    decision: &Decision,
    sampler: &S,
    n_samples: usize,
    seed: u64,
) -> Result<f64>
where
    S: ScenarioSampler,
    F: FnMut(&Decision, &S::Scenario) -> Result<bool>,
{
    if n_samples == 0 {
        return Err(Error::domain("Monte Carlo sample size must be positive"));
    }
    let mut r = rng::validation_rng(seed);
    let mut failures = 0usize;
    for i in 0..n_samples {
        let s = sampler.sample(&mut r)?;
        let ok = predicate(decision, &s).map_err(|e| Error::Predicate {
            scenario: i + 1,
            source: Box::new(e),
        })?;
        if !ok {
            failures += 1;
        }
    }
    Ok(failures as f64 / n_samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, LinearProgram, RowTag, Sense};
    use rand::Rng;

    struct Constant;

    impl DecisionProblem for Constant {
        type Scenario = f64;
        fn solve(&self, _: &[(ScenarioId, &f64)]) -> Result<Decision> {
            Ok(Decision::new(vec![0.5], 0.0))
        }
        fn baseline_ok(&self, _: &Decision, _: &f64) -> Result<bool> {
            Ok(true)
        }
        fn postdesign_ok(&self, _: &Decision, _: &f64) -> Result<bool> {
            Ok(true)
        }
        fn is_nested(&self) -> bool {
            true
        }
        fn nondegenerate(&self) -> bool {
            false
        }
    }

    /// min x + y s.t. x >= a_i, y >= b_i
    struct Corner;

    impl DecisionProblem for Corner {
        type Scenario = (f64, f64);
        fn solve(&self, scenarios: &[(ScenarioId, &(f64, f64))]) -> Result<Decision> {
            let mut lp = LinearProgram::new(vec![1.0, 1.0]);
            lp.set_bounds(0, -10.0, f64::INFINITY);
            lp.set_bounds(1, -10.0, f64::INFINITY);
            for (id, s) in scenarios {
                lp.push_row(vec![1.0, 0.0], Sense::Ge, s.0, RowTag::Scenario(*id));
                lp.push_row(vec![0.0, 1.0], Sense::Ge, s.1, RowTag::Scenario(*id));
            }
            let sol = solve_lp(&lp)?;
            let mut d = Decision::new(sol.variables.clone(), sol.objective_value);
            d.active_scenarios = Some(sol.active_scenarios());
            Ok(d)
        }
        fn baseline_ok(&self, d: &Decision, s: &(f64, f64)) -> Result<bool> {
            Ok(d.variables[0] >= s.0 - 1e-9 && d.variables[1] >= s.1 - 1e-9)
        }
        fn postdesign_ok(&self, d: &Decision, s: &(f64, f64)) -> Result<bool> {
            self.baseline_ok(d, s)
        }
        fn is_nested(&self) -> bool {
            true
        }
        fn nondegenerate(&self) -> bool {
            true
        }
    }

    struct Table(Vec<bool>);

    impl DecisionProblem for Table {
        type Scenario = usize;
        fn solve(&self, _: &[(ScenarioId, &usize)]) -> Result<Decision> {
            Ok(Decision::new(vec![], 0.0))
        }
        fn baseline_ok(&self, _: &Decision, _: &usize) -> Result<bool> {
            Ok(true)
        }
        fn postdesign_ok(&self, _: &Decision, s: &usize) -> Result<bool> {
            Ok(self.0[*s])
        }
        fn is_nested(&self) -> bool {
            false
        }
        fn nondegenerate(&self) -> bool {
            false
        }
    }

    struct Uniform;

    impl ScenarioSampler for Uniform {
        type Scenario = f64;
        fn name(&self) -> &str {
            "uniform"
        }
        fn sample(&self, rng: &mut ChaCha20Rng) -> Result<f64> {
            Ok(rng.random::<f64>())
        }
    }

    fn corner_set() -> ScenarioSet<(f64, f64)> {
        ScenarioSet::new(vec![(1.0, 0.0), (0.0, 1.0), (0.5, 0.5)], Default::default())
    }

    #[test]
    fn constant_map_has_empty_support() {
        let set = ScenarioSet::new(vec![0.1, 0.2, 0.3], Default::default());
        let sup = compute_baseline_support(&Constant, &set).unwrap();
        assert!(sup.indices.is_empty());
        assert_eq!(sup.minimality, Minimality::Exact);
        let rep = certify(&Constant, &set, 0.1).unwrap();
        assert_eq!(
            (rep.baseline_complexity, rep.instrumental_complexity),
            (0, 0)
        );
        let eps0 = BoundContext::new(3, 0.1).unwrap().epsilon_upper(0).unwrap();
        assert_eq!(rep.theorem1_upper, eps0);
    }

    #[test]
    fn corner_support() {
        let set = corner_set();
        let sup = compute_baseline_support(&Corner, &set).unwrap();
        assert_eq!(sup.indices, vec![1, 2]);
        assert!(!sup.fell_back_to_full_set);
        let rep = certify(&Corner, &set, 0.1).unwrap();
        assert_eq!(rep.instrumental_complexity, 2);
        assert!(rep.violator_ids.is_empty());
    }

    #[test]
    fn violation_truth_table() {
        let set = ScenarioSet::new(vec![0, 1, 2, 3, 4], Default::default());
        let p = Table(vec![true, false, true, false, false]);
        let d = Decision::new(vec![], 0.0);
        let (count, ids) = count_postdesign_violations(&p, &d, &set).unwrap();
        assert_eq!((count, ids), (3, vec![2, 4, 5]));
    }

    #[test]
    fn instrumental_counts_union() {
        let set = ScenarioSet::new(vec![0.0; 300], Default::default());
        let support = SupportInfo {
            indices: (1..=8).collect(),
            cardinality: 8,
            minimality: Minimality::UpperBound,
            fell_back_to_full_set: false,
        };
        let violators: Vec<ScenarioId> = (9..200).collect();
        assert_eq!(
            instrumental_complexity(&Constant, &set, &support, &violators, false).unwrap(),
            199
        );
        assert_eq!(
            instrumental_complexity(&Constant, &set, &support, &[], false).unwrap(),
            8
        );
        // overlapping ids are counted once
        assert_eq!(
            instrumental_complexity(&Constant, &set, &support, &[3, 4, 9], false).unwrap(),
            9
        );
    }

    #[test]
    fn interval_selection_follows_flags() {
        let r = certify_from_complexities(2000, 1e-7, 4, 75, true, false).unwrap();
        assert!(r.theorem2_interval.is_none() && r.theorem3_interval.is_none());
        assert_eq!(r.total_confidence, 1.0 - 1e-7);

        let r = certify_from_complexities(2000, 1e-5, 8, 199, false, true).unwrap();
        let i = r.theorem3_interval.unwrap();
        assert!((i.lower - (0.0671466 - 0.0159700)).abs() < 5e-6, "{i:?}");
        assert_eq!(r.total_confidence, 1.0 - 2e-5);

        let r = certify_from_complexities(100, 1e-3, 3, 10, true, true).unwrap();
        assert!(r.theorem2_interval.is_some() && r.theorem3_interval.is_none());

        let r = certify_from_complexities(50, 1e-3, 3, 50, true, false).unwrap();
        assert_eq!(r.theorem1_upper, 1.0);
        assert!(certify_from_complexities(50, 1e-3, 5, 4, true, false).is_err());
    }

    #[test]
    fn monte_carlo_frequencies() {
        let d = Decision::new(vec![], 0.0);
        let always = monte_carlo_risk(|_, _| Ok(true), &d, &Uniform, 1000, 1).unwrap();
        let never = monte_carlo_risk(|_, _| Ok(false), &d, &Uniform, 1000, 1).unwrap();
        assert_eq!((always, never), (0.0, 1.0));
        let p = monte_carlo_risk(|_, s: &f64| Ok(*s <= 0.3), &d, &Uniform, 100_000, 3).unwrap();
        assert!((p - 0.7).abs() < 0.01, "{p}");
        let q = monte_carlo_risk(|_, s: &f64| Ok(*s <= 0.3), &d, &Uniform, 100_000, 3).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(ScenarioSet::from_entries(vec![(1, 0.0), (1, 1.0)], Default::default()).is_err());
    }
}
