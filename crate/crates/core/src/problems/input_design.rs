//! Open-loop input design for an uncertain two-state linear system.
//!
//! Steering `η(t+1) = A η(t) + B u(t)` from `η0` towards the origin in `T`
//! steps, the final state is `A^T η0 + R u` with `R = [B, AB, ..., A^(T-1)B]`
//! and `u = (u(T-1), ..., u(0))`. The scenario program minimises the bound `h`
//! on `‖η(T)‖∞` plus a penalty `ρ Σ ξ_i` on per-scenario relaxations.

use rand_chacha::ChaCha20Rng;
use rand_distr::{Bernoulli, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, RowTag, Sense};
use crate::scenario::{canonical_order, Decision, DecisionProblem, ScenarioId, ScenarioSampler};

pub const PROBLEM_ID: &str = "input-design";

pub type Matrix2 = [[f64; 2]; 2];

pub const NOMINAL_A: Matrix2 = [[0.8, -1.0], [0.0, -0.9]];
pub const BASE_STD: f64 = 0.05;
pub const OUTLIER_PROBABILITY: f64 = 0.03;
/// Slack allowed when checking the relaxed constraint of a scenario.
pub const COST_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputScenario {
    #[serde(rename = "A")]
    pub a: Matrix2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDesignSpec {
    pub horizon: usize,
    pub initial_state: [f64; 2],
    pub input_matrix: [f64; 2],
    pub input_bound: f64,
    pub relaxation_rho: f64,
}

impl InputDesignSpec {
    pub fn new(relaxation_rho: f64) -> Result<Self> {
        let spec = InputDesignSpec {
            relaxation_rho,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::domain("horizon must be at least 1"));
        }
        if !(self.relaxation_rho > 0.0) || !self.relaxation_rho.is_finite() {
            return Err(Error::domain(format!(
                "relaxation weight rho must be positive, got {}",
                self.relaxation_rho
            )));
        }
        if !(self.input_bound > 0.0) {
            return Err(Error::domain("input bound must be positive"));
        }
        Ok(())
    }
}

impl Default for InputDesignSpec {
    fn default() -> Self {
        InputDesignSpec {
            horizon: 5,
            initial_state: [1.0, 1.0],
            input_matrix: [0.0, 0.25],
            input_bound: 10.0,
            relaxation_rho: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDesignDecision {
    /// `(u(T-1), ..., u(0))`
    pub u: Vec<f64>,
    pub h: f64,
    pub xi: Vec<f64>,
}

impl InputDesignDecision {
    pub fn from_decision(d: &Decision, horizon: usize) -> Result<Self> {
        if d.variables.len() != horizon + 1 {
            return Err(Error::domain(format!(
                "input-design decision has {} variables, expected {}",
                d.variables.len(),
                horizon + 1
            )));
        }
        Ok(InputDesignDecision {
            u: d.variables[..horizon].to_vec(),
            h: d.variables[horizon],
            xi: d.extra.clone(),
        })
    }
}

fn mat_vec(a: &Matrix2, x: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1],
        a[1][0] * x[0] + a[1][1] * x[1],
    ]
}

/// Columns `B, AB, ..., A^(T-1) B`.
pub fn reachability_matrix(a: &Matrix2, spec: &InputDesignSpec) -> Vec<[f64; 2]> {
    let mut cols = Vec::with_capacity(spec.horizon);
    let mut col = spec.input_matrix;
    for _ in 0..spec.horizon {
        cols.push(col);
        col = mat_vec(a, col);
    }
    cols
}

/// `A^T η0`.
pub fn free_response(a: &Matrix2, spec: &InputDesignSpec) -> [f64; 2] {
    (0..spec.horizon).fold(spec.initial_state, |x, _| mat_vec(a, x))
}

pub fn final_state(a: &Matrix2, u: &[f64], spec: &InputDesignSpec) -> [f64; 2] {
    let r = reachability_matrix(a, spec);
    let mut x = free_response(a, spec);
    for (col, &ut) in r.iter().zip(u) {
        x[0] += col[0] * ut;
        x[1] += col[1] * ut;
    }
    x
}

/// `‖A^T η0 + R u‖∞`.
pub fn final_state_cost(
    a: &Matrix2,
    decision: &InputDesignDecision,
    spec: &InputDesignSpec,
) -> f64 {
    let x = final_state(a, &decision.u, spec);
    x[0].abs().max(x[1].abs())
}

/// `‖η(T)‖∞ - h`: nonpositive exactly when the scenario's unrelaxed
/// constraint holds.
pub fn relative_cost(a: &Matrix2, decision: &InputDesignDecision, spec: &InputDesignSpec) -> f64 {
    final_state_cost(a, decision, spec) - decision.h
}

fn push_scenario_rows(
    lp: &mut LinearProgram,
    id: ScenarioId,
    a: &Matrix2,
    spec: &InputDesignSpec,
    xi_index: Option<usize>,
) {
    let n = lp.num_vars();
    let t = spec.horizon;
    let r = reachability_matrix(a, spec);
    let free = free_response(a, spec);
    for c in 0..2 {
        for sign in [1.0, -1.0] {
            let mut row = vec![0.0; n];
            for (k, col) in r.iter().enumerate() {
                row[k] = sign * col[c];
            }
            row[t] = -1.0;
            if let Some(x) = xi_index {
                row[x] = -1.0;
            }
            lp.push_row(row, Sense::Le, -sign * free[c], RowTag::Scenario(id));
        }
    }
}

/// Variables `(u, h, ξ_1..ξ_N)`, objective `h + ρ Σ ξ_i`.
pub fn build_input_design_lp(
    scenarios: &[(ScenarioId, &InputScenario)],
    spec: &InputDesignSpec,
) -> Result<LinearProgram> {
    spec.validate()?;
    let t = spec.horizon;
    let n = scenarios.len();
    let mut c = vec![0.0; t + 1 + n];
    c[t] = 1.0;
    c[t + 1..].iter_mut().for_each(|v| *v = spec.relaxation_rho);
    let mut lp = LinearProgram::new(c);
    for k in 0..t {
        lp.set_bounds(k, -spec.input_bound, spec.input_bound);
    }
    for j in t..t + 1 + n {
        lp.set_bounds(j, 0.0, f64::INFINITY);
    }
    for (i, &(id, s)) in scenarios.iter().enumerate() {
        push_scenario_rows(&mut lp, id, &s.a, spec, Some(t + 1 + i));
    }
    Ok(lp)
}

/// Variables `(u, h)`, objective `h`, every scenario enforced.
pub fn build_robust_input_lp(
    scenarios: &[(ScenarioId, &InputScenario)],
    spec: &InputDesignSpec,
) -> Result<LinearProgram> {
    spec.validate()?;
    let t = spec.horizon;
    let mut c = vec![0.0; t + 1];
    c[t] = 1.0;
    let mut lp = LinearProgram::new(c);
    for k in 0..t {
        lp.set_bounds(k, -spec.input_bound, spec.input_bound);
    }
    lp.set_bounds(t, 0.0, f64::INFINITY);
    for &(id, s) in scenarios {
        push_scenario_rows(&mut lp, id, &s.a, spec, None);
    }
    Ok(lp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Penalised relaxation with one `ξ_i` per scenario.
    Relaxed,
    /// Every scenario enforced, no `ξ`.
    Robust,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputDesign {
    pub spec: InputDesignSpec,
    pub formulation: Formulation,
    /// Post-design appropriateness is `relative cost <= level`.
    pub postdesign_level: f64,
    pub nondegenerate: bool,
}

impl InputDesign {
    pub fn new(spec: InputDesignSpec) -> Self {
        InputDesign {
            spec,
            formulation: Formulation::Relaxed,
            postdesign_level: 0.0,
            nondegenerate: false,
        }
    }

    pub fn robust(spec: InputDesignSpec) -> Self {
        InputDesign {
            formulation: Formulation::Robust,
            ..Self::new(spec)
        }
    }

    pub fn cost(&self, decision: &Decision, scenario: &InputScenario) -> Result<f64> {
        let d = InputDesignDecision::from_decision(decision, self.spec.horizon)?;
        Ok(relative_cost(&scenario.a, &d, &self.spec))
    }
}

impl DecisionProblem for InputDesign {
    type Scenario = InputScenario;

    fn solve(&self, scenarios: &[(ScenarioId, &InputScenario)]) -> Result<Decision> {
        let ordered = canonical_order(scenarios, |s| s.a.iter().flatten().copied().collect());
        let lp = match self.formulation {
            Formulation::Relaxed => build_input_design_lp(&ordered, &self.spec)?,
            Formulation::Robust => build_robust_input_lp(&ordered, &self.spec)?,
        };
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::numerical(format!(
                "input-design program reported {:?}",
                sol.status
            )));
        }
        let t = self.spec.horizon;
        let mut d = Decision::new(sol.variables[..=t].to_vec(), sol.objective_value);
        if self.formulation == Formulation::Relaxed {
            // slacks back in input order
            let position: std::collections::HashMap<ScenarioId, usize> = scenarios
                .iter()
                .enumerate()
                .map(|(i, (id, _))| (*id, i))
                .collect();
            let mut xi = vec![0.0; scenarios.len()];
            for ((id, _), v) in ordered.iter().zip(&sol.variables[t + 1..]) {
                xi[position[id]] = *v;
            }
            d.extra = xi;
        }
        d.active_scenarios = Some(sol.active_scenarios());
        Ok(d)
    }

    fn baseline_ok(&self, decision: &Decision, scenario: &InputScenario) -> Result<bool> {
        Ok(self.cost(decision, scenario)? <= COST_TOLERANCE)
    }

    fn postdesign_ok(&self, decision: &Decision, scenario: &InputScenario) -> Result<bool> {
        Ok(self.cost(decision, scenario)? <= self.postdesign_level + COST_TOLERANCE)
    }

    fn is_nested(&self) -> bool {
        self.postdesign_level <= 0.0
    }

    fn nondegenerate(&self) -> bool {
        self.nondegenerate
    }
}

/// Each entry of `A` is Gaussian around the nominal matrix with standard
/// deviation `0.05 (1 + 2v)`, `v ~ Bernoulli(0.03)` drawn per entry.
#[derive(Clone, Copy, Debug)]
pub struct InputMatrixSampler {
    pub nominal: Matrix2,
}

impl Default for InputMatrixSampler {
    fn default() -> Self {
        InputMatrixSampler { nominal: NOMINAL_A }
    }
}

impl ScenarioSampler for InputMatrixSampler {
    type Scenario = InputScenario;

    fn name(&self) -> &str {
        "gaussian-with-outliers"
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> Result<InputScenario> {
        let outlier =
            Bernoulli::new(OUTLIER_PROBABILITY).map_err(|e| Error::numerical(e.to_string()))?;
        let mut a = [[0.0; 2]; 2];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let wide = outlier.sample(rng);
                let std = BASE_STD * if wide { 3.0 } else { 1.0 };
                let normal = Normal::new(self.nominal[i][j], std)
                    .map_err(|e| Error::numerical(e.to_string()))?;
                *v = normal.sample(rng);
            }
        }
        Ok(InputScenario { a })
    }
}

pub fn sample_input_design_scenarios(n: usize, seed: u64) -> Result<Vec<InputScenario>> {
    Ok(InputMatrixSampler::default()
        .sample_set(n, seed)?
        .into_payloads())
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Matrix2 = [[1.0, 0.0], [0.0, 1.0]];
    const Z: Matrix2 = [[0.0, 0.0], [0.0, 0.0]];

    fn dec(u: Vec<f64>) -> InputDesignDecision {
        InputDesignDecision {
            u,
            h: 0.0,
            xi: vec![],
        }
    }

    #[test]
    fn reachability_columns() {
        let spec = InputDesignSpec::default();
        assert!(reachability_matrix(&I, &spec)
            .iter()
            .all(|c| *c == [0.0, 0.25]));
        let r = reachability_matrix(&Z, &spec);
        assert_eq!(r[0], [0.0, 0.25]);
        assert!(r[1..].iter().all(|c| *c == [0.0, 0.0]));
        let r = reachability_matrix(&NOMINAL_A, &spec);
        let mut col = [0.0, 0.25];
        for c in &r {
            assert_eq!(*c, col);
            col = mat_vec(&NOMINAL_A, col);
        }
    }

    #[test]
    fn costs() {
        let spec = InputDesignSpec::default();
        assert_eq!(final_state_cost(&Z, &dec(vec![0.0; 5]), &spec), 0.0);
        assert_eq!(final_state_cost(&I, &dec(vec![0.0; 5]), &spec), 1.0);
        // simulate the recursion forward from u(0)
        let u = vec![-0.27, -0.58, -1.34, 0.45, 5.85];
        let mut x = spec.initial_state;
        for t in 0..5 {
            let ut = u[4 - t];
            x = mat_vec(&NOMINAL_A, x);
            x[0] += spec.input_matrix[0] * ut;
            x[1] += spec.input_matrix[1] * ut;
        }
        let direct = x[0].abs().max(x[1].abs());
        let cost = final_state_cost(&NOMINAL_A, &dec(u), &spec);
        assert!((cost - direct).abs() < 1e-12);
        assert!(cost <= 0.15, "{cost}");
    }

    #[test]
    fn single_scenario_large_rho_is_robust() {
        let spec = InputDesignSpec::new(1e6).unwrap();
        let s = InputScenario { a: NOMINAL_A };
        let p = InputDesign::new(spec.clone());
        let d = p.solve(&[(1, &s)]).unwrap();
        assert!(d.extra.iter().all(|x| x.abs() < 1e-9));
        let r = InputDesign::robust(spec).solve(&[(1, &s)]).unwrap();
        for (a, b) in d.variables.iter().zip(&r.variables) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_spec() {
        assert!(InputDesignSpec::new(0.0).is_err());
        let spec = InputDesignSpec {
            horizon: 0,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let a = sample_input_design_scenarios(50, 9).unwrap();
        assert_eq!(a, sample_input_design_scenarios(50, 9).unwrap());
        assert_ne!(a, sample_input_design_scenarios(50, 10).unwrap());
    }
}
