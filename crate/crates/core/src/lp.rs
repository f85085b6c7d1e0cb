//! Dense two-phase simplex with Bland's rule.
//!
//! The program is brought to `min c'x' s.t. Gx' >= h` with `x'_j >= 0` for
//! bounded variables and `x'_j` free otherwise, and the simplex runs on its
//! dual. Case-study programs have few variables and many rows, so the dual
//! tableau has one row per variable. Primal values are read back from the
//! reduced costs of the identity columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::ScenarioId;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const ACTIVE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RowTag {
    Structural,
    Scenario(ScenarioId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
}

impl Row {
    pub fn new(coeffs: Vec<f64>, sense: Sense, rhs: f64, tag: RowTag) -> Self {
        Row {
            coeffs,
            sense,
            rhs,
            tag,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = self.activity(x) - self.rhs;
        match self.sense {
            Sense::Le => v.max(0.0),
            Sense::Ge => (-v).max(0.0),
            Sense::Eq => v.abs(),
        }
    }
}

/// `min c·x` over rows and per-variable bounds (which may be infinite).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// A program with all variables free.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            rows: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64, tag: RowTag) {
        self.rows.push(Row::new(coeffs, sense, rhs, tag));
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::domain(format!(
                "{} bounds given for {n} variables",
                self.bounds.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::domain(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if row.coeffs.iter().any(|v| !v.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::domain(format!("row {i} has non-finite data")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("objective has non-finite coefficients"));
        }
        for (j, &(l, u)) in self.bounds.iter().enumerate() {
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::domain(format!(
                    "variable {j} has invalid bounds ({l}, {u})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless optimal.
    pub variables: Vec<f64>,
    pub objective_value: f64,
    /// Indices of rows with zero slack, ascending.
    pub active_rows: Vec<usize>,
    /// Tags of the active rows, in row order (may repeat).
    pub active_row_tags: Vec<RowTag>,
    /// One multiplier per row: `c = Σ λ_i a_i + μ` with `λ_i >= 0` on `>=`
    /// rows and `λ_i <= 0` on `<=` rows.
    pub row_multipliers: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, iterations: usize) -> Self {
        LpSolution {
            status,
            variables: Vec::new(),
            objective_value: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            active_rows: Vec::new(),
            active_row_tags: Vec::new(),
            row_multipliers: Vec::new(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Distinct scenario ids among the active rows, ascending.
    pub fn active_scenarios(&self) -> Vec<ScenarioId> {
        let mut ids: Vec<ScenarioId> = self
            .active_row_tags
            .iter()
            .filter_map(|t| match t {
                RowTag::Scenario(id) => Some(*id),
                RowTag::Structural => None,
            })
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = l + x'`
    Shift(f64),
    /// `x = u - x'`
    Flip(f64),
    Free,
}

#[derive(Clone, Copy, Debug)]
enum Origin {
    /// Original row and the factor applied to turn it into a `>=` row.
    Row(usize, f64),
    /// Upper-bound row `-x'_j >= -(u - l)`.
    Bound,
}

/// `min c'x' + offset s.t. G x' >= h`.
struct Standard {
    maps: Vec<VarMap>,
    cost: Vec<f64>,
    g: Vec<Vec<f64>>,
    h: Vec<f64>,
    origin: Vec<Origin>,
}

impl Standard {
    fn from_program(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut maps = Vec::with_capacity(n);
        let mut cost = Vec::with_capacity(n);
        let mut g = Vec::new();
        let mut h = Vec::new();
        let mut origin = Vec::new();
        for (j, &(l, u)) in lp.bounds.iter().enumerate() {
            if l.is_finite() {
                maps.push(VarMap::Shift(l));
                cost.push(lp.objective[j]);
                if u.is_finite() {
                    let mut row = vec![0.0; n];
                    row[j] = -1.0;
                    g.push(row);
                    h.push(-(u - l));
                    origin.push(Origin::Bound);
                }
            } else if u.is_finite() {
                maps.push(VarMap::Flip(u));
                cost.push(-lp.objective[j]);
            } else {
                maps.push(VarMap::Free);
                cost.push(lp.objective[j]);
            }
        }
        for (i, row) in lp.rows.iter().enumerate() {
            let mut a = Vec::with_capacity(n);
            let mut b = row.rhs;
            for (j, &v) in row.coeffs.iter().enumerate() {
                match maps[j] {
                    VarMap::Shift(l) => {
                        a.push(v);
                        b -= v * l;
                    }
                    VarMap::Flip(u) => {
                        a.push(-v);
                        b -= v * u;
                    }
                    VarMap::Free => a.push(v),
                }
            }
            let factors: &[f64] = match row.sense {
                Sense::Ge => &[1.0],
                Sense::Le => &[-1.0],
                Sense::Eq => &[1.0, -1.0],
            };
            for &f in factors {
                g.push(a.iter().map(|v| f * v).collect());
                h.push(f * b);
                origin.push(Origin::Row(i, f));
            }
        }
        Standard {
            maps,
            cost,
            g,
            h,
            origin,
        }
    }

    fn bounded(&self, j: usize) -> bool {
        !matches!(self.maps[j], VarMap::Free)
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Dense tableau of the dual program
/// `min -h'y s.t. σ_j (G'y + s)_j = σ_j c'_j`, `y, s >= 0`.
struct Tableau {
    rows: usize,
    width: usize,
    /// `rows` constraint rows followed by the phase-2 and phase-1 cost rows.
    data: Vec<f64>,
    basis: Vec<usize>,
    num_y: usize,
    /// Column whose entry is `e_j` in row `j`.
    identity: Vec<usize>,
    sigma: Vec<f64>,
    first_artificial: usize,
    iterations: usize,
}

impl Tableau {
    fn build(std: &Standard, cost: &[f64]) -> Self {
        let rows = cost.len();
        let num_y = std.g.len();
        let bounded: Vec<usize> = (0..rows).filter(|&j| std.bounded(j)).collect();
        let mut slack_col = vec![usize::MAX; rows];
        for (s, &j) in bounded.iter().enumerate() {
            slack_col[j] = num_y + s;
        }
        let sigma: Vec<f64> = cost
            .iter()
            .map(|&c| if c >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let first_artificial = num_y + bounded.len();
        let mut identity = vec![0; rows];
        let mut next = first_artificial;
        for j in 0..rows {
            if slack_col[j] != usize::MAX && sigma[j] > 0.0 {
                identity[j] = slack_col[j];
            } else {
                identity[j] = next;
                next += 1;
            }
        }
        let cols = next;
        let width = cols + 1;
        let mut data = vec![0.0; (rows + 2) * width];
        for j in 0..rows {
            let r = &mut data[j * width..(j + 1) * width];
            for (q, grow) in std.g.iter().enumerate() {
                r[q] = sigma[j] * grow[j];
            }
            if slack_col[j] != usize::MAX {
                r[slack_col[j]] = sigma[j];
            }
            r[identity[j]] = 1.0;
            r[cols] = sigma[j] * cost[j];
        }
        // phase-2 cost row: -h on y columns
        {
            let p2 = rows * width;
            for q in 0..num_y {
                data[p2 + q] = -std.h[q];
            }
        }
        // phase-1 cost row: ones on artificials, reduced against the basis
        {
            let p1 = (rows + 1) * width;
            for j in 0..rows {
                if identity[j] >= first_artificial {
                    for q in 0..width {
                        data[p1 + q] -= data[j * width + q];
                    }
                }
            }
            for q in first_artificial..cols {
                data[p1 + q] += 1.0;
            }
        }
        Tableau {
            rows,
            width,
            data,
            basis: identity.clone(),
            num_y,
            identity,
            sigma,
            first_artificial,
            iterations: 0,
        }
    }

    fn cols(&self) -> usize {
        self.width - 1
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.at(r, q);
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for other in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = other[q];
            if f == 0.0 {
                continue;
            }
            for (o, &pv) in other.iter_mut().zip(prow.iter()) {
                *o -= f * pv;
            }
            other[q] = 0.0;
        }
        self.basis[r] = q;
        self.iterations += 1;
    }

    /// Bland's rule on the cost row `obj`, with columns `< limit` eligible.
    fn run(&mut self, obj: usize, limit: usize, max_iter: usize) -> Result<Outcome> {
        let mut count = 0;
        loop {
            let entering = (0..limit).find(|&q| self.at(obj, q) < -COST_TOL);
            let Some(q) = entering else {
                return Ok(Outcome::Optimal);
            };
            let rhs = self.cols();
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, q);
                if a > PIVOT_TOL {
                    let ratio = self.at(i, rhs).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if ratio < best && !tie || tie && self.basis[i] < self.basis[k] {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            self.pivot(r, q);
            count += 1;
            if count > max_iter {
                return Err(Error::numerical(format!(
                    "simplex did not terminate within {max_iter} pivots"
                )));
            }
        }
    }

    /// Pivots basic artificials at zero level out of the basis where possible.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.rows {
            if self.basis[i] < self.first_artificial {
                continue;
            }
            let q = (0..self.first_artificial).find(|&q| self.at(i, q).abs() > PIVOT_TOL);
            if let Some(q) = q {
                self.pivot(i, q);
            }
        }
    }
}

enum DualResult {
    Optimal { x: Vec<f64>, y: Vec<f64> },
    DualUnbounded,
    DualInfeasible,
}

fn solve_dual(std: &Standard, cost: &[f64], iterations: &mut usize) -> Result<DualResult> {
    let n = cost.len();
    let mut tab = Tableau::build(std, cost);
    let max_iter = 50 * (tab.cols() + tab.rows) + 1000;
    let p2 = tab.rows;
    let p1 = tab.rows + 1;
    if tab.first_artificial < tab.cols() {
        tab.run(p1, tab.first_artificial, max_iter)?;
        let infeas = -tab.at(p1, tab.cols());
        let scale = 1.0 + cost.iter().map(|c| c.abs()).sum::<f64>();
        if infeas > 1e-9 * scale {
            *iterations += tab.iterations;
            return Ok(DualResult::DualInfeasible);
        }
        tab.drive_out_artificials();
    }
    let outcome = tab.run(p2, tab.first_artificial, max_iter)?;
    *iterations += tab.iterations;
    if let Outcome::Unbounded = outcome {
        return Ok(DualResult::DualUnbounded);
    }
    let x: Vec<f64> = (0..n)
        .map(|j| {
            let d = tab.at(p2, tab.identity[j]);
            let v = tab.sigma[j] * d;
            if std.bounded(j) {
                v.max(0.0)
            } else {
                v
            }
        })
        .collect();
    let mut y = vec![0.0; tab.num_y];
    for i in 0..tab.rows {
        let b = tab.basis[i];
        if b < tab.num_y {
            y[b] = tab.at(i, tab.cols()).max(0.0);
        }
    }
    Ok(DualResult::Optimal { x, y })
}

/// Solves `program`. Infeasible and unbounded programs are reported through
/// the status, not as errors.
pub fn solve_lp(program: &LinearProgram) -> Result<LpSolution> {
    program.validate()?;
    let n = program.num_vars();
    if program.bounds.iter().any(|&(l, u)| l > u) {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
    }
    let mut iterations = 0;
    let std = Standard::from_program(program);
    let (xp, y) = if n == 0 {
        (Vec::new(), Vec::new())
    } else {
        match solve_dual(&std, &std.cost, &mut iterations)? {
            DualResult::Optimal { x, y } => (x, y),
            DualResult::DualUnbounded => {
                return Ok(LpSolution::without_point(LpStatus::Infeasible, iterations))
            }
            DualResult::DualInfeasible => {
                let zero = vec![0.0; n];
                let status = match solve_dual(&std, &zero, &mut iterations)? {
                    DualResult::DualUnbounded => LpStatus::Infeasible,
                    _ => LpStatus::Unbounded,
                };
                return Ok(LpSolution::without_point(status, iterations));
            }
        }
    };
    if n == 0 && std.h.iter().any(|&b| b > ACTIVE_TOL) {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
    }
    let x: Vec<f64> = std
        .maps
        .iter()
        .zip(&xp)
        .map(|(m, &v)| match *m {
            VarMap::Shift(l) => l + v,
            VarMap::Flip(u) => u - v,
            VarMap::Free => v,
        })
        .zip(&program.bounds)
        .map(|(v, &(l, u))| v.clamp(l, u))
        .collect();

    let mut multipliers = vec![0.0; program.rows.len()];
    for (r, o) in std.origin.iter().enumerate() {
        if let Origin::Row(i, f) = *o {
            multipliers[i] += f * y.get(r).copied().unwrap_or(0.0);
        }
    }
    let mut active_rows = Vec::new();
    let mut active_row_tags = Vec::new();
    for (i, row) in program.rows.iter().enumerate() {
        if (row.activity(&x) - row.rhs).abs() <= ACTIVE_TOL * (1.0 + row.rhs.abs()) {
            active_rows.push(i);
            active_row_tags.push(row.tag);
        }
    }
    let objective_value = program.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        variables: x,
        objective_value,
        active_rows,
        active_row_tags,
        row_multipliers: multipliers,
        iterations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Largest row or bound violation.
    pub max_residual: f64,
    /// `|c·x - dual objective|`.
    pub duality_gap: f64,
    /// Largest sign violation among the row multipliers.
    pub max_dual_infeasibility: f64,
}

/// Recomputes residuals and the duality gap of an optimal solution from the
/// original data.
pub fn verify_solution(
    program: &LinearProgram,
    solution: &LpSolution,
) -> Result<VerificationReport> {
    if solution.status != LpStatus::Optimal {
        return Err(Error::domain(format!(
            "cannot verify a solution with status {:?}",
            solution.status
        )));
    }
    program.validate()?;
    let x = &solution.variables;
    let n = program.num_vars();
    if x.len() != n || solution.row_multipliers.len() != program.rows.len() {
        return Err(Error::domain("solution does not match program dimensions"));
    }
    let mut max_residual = 0.0_f64;
    for row in &program.rows {
        max_residual = max_residual.max(row.violation(x));
    }
    for (v, &(l, u)) in x.iter().zip(&program.bounds) {
        max_residual = max_residual.max(l - v).max(v - u);
    }

    let mut dual_infeas = 0.0_f64;
    let mut mu = program.objective.clone();
    let mut dual_obj = 0.0;
    for (row, &lam) in program.rows.iter().zip(&solution.row_multipliers) {
        match row.sense {
            Sense::Ge => dual_infeas = dual_infeas.max(-lam),
            Sense::Le => dual_infeas = dual_infeas.max(lam),
            Sense::Eq => {}
        }
        dual_obj += lam * row.rhs;
        for (m, a) in mu.iter_mut().zip(&row.coeffs) {
            *m -= lam * a;
        }
    }
    let mut gap_infinite = false;
    for (&m, &(l, u)) in mu.iter().zip(&program.bounds) {
        if m > 0.0 {
            if l.is_finite() {
                dual_obj += m * l;
            } else if m > COST_TOL {
                gap_infinite = true;
            }
        } else if m < 0.0 {
            if u.is_finite() {
                dual_obj += m * u;
            } else if m < -COST_TOL {
                gap_infinite = true;
            }
        }
    }
    let primal: f64 = program.objective.iter().zip(x).map(|(c, v)| c * v).sum();
    let duality_gap = if gap_infinite {
        f64::INFINITY
    } else {
        (primal - dual_obj).abs()
    };
    Ok(VerificationReport {
        max_residual,
        duality_gap,
        max_dual_infeasibility: dual_infeas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: RowTag = RowTag::Structural;

    #[test]
    fn single_lower_row() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push_row(vec![1.0], Sense::Ge, 3.0, RowTag::Scenario(1));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.variables[0] - 3.0).abs() < 1e-12);
        assert_eq!(sol.active_row_tags, vec![RowTag::Scenario(1)]);
    }

    #[test]
    fn first_vertex_on_symmetric_face() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push_row(vec![1.0, 1.0], Sense::Ge, 1.0, S);
        lp.set_bounds(0, 0.0, f64::INFINITY);
        lp.set_bounds(1, 0.0, f64::INFINITY);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective_value - 1.0).abs() < 1e-12);
        assert!((sol.variables[0] - 1.0).abs() < 1e-12 && sol.variables[1].abs() < 1e-12);
    }

    #[test]
    fn small_maximisation() {
        let mut lp = LinearProgram::new(vec![-1.0, -2.0]);
        lp.push_row(vec![1.0, 1.0], Sense::Le, 4.0, S);
        lp.push_row(vec![1.0, 0.0], Sense::Le, 3.0, S);
        lp.push_row(vec![0.0, 1.0], Sense::Le, 2.0, S);
        lp.set_bounds(0, 0.0, f64::INFINITY);
        lp.set_bounds(1, 0.0, f64::INFINITY);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.objective_value + 6.0).abs() < 1e-12);
        assert!((sol.variables[0] - 2.0).abs() < 1e-12);
        assert!((sol.variables[1] - 2.0).abs() < 1e-12);
        let rep = verify_solution(&lp, &sol).unwrap();
        assert!(rep.max_residual <= 1e-12 && rep.duality_gap <= 1e-12);
    }

    #[test]
    fn statuses() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.push_row(vec![1.0], Sense::Ge, 3.0, S);
        lp.push_row(vec![1.0], Sense::Le, 2.0, S);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.push_row(vec![1.0], Sense::Ge, 3.0, S);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);

        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.set_bounds(0, 2.0, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_and_box_bounds() {
        // min x - y, x + y = 2, x in [0.5, 3], y <= 1.25
        let mut lp = LinearProgram::new(vec![1.0, -1.0]);
        lp.push_row(vec![1.0, 1.0], Sense::Eq, 2.0, S);
        lp.set_bounds(0, 0.5, 3.0);
        lp.set_bounds(1, f64::NEG_INFINITY, 1.25);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.variables[0] - 0.75).abs() < 1e-12);
        assert!((sol.variables[1] - 1.25).abs() < 1e-12);
        let rep = verify_solution(&lp, &sol).unwrap();
        assert!(rep.duality_gap < 1e-12, "{rep:?}");
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.push_row(vec![1.0], Sense::Ge, 0.0, S);
        assert!(matches!(solve_lp(&lp), Err(Error::Domain(_))));
    }

    #[test]
    fn perturbed_solution_fails_verification() {
        let mut lp = LinearProgram::new(vec![-1.0, -2.0]);
        lp.push_row(vec![1.0, 1.0], Sense::Le, 4.0, S);
        lp.set_bounds(0, 0.0, 3.0);
        lp.set_bounds(1, 0.0, 2.0);
        let mut sol = solve_lp(&lp).unwrap();
        sol.variables.iter_mut().for_each(|v| *v += 1e-3);
        assert!(verify_solution(&lp, &sol).unwrap().max_residual > 1e-4);
        let bad = LpSolution::without_point(LpStatus::Infeasible, 0);
        assert!(verify_solution(&lp, &bad).is_err());
    }
}
