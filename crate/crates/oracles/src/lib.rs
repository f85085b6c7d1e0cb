//! Brute-force reference implementations: expanded-polynomial root scans,
//! LP vertex enumeration and exhaustive support enumeration.

#![allow(clippy::needless_range_loop)]

use scenario_cert::error::Result;
use scenario_cert::lp::{solve_lp, LinearProgram, LpStatus, RowTag, Sense};
use scenario_cert::scenario::{Decision, DecisionProblem, ScenarioId, ScenarioSet};

// ---------------------------------------------------------------------------
// Bound equations, expanded into ordinary power-series coefficients.

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of t^0, t^1, ... for the one-sided equation.
pub fn one_sided_coeffs(n: usize, beta: f64, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; n - k + 1];
    for m in k..n {
        c[m - k] += beta / n as f64 * binom(m, k);
    }
    c[n - k] -= binom(n, k);
    c
}

/// Coefficients for the two-sided equation with `k < n`.
pub fn two_sided_coeffs(n: usize, beta: f64, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; 4 * n - k + 1];
    c[n - k] += binom(n, k);
    for i in k..n {
        c[i - k] -= beta / (2 * n) as f64 * binom(i, k);
    }
    for i in n + 1..=4 * n {
        c[i - k] -= beta / (6 * n) as f64 * binom(i, k);
    }
    c
}

/// Coefficients for the `k = n` equation.
pub fn full_complexity_coeffs(n: usize, beta: f64) -> Vec<f64> {
    let mut c = vec![0.0; 3 * n + 1];
    c[0] = 1.0;
    for i in n + 1..=4 * n {
        c[i - n] -= beta / (6 * n) as f64 * binom(i, n);
    }
    c
}

pub fn eval_series(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
}

/// Roots on `[0, hi]` by a dense log-spaced scan followed by plain bisection.
pub fn scan_roots(c: &[f64], hi: f64) -> Vec<f64> {
    const POINTS: usize = 200_000;
    let lo_exp = -14.0f64;
    let hi_exp = hi.log10();
    let mut grid = vec![0.0];
    grid.extend(
        (0..=POINTS).map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / POINTS as f64)),
    );
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval_series(c, a), eval_series(c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(bisect(c, a, b));
        }
    }
    roots
}

fn bisect(c: &[f64], mut a: f64, mut b: f64) -> f64 {
    let fa = eval_series(c, a);
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval_series(c, m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// One-sided bound from the expanded polynomial.
pub fn oracle_epsilon_upper(n: usize, beta: f64, k: usize) -> f64 {
    if k == n {
        return 1.0;
    }
    let roots = scan_roots(&one_sided_coeffs(n, beta, k), 1.0);
    let inside: Vec<f64> = roots.into_iter().filter(|t| *t > 0.0 && *t < 1.0).collect();
    assert_eq!(inside.len(), 1, "expected a single root in (0,1)");
    1.0 - inside[0]
}

/// Two-sided pair `(lower, upper)`, or `None` when the polynomial lacks two
/// nonnegative roots.
pub fn oracle_epsilon_pair(n: usize, beta: f64, k: usize) -> Option<(f64, f64)> {
    if k == n {
        let roots = scan_roots(&full_complexity_coeffs(n, beta), 1e6);
        let t_hi = *roots.first()?;
        return Some(((1.0 - t_hi).max(0.0), 1.0));
    }
    let roots = scan_roots(&two_sided_coeffs(n, beta, k), 1e6);
    if roots.len() != 2 {
        return None;
    }
    Some(((1.0 - roots[1]).max(0.0), 1.0 - roots[0]))
}

// ---------------------------------------------------------------------------
// Linear programs by vertex enumeration.

/// `min c'x` over `rows` (each `a'x <= b` after sign normalisation) and the
/// finite box `bounds`, by solving every square subsystem.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut cons: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for r in &lp.rows {
        match r.sense {
            Sense::Le => cons.push((r.coeffs.clone(), r.rhs, false)),
            Sense::Ge => cons.push((r.coeffs.iter().map(|v| -v).collect(), -r.rhs, false)),
            Sense::Eq => cons.push((r.coeffs.clone(), r.rhs, true)),
        }
    }
    for (j, &(l, u)) in lp.bounds.iter().enumerate() {
        assert!(l.is_finite() && u.is_finite(), "oracle needs a finite box");
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cons.push((e.clone(), u, false));
        cons.push((e.iter().map(|v| -v).collect(), -l, false));
    }
    let mut best: Option<f64> = None;
    // equalities hold at every feasible point, so they need no special role
    for active in combinations(cons.len(), n) {
        let a: Vec<Vec<f64>> = active.iter().map(|&i| cons[i].0.clone()).collect();
        let b: Vec<f64> = active.iter().map(|&i| cons[i].1).collect();
        let Some(x) = solve_square(a, b) else {
            continue;
        };
        let feasible = cons.iter().all(|(row, rhs, is_eq)| {
            let v: f64 = row.iter().zip(&x).map(|(p, q)| p * q).sum();
            let tol = 1e-9 * (1.0 + rhs.abs());
            if *is_eq {
                (v - rhs).abs() <= tol
            } else {
                v <= rhs + tol
            }
        });
        if feasible {
            let obj: f64 = lp.objective.iter().zip(&x).map(|(p, q)| p * q).sum();
            best = Some(best.map_or(obj, |o| o.min(obj)));
        }
    }
    best
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` if (nearly) singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Small LP decision problems with exhaustive support enumeration.

/// `min c'x` over a box where each scenario contributes rows `a'x >= b`.
#[derive(Clone, Debug)]
pub struct RowProblem {
    pub objective: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

pub type RowScenario = Vec<(Vec<f64>, f64)>;

impl DecisionProblem for RowProblem {
    type Scenario = RowScenario;

    fn solve(&self, scenarios: &[(ScenarioId, &RowScenario)]) -> Result<Decision> {
        let mut lp = LinearProgram::new(self.objective.clone());
        for (j, &(l, u)) in self.bounds.iter().enumerate() {
            lp.set_bounds(j, l, u);
        }
        for (id, rows) in scenarios {
            for (a, b) in rows.iter() {
                lp.push_row(a.clone(), Sense::Ge, *b, RowTag::Scenario(*id));
            }
        }
        let sol = solve_lp(&lp)?;
        assert_eq!(sol.status, LpStatus::Optimal);
        let mut d = Decision::new(sol.variables.clone(), sol.objective_value);
        d.active_scenarios = Some(sol.active_scenarios());
        Ok(d)
    }

    fn baseline_ok(&self, d: &Decision, s: &RowScenario) -> Result<bool> {
        Ok(s.iter().all(|(a, b)| {
            let v: f64 = a.iter().zip(&d.variables).map(|(p, q)| p * q).sum();
            v >= b - 1e-9
        }))
    }

    fn postdesign_ok(&self, d: &Decision, s: &RowScenario) -> Result<bool> {
        self.baseline_ok(d, s)
    }

    fn is_nested(&self) -> bool {
        true
    }

    fn nondegenerate(&self) -> bool {
        true
    }
}

/// Every sublist (as sorted ids) whose solution equals the full-set solution
/// and from which no single element can be dropped.
pub fn irreducible_supports<P: DecisionProblem>(
    problem: &P,
    set: &ScenarioSet<P::Scenario>,
) -> Vec<Vec<ScenarioId>> {
    let ids = set.ids();
    let full = problem.solve(&set.all()).unwrap();
    let reproduces = |sub: &[ScenarioId]| {
        let d = problem.solve(&set.select(sub)).unwrap();
        problem.decisions_equal(&d, &full)
    };
    let mut out = Vec::new();
    for mask in 0u32..(1 << ids.len()) {
        let sub: Vec<ScenarioId> = (0..ids.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| ids[i])
            .collect();
        if !reproduces(&sub) {
            continue;
        }
        let irreducible = (0..sub.len()).all(|drop| {
            let smaller: Vec<ScenarioId> = sub
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, &v)| v)
                .collect();
            !reproduces(&smaller)
        });
        if irreducible {
            out.push(sub);
        }
    }
    out
}

/// Smallest sublists reproducing the full-set solution.
pub fn minimum_supports<P: DecisionProblem>(
    problem: &P,
    set: &ScenarioSet<P::Scenario>,
) -> Vec<Vec<ScenarioId>> {
    let all = irreducible_supports(problem, set);
    let min = all.iter().map(Vec::len).min().unwrap_or(0);
    all.into_iter().filter(|s| s.len() == min).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use scenario_cert::bounds::{epsilon_pair, epsilon_upper, BoundQuery};

    #[test]
    fn hand_expanded_two_sided_polynomial() {
        // N=1, beta=0.6, k=0: t - 0.3 - 0.1 (t^2 + t^3 + t^4)
        let c = two_sided_coeffs(1, 0.6, 0);
        let want = [-0.3, 1.0, -0.1, -0.1, -0.1];
        for (a, b) in c.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15, "{c:?}");
        }
        let roots = scan_roots(&c, 10.0);
        assert_eq!(roots.len(), 2);
        for t in &roots {
            assert!(eval_series(&c, *t).abs() < 1e-12);
        }
        let (lo, hi) = epsilon_pair(BoundQuery::new(1, 0.6, 0).unwrap()).unwrap();
        assert!((hi - (1.0 - roots[0])).abs() < 1e-8);
        assert!((lo - (1.0 - roots[1]).max(0.0)).abs() < 1e-8);
    }

    #[test]
    fn closed_form_quadratic() {
        // N=2, beta=0.5, k=0: 0.25 (1 + t) = t^2
        let t = (0.25 + 1.0625f64.sqrt()) / 2.0;
        assert!((oracle_epsilon_upper(2, 0.5, 0) - (1.0 - t)).abs() < 1e-12);
    }

    #[test]
    fn vertex_enumeration_textbook_case() {
        // min -x - 2y s.t. x + y <= 4, x <= 3, y <= 2, x, y >= 0
        let mut lp = LinearProgram::new(vec![-1.0, -2.0]);
        lp.set_bounds(0, 0.0, 3.0);
        lp.set_bounds(1, 0.0, 2.0);
        lp.push_row(vec![1.0, 1.0], Sense::Le, 4.0, RowTag::Structural);
        assert_eq!(vertex_enumeration(&lp), Some(-6.0));
        lp.push_row(vec![1.0, 1.0], Sense::Ge, 6.0, RowTag::Structural);
        assert_eq!(vertex_enumeration(&lp), None);
    }

    fn beta_strategy() -> impl Strategy<Value = f64> {
        (-8.0f64..-1.0).prop_map(|e| 10f64.powf(e))
    }

    fn box_lp(seed: u64, n: usize, m: usize) -> LinearProgram {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut lp = LinearProgram::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        for j in 0..n {
            lp.set_bounds(j, -2.0, 2.0);
        }
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for i in 0..m {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let act: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
            let (sense, rhs) = match i % 3 {
                0 => (Sense::Le, act + rng.random_range(0.0..0.5)),
                1 => (Sense::Ge, act - rng.random_range(0.0..0.5)),
                _ => (Sense::Eq, act),
            };
            lp.push_row(a, sense, rhs, RowTag::Structural);
        }
        lp
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn bound_roots_match_the_scan(n in 1usize..=6, beta in beta_strategy(), kf in 0.0f64..1.0) {
            let k = (((n + 1) as f64 * kf) as usize).min(n);
            let query = BoundQuery::new(n, beta, k).unwrap();
            let got = epsilon_upper(query).unwrap();
            prop_assert!((got - oracle_epsilon_upper(n, beta, k)).abs() <= 1e-8);
            let pair = epsilon_pair(query).unwrap();
            let want = oracle_epsilon_pair(n, beta, k).unwrap();
            prop_assert!((pair.0 - want.0).abs() <= 1e-8 && (pair.1 - want.1).abs() <= 1e-8);
        }

        #[test]
        fn simplex_matches_vertex_enumeration(seed in any::<u64>(), n in 1usize..5, m in 1usize..8) {
            let lp = box_lp(seed, n, m);
            let sol = solve_lp(&lp).unwrap();
            match vertex_enumeration(&lp) {
                Some(best) => {
                    prop_assert_eq!(sol.status, LpStatus::Optimal);
                    prop_assert!((sol.objective_value - best).abs() <= 1e-7);
                }
                None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            }
        }
    }
}
