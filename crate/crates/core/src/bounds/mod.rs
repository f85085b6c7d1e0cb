//! Risk-bound functions ε(k), ε̄(k) and ε_(k).
//!
//! Each bound is `1 - t` for a root `t` of a certificate polynomial. Roots are
//! located by bisection on the log-ratio of the two sides of the polynomial,
//! which has the same sign as the polynomial and never overflows.

mod poly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use poly::{BoundEquation, LnFactorial, Sides, Sign, SignedLog};

/// `(N, β, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub sample_size: usize,
    pub confidence_beta: f64,
    pub complexity: usize,
}

impl BoundQuery {
    pub fn new(sample_size: usize, confidence_beta: f64, complexity: usize) -> Result<Self> {
        let q = BoundQuery {
            sample_size,
            confidence_beta,
            complexity,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        validate_sample(self.sample_size, self.confidence_beta)?;
        if self.complexity > self.sample_size {
            return Err(Error::domain(format!(
                "complexity k = {} exceeds sample size N = {}",
                self.complexity, self.sample_size
            )));
        }
        Ok(())
    }
}

fn validate_sample(n: usize, beta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("sample size N must be positive"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "confidence parameter beta must lie in (0, 1), got {beta}"
        )));
    }
    Ok(())
}

/// Root-finding knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Absolute tolerance on the root `t`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Bound on `|value| / largest term` accepted at a returned root.
    pub residual_tolerance: f64,
    /// Initial right end of the search range for the two-sided equation.
    pub initial_t_max: f64,
    /// Doublings allowed when the right end is still inside the positive region.
    pub max_expansions: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: 200,
            residual_tolerance: 1e-9,
            initial_t_max: 4.0,
            max_expansions: 64,
        }
    }
}

/// Shared state for queries at one `(N, β)`.
#[derive(Clone, Debug)]
pub struct BoundContext {
    n: usize,
    beta: f64,
    lnf: LnFactorial,
    config: SolverConfig,
}

/// A root together with the sides of the polynomial evaluated there.
#[derive(Clone, Copy, Debug)]
struct Root {
    t: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    sides: Sides,
}

impl BoundContext {
    pub fn new(sample_size: usize, confidence_beta: f64) -> Result<Self> {
        Self::with_config(sample_size, confidence_beta, SolverConfig::default())
    }

    pub fn with_config(
        sample_size: usize,
        confidence_beta: f64,
        config: SolverConfig,
    ) -> Result<Self> {
        validate_sample(sample_size, confidence_beta)?;
        let max = sample_size
            .checked_mul(4)
            .ok_or_else(|| Error::domain(format!("sample size {sample_size} is too large")))?;
        Ok(BoundContext {
            n: sample_size,
            beta: confidence_beta,
            lnf: LnFactorial::new(max),
            config,
        })
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn confidence_beta(&self) -> f64 {
        self.beta
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k > self.n {
            return Err(Error::domain(format!(
                "complexity k = {k} exceeds sample size N = {}",
                self.n
            )));
        }
        Ok(())
    }

    fn sides(&self, eq: BoundEquation, k: usize, t: f64) -> Result<Sides> {
        poly::eval_sides(&self.lnf, eq, self.n, self.beta, k, t)
    }

    fn log_ratio(&self, eq: BoundEquation, k: usize, t: f64) -> Result<f64> {
        Ok(self.sides(eq, k, t)?.log_ratio())
    }

    /// Sign and log-magnitude of the selected polynomial at `t`.
    pub fn eval(&self, eq: BoundEquation, k: usize, t: f64) -> Result<SignedLog> {
        self.check_k(k)?;
        if k == self.n && eq != BoundEquation::TwoSidedFull {
            return Err(Error::domain(format!(
                "the {} is defined for k < N only",
                eq.name()
            )));
        }
        if k != self.n && eq == BoundEquation::TwoSidedFull {
            return Err(Error::domain("the k = N equation requires k = N"));
        }
        Ok(self.sides(eq, k, t)?.signed())
    }

    /// Bisection on `[lo, hi]`, where the log-ratio changes sign.
    fn bisect(&self, eq: BoundEquation, k: usize, mut lo: f64, mut hi: f64) -> Result<Root> {
        let s_lo = self.log_ratio(eq, k, lo)?;
        let s_hi = self.log_ratio(eq, k, hi)?;
        let sign = |v: f64| -> i8 {
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        };
        if sign(s_lo) == 0 {
            return self.finish(eq, k, lo);
        }
        if sign(s_hi) == 0 {
            return self.finish(eq, k, hi);
        }
        if sign(s_lo) == sign(s_hi) || s_lo.is_nan() || s_hi.is_nan() {
            return Err(Error::Bracket {
                equation: eq.name(),
                lo,
                hi,
                sign_lo: sign(s_lo),
                sign_hi: sign(s_hi),
            });
        }
        let lo_positive = s_lo > 0.0;
        let mut best = if s_lo.abs() <= s_hi.abs() {
            (lo, s_lo.abs())
        } else {
            (hi, s_hi.abs())
        };
        for _ in 0..self.config.max_iterations {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.log_ratio(eq, k, mid)?;
            if v.is_nan() {
                return Err(Error::numerical(format!(
                    "{} evaluated to NaN at t = {mid:e} (k = {k})",
                    eq.name()
                )));
            }
            if v.abs() < best.1 {
                best = (mid, v.abs());
            }
            if v == 0.0 {
                break;
            }
            if (v > 0.0) == lo_positive {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= self.config.tolerance && best.1 <= self.config.tolerance {
                break;
            }
        }
        self.finish(eq, k, best.0)
    }

    fn finish(&self, eq: BoundEquation, k: usize, t: f64) -> Result<Root> {
        let sides = self.sides(eq, k, t)?;
        let residual = sides.residual_relative_to_max_term();
        if !(residual <= self.config.residual_tolerance) {
            return Err(Error::numerical(format!(
                "{} residual {residual:e} at t = {t:e} (k = {k}) exceeds {:e}",
                eq.name(),
                self.config.residual_tolerance
            )));
        }
        Ok(Root { t, sides })
    }

    /// ε(k).
    pub fn epsilon_upper(&self, k: usize) -> Result<f64> {
        self.check_k(k)?;
        if k == self.n {
            return Ok(1.0);
        }
        let root = self.bisect(BoundEquation::OneSided, k, 0.0, 1.0)?;
        Ok((1.0 - root.t).clamp(0.0, 1.0))
    }

    /// A point where the two-sided polynomial is positive, and a right end
    /// where it is negative.
    fn two_sided_bracket(&self, k: usize) -> Result<(f64, f64)> {
        let eq = BoundEquation::TwoSided;
        let mut t_max = self.config.initial_t_max;
        let mut expansions = 0;
        while self.log_ratio(eq, k, t_max)? >= 0.0 {
            if expansions == self.config.max_expansions {
                return Err(Error::numerical(format!(
                    "two-sided equation still nonnegative at t = {t_max:e} (k = {k})"
                )));
            }
            t_max *= 2.0;
            expansions += 1;
        }
        // The log-ratio is concave in ln t: golden-section search for its
        // maximum, stopping as soon as a positive value turns up.
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let f = |u: f64| self.log_ratio(eq, k, u.exp());
        let mut a = f64::MIN_POSITIVE.ln();
        let mut b = t_max.ln();
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let mut fc = f(c)?;
        let mut fd = f(d)?;
        for _ in 0..self.config.max_iterations {
            if fc > 0.0 {
                return Ok((c.exp(), t_max));
            }
            if fd > 0.0 {
                return Ok((d.exp(), t_max));
            }
            if b - a <= 1e-12 * (1.0 + a.abs()) {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d)?;
            }
        }
        Err(Error::numerical(format!(
            "no point with positive two-sided polynomial on [0, {t_max:e}] at k = {k}; \
             beta = {} may be too large for two real roots",
            self.beta
        )))
    }

    /// `(ε_(k), ε̄(k))`.
    pub fn epsilon_pair(&self, k: usize) -> Result<(f64, f64)> {
        self.check_k(k)?;
        if k == self.n {
            let eq = BoundEquation::TwoSidedFull;
            let mut lo = 0.0;
            let mut hi = 1.0;
            let mut expansions = 0;
            while self.log_ratio(eq, k, hi)? > 0.0 {
                if expansions == self.config.max_expansions {
                    return Err(Error::numerical(format!(
                        "k = N equation still positive at t = {hi:e}"
                    )));
                }
                lo = hi;
                hi *= 2.0;
                expansions += 1;
            }
            let root = self.bisect(eq, k, lo, hi)?;
            return Ok(((1.0 - root.t).max(0.0), 1.0));
        }
        let (inner, t_max) = self.two_sided_bracket(k)?;
        let low = self.bisect(BoundEquation::TwoSided, k, 0.0, inner)?;
        let high = self.bisect(BoundEquation::TwoSided, k, inner, t_max)?;
        let upper = (1.0 - low.t).clamp(0.0, 1.0);
        let lower = (1.0 - high.t).clamp(0.0, 1.0);
        Ok((lower, upper))
    }

    /// Closed-form `(floor, ceiling)` bracketing `ε_(k)` from below and `ε̄(k)`
    /// from above.
    pub fn explicit_interval_bounds(&self, k: usize) -> Result<(f64, f64)> {
        self.check_k(k)?;
        Ok(explicit_bounds(self.n, self.beta, k))
    }

    pub fn build_table(&self) -> Result<EpsilonTable> {
        let n = self.n;
        let mut upper = Vec::with_capacity(n + 1);
        let mut pair_lower = Vec::with_capacity(n + 1);
        let mut pair_upper = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let wrap = |e: Error| Error::AtComplexity {
                k,
                source: Box::new(e),
            };
            upper.push(self.epsilon_upper(k).map_err(wrap)?);
            let (lo, hi) = self.epsilon_pair(k).map_err(wrap)?;
            pair_lower.push(lo);
            pair_upper.push(hi);
        }
        Ok(EpsilonTable {
            sample_size: n,
            confidence_beta: self.beta,
            upper,
            pair_lower,
            pair_upper,
        })
    }
}

fn explicit_bounds(n: usize, beta: f64, k: usize) -> (f64, f64) {
    let nf = n as f64;
    let kf = k as f64;
    let root = (kf + 1.0).sqrt();
    let ln_k = (kf + 1.0).ln().sqrt();
    let ln_beta = (1.0 / beta).ln();
    let ceiling =
        kf / nf + 2.0 * root / nf * (ln_k + 4.0) + 2.0 * root * ln_beta.sqrt() / nf + ln_beta / nf;
    let floor = kf / nf - 3.0 * root / nf * (ln_k + 2.0) - 3.0 * root * ln_beta.sqrt() / nf;
    (floor, ceiling)
}

/// ε(k) for one query.
pub fn epsilon_upper(query: BoundQuery) -> Result<f64> {
    query.validate()?;
    BoundContext::new(query.sample_size, query.confidence_beta)?.epsilon_upper(query.complexity)
}

/// `(ε_(k), ε̄(k))` for one query.
pub fn epsilon_pair(query: BoundQuery) -> Result<(f64, f64)> {
    query.validate()?;
    BoundContext::new(query.sample_size, query.confidence_beta)?.epsilon_pair(query.complexity)
}

pub fn explicit_interval_bounds(query: BoundQuery) -> Result<(f64, f64)> {
    query.validate()?;
    Ok(explicit_bounds(
        query.sample_size,
        query.confidence_beta,
        query.complexity,
    ))
}

pub fn eval_certificate_polynomial(
    equation: BoundEquation,
    query: BoundQuery,
    t: f64,
) -> Result<SignedLog> {
    query.validate()?;
    BoundContext::new(query.sample_size, query.confidence_beta)?.eval(equation, query.complexity, t)
}

pub fn build_table(sample_size: usize, confidence_beta: f64) -> Result<EpsilonTable> {
    BoundContext::new(sample_size, confidence_beta)?.build_table()
}

/// ε, ε_ and ε̄ for every `k = 0..=N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonTable {
    pub sample_size: usize,
    pub confidence_beta: f64,
    pub upper: Vec<f64>,
    pub pair_lower: Vec<f64>,
    pub pair_upper: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: usize, beta: f64, k: usize) -> BoundQuery {
        BoundQuery::new(n, beta, k).unwrap()
    }

    #[test]
    fn closed_form_quadratic() {
        // 0.25 (1 + t) = t^2
        let t = (0.25 + 1.0625f64.sqrt()) / 2.0;
        let eps = epsilon_upper(q(2, 0.5, 0)).unwrap();
        assert!((eps - (1.0 - t)).abs() < 1e-11, "{eps}");
    }

    #[test]
    fn full_complexity_is_one() {
        for &(n, beta) in &[(1, 0.3), (7, 1e-3), (2000, 1e-5)] {
            assert_eq!(epsilon_upper(q(n, beta, n)).unwrap(), 1.0);
            assert_eq!(epsilon_pair(q(n, beta, n)).unwrap().1, 1.0);
        }
    }

    #[test]
    fn reference_values_large_sample() {
        let ctx = BoundContext::new(2000, 1e-5).unwrap();
        let eps8 = ctx.epsilon_upper(8).unwrap();
        assert!((eps8 - 0.0159700).abs() < 2e-6, "{eps8}");
        let (lo, hi) = ctx.epsilon_pair(199).unwrap();
        assert!((lo - 0.0671466).abs() < 2e-6, "{lo}");
        assert!((hi - 0.139098).abs() < 2e-6, "{hi}");
        let (_, hi) = ctx.epsilon_pair(130).unwrap();
        assert!((hi - 0.0984688).abs() < 2e-6, "{hi}");
        let (_, hi) = ctx.epsilon_pair(14).unwrap();
        assert!((hi - 0.0216667).abs() < 2e-6, "{hi}");

        let ctx = BoundContext::new(2000, 1e-7).unwrap();
        assert!((ctx.epsilon_upper(4).unwrap() - 0.0148677).abs() < 2e-6);
        assert!((ctx.epsilon_upper(75).unwrap() - 0.0686512).abs() < 2e-6);
    }

    #[test]
    fn invalid_queries() {
        assert!(matches!(BoundQuery::new(10, 2.0, 1), Err(Error::Domain(_))));
        assert!(matches!(BoundQuery::new(10, 0.0, 1), Err(Error::Domain(_))));
        assert!(matches!(
            BoundQuery::new(10, 0.1, 11),
            Err(Error::Domain(_))
        ));
        assert!(matches!(BoundQuery::new(0, 0.1, 0), Err(Error::Domain(_))));
        let ctx = BoundContext::new(10, 0.1).unwrap();
        assert!(matches!(ctx.epsilon_upper(11), Err(Error::Domain(_))));
    }

    #[test]
    fn bracket_without_sign_change_reports_signs() {
        let ctx = BoundContext::new(20, 0.1).unwrap();
        let err = ctx
            .bisect(BoundEquation::OneSided, 3, 0.0, 1e-6)
            .unwrap_err();
        match err {
            Error::Bracket {
                sign_lo, sign_hi, ..
            } => assert_eq!((sign_lo, sign_hi), (1, 1)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn polynomial_signs_at_origin() {
        let s = eval_certificate_polynomial(BoundEquation::OneSided, q(20, 0.1, 3), 0.0).unwrap();
        assert_eq!(s.sign, Sign::Positive);
        let s = eval_certificate_polynomial(BoundEquation::TwoSided, q(20, 0.1, 3), 0.0).unwrap();
        assert_eq!(s.sign, Sign::Negative);
        let s =
            eval_certificate_polynomial(BoundEquation::TwoSidedFull, q(20, 0.1, 20), 0.0).unwrap();
        assert_eq!(s.sign, Sign::Positive);
        assert!(eval_certificate_polynomial(BoundEquation::OneSided, q(20, 0.1, 3), -1.0).is_err());
    }

    #[test]
    fn explicit_bounds_bracket_pair() {
        let ctx = BoundContext::new(2000, 1e-5).unwrap();
        let (lo, hi) = ctx.epsilon_pair(199).unwrap();
        let (floor, ceiling) = ctx.explicit_interval_bounds(199).unwrap();
        assert!(floor <= lo && hi <= ceiling);
        let (floor, ceiling) = ctx.explicit_interval_bounds(8).unwrap();
        assert!(ceiling - floor < 0.2);
        assert!(ctx.explicit_interval_bounds(0).unwrap().0 <= 0.0);
    }

    #[test]
    fn table_matches_single_queries() {
        let table = build_table(50, 0.01).unwrap();
        for k in 0..=50 {
            let e = epsilon_upper(q(50, 0.01, k)).unwrap();
            let (lo, hi) = epsilon_pair(q(50, 0.01, k)).unwrap();
            assert!((table.upper[k] - e).abs() <= 1e-12);
            assert!((table.pair_lower[k] - lo).abs() <= 1e-12);
            assert!((table.pair_upper[k] - hi).abs() <= 1e-12);
        }
        assert_eq!(table.upper[50], 1.0);
        assert_eq!(table.pair_upper[50], 1.0);
    }

    #[test]
    fn residuals_at_roots() {
        let ctx = BoundContext::new(300, 1e-4).unwrap();
        for k in [0, 1, 17, 150, 299] {
            let root = ctx.bisect(BoundEquation::OneSided, k, 0.0, 1.0).unwrap();
            assert!(root.sides.residual_relative_to_max_term() < 1e-9);
            let (inner, t_max) = ctx.two_sided_bracket(k).unwrap();
            for (a, b) in [(0.0, inner), (inner, t_max)] {
                let root = ctx.bisect(BoundEquation::TwoSided, k, a, b).unwrap();
                assert!(root.sides.residual_relative_to_max_term() < 1e-9);
            }
        }
    }
}
