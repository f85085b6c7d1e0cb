//! Log-space evaluation of the three certificate polynomials.
//!
//! Every polynomial here is a difference `P(t) - Q(t)` of two sums with
//! nonnegative terms. Terms are carried as logarithms and each side is
//! accumulated independently, so `C(4N, k) t^(4N-k)` never has to exist as a
//! double.

use crate::error::{Error, Result};

/// Terms further than this below the running maximum are dropped.
/// `exp(-60)` is below `1e-26`, far under double precision.
const NEGLIGIBLE_NATS: f64 = 60.0;

/// Which polynomial to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundEquation {
    /// `(β/N) Σ_{m=k}^{N-1} C(m,k) t^(m-k) - C(N,k) t^(N-k)`; root gives ε(k).
    OneSided,
    /// `C(N,k) t^(N-k) - (β/2N) Σ_{i=k}^{N-1} C(i,k) t^(i-k)
    ///  - (β/6N) Σ_{i=N+1}^{4N} C(i,k) t^(i-k)`; two roots give ε̄(k), ε_(k).
    TwoSided,
    /// `1 - (β/6N) Σ_{i=N+1}^{4N} C(i,N) t^(i-N)`, the `k = N` companion.
    TwoSidedFull,
}

impl BoundEquation {
    pub fn name(self) -> &'static str {
        match self {
            BoundEquation::OneSided => "one-sided equation",
            BoundEquation::TwoSided => "two-sided equation",
            BoundEquation::TwoSidedFull => "two-sided equation at k = N",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// A real number stored as `sign · exp(ln_abs)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    pub sign: Sign,
    pub ln_abs: f64,
}

impl SignedLog {
    /// Converts back to ordinary arithmetic (may under/overflow).
    pub fn value(&self) -> f64 {
        match self.sign {
            Sign::Zero => 0.0,
            Sign::Positive => self.ln_abs.exp(),
            Sign::Negative => -self.ln_abs.exp(),
        }
    }
}

/// The two sides of a certificate polynomial, in log-space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sides {
    /// Log of the positive part.
    pub ln_pos: f64,
    /// Log of the subtracted part.
    pub ln_neg: f64,
    /// Log of the single largest term appearing on either side.
    pub ln_max_term: f64,
}

impl Sides {
    /// `ln(P/Q)`; has the sign of the polynomial value.
    pub fn log_ratio(&self) -> f64 {
        match (self.ln_pos.is_finite(), self.ln_neg.is_finite()) {
            (true, true) => self.ln_pos - self.ln_neg,
            (false, true) => f64::NEG_INFINITY,
            (true, false) => f64::INFINITY,
            (false, false) => 0.0,
        }
    }

    pub fn signed(&self) -> SignedLog {
        let (hi, lo, sign) = if self.ln_pos >= self.ln_neg {
            (self.ln_pos, self.ln_neg, Sign::Positive)
        } else {
            (self.ln_neg, self.ln_pos, Sign::Negative)
        };
        if hi == f64::NEG_INFINITY {
            return SignedLog {
                sign: Sign::Zero,
                ln_abs: f64::NEG_INFINITY,
            };
        }
        let gap = hi - lo;
        if gap == 0.0 {
            return SignedLog {
                sign: Sign::Zero,
                ln_abs: f64::NEG_INFINITY,
            };
        }
        // ln(e^hi - e^lo) = hi + ln(1 - e^-gap)
        SignedLog {
            sign,
            ln_abs: hi + (-(-gap).exp_m1()).ln(),
        }
    }

    /// `|P - Q|` divided by the largest individual term.
    pub fn residual_relative_to_max_term(&self) -> f64 {
        let s = self.signed();
        match s.sign {
            Sign::Zero => 0.0,
            _ => (s.ln_abs - self.ln_max_term).exp(),
        }
    }
}

/// Streaming `ln Σ exp(x_i)`.
#[derive(Clone, Copy, Debug)]
struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl LogSumExp {
    fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    fn merge(&mut self, other: LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        self.push_scaled(other.max, other.scaled);
    }

    fn push_scaled(&mut self, max: f64, scaled: f64) {
        if max <= self.max {
            self.scaled += scaled * (max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - max).exp() + scaled;
            self.max = max;
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Table of `ln(i!)` for `i = 0..=len`, accumulated with compensated
/// summation.
#[derive(Clone, Debug)]
pub struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        for i in 1..=max {
            // Neumaier summation
            let x = (i as f64).ln();
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        LnFactorial { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_factorial(&self, i: usize) -> f64 {
        self.table[i]
    }

    /// `ln C(n, k)`; `-inf` when `k > n`.
    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// `ln Σ_{i=lo}^{hi} C(i,k) t^(i-k)` together with the log of its largest
/// term.
///
/// The summand is log-concave in `i`. Only the peak term is formed from the
/// log-factorial table; neighbours are reached through the ratio of
/// consecutive terms, and each direction stops once terms fall
/// `NEGLIGIBLE_NATS` below the peak.
fn ln_binomial_power_sum(lnf: &LnFactorial, k: usize, lo: usize, hi: usize, t: f64) -> (f64, f64) {
    if lo > hi {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    debug_assert!(lo >= k);
    // term(i+1)/term(i) = t (i+1)/(i+1-k) is at least one iff i+1 <= k/(1-t)
    let peak = if t >= 1.0 {
        hi
    } else {
        let p = (k as f64 / (1.0 - t)).floor();
        if p.is_finite() && p < hi as f64 {
            (p.max(0.0) as usize).clamp(lo, hi)
        } else {
            hi
        }
    };
    let power = peak - k;
    let ln_peak = lnf.ln_binomial(peak, k)
        + if power == 0 {
            0.0
        } else {
            power as f64 * t.ln()
        };
    if ln_peak == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let cutoff = (-NEGLIGIBLE_NATS).exp();
    let kf = k as f64;
    let mut sum = 1.0_f64;
    let mut largest = 1.0_f64;

    let mut x = 1.0_f64;
    let mut i = peak;
    while i > lo {
        let fi = i as f64;
        x *= (fi - kf) / (t * fi);
        sum += x;
        largest = largest.max(x);
        if x < cutoff * largest {
            break;
        }
        i -= 1;
    }
    let mut x = 1.0_f64;
    let mut i = peak;
    while i < hi {
        let next = (i + 1) as f64;
        x *= t * next / (next - kf);
        sum += x;
        largest = largest.max(x);
        if x < cutoff * largest {
            break;
        }
        i += 1;
    }
    (ln_peak + sum.ln(), ln_peak + largest.ln())
}

/// Evaluates the two sides of `equation` at `t ≥ 0`.
pub(crate) fn eval_sides(
    lnf: &LnFactorial,
    equation: BoundEquation,
    n: usize,
    beta: f64,
    k: usize,
    t: f64,
) -> Result<Sides> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "polynomial argument must be a finite nonnegative real, got {t}"
        )));
    }
    let nf = n as f64;
    let ln_t = t.ln();
    let leading = |power: usize| -> f64 {
        if power == 0 {
            0.0
        } else {
            power as f64 * ln_t
        }
    };
    let sides = match equation {
        BoundEquation::OneSided => {
            let (sum, max_sum) = ln_binomial_power_sum(lnf, k, k, n - 1, t);
            let scale = (beta / nf).ln();
            let ln_pos = scale + sum;
            let ln_neg = lnf.ln_binomial(n, k) + leading(n - k);
            Sides {
                ln_pos,
                ln_neg,
                ln_max_term: (scale + max_sum).max(ln_neg),
            }
        }
        BoundEquation::TwoSided => {
            let ln_pos = lnf.ln_binomial(n, k) + leading(n - k);
            let half = (beta / (2.0 * nf)).ln();
            let sixth = (beta / (6.0 * nf)).ln();
            let (s1, m1) = ln_binomial_power_sum(lnf, k, k, n - 1, t);
            let (s2, m2) = ln_binomial_power_sum(lnf, k, n + 1, 4 * n, t);
            let mut neg = LogSumExp::new();
            neg.push(half + s1);
            let mut tail = LogSumExp::new();
            tail.push(sixth + s2);
            neg.merge(tail);
            Sides {
                ln_pos,
                ln_neg: neg.value(),
                ln_max_term: ln_pos.max(half + m1).max(sixth + m2),
            }
        }
        BoundEquation::TwoSidedFull => {
            let sixth = (beta / (6.0 * nf)).ln();
            let (s2, m2) = ln_binomial_power_sum(lnf, n, n + 1, 4 * n, t);
            Sides {
                ln_pos: 0.0,
                ln_neg: sixth + s2,
                ln_max_term: (sixth + m2).max(0.0),
            }
        }
    };
    Ok(sides)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn ln_binomial_matches_direct_products() {
        let lnf = LnFactorial::new(200);
        for (n, k) in [(10, 3), (50, 25), (200, 7), (200, 0), (200, 200)] {
            let direct = binom(n, k).ln();
            assert!((lnf.ln_binomial(n as usize, k as usize) - direct).abs() < 1e-10);
        }
        assert_eq!(lnf.ln_binomial(3, 5), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sum_exp_is_order_independent() {
        let xs = [-3.0, 700.0, 12.5, -1e3, 699.0];
        let mut a = LogSumExp::new();
        xs.iter().for_each(|&x| a.push(x));
        let mut b = LogSumExp::new();
        xs.iter().rev().for_each(|&x| b.push(x));
        let expected = 700.0 + (1.0 + (-1.0f64).exp()).ln();
        assert!((a.value() - expected).abs() < 1e-12);
        assert!((b.value() - expected).abs() < 1e-12);
    }

    #[test]
    fn truncated_sum_agrees_with_full_sum() {
        let lnf = LnFactorial::new(800);
        for &t in &[0.05, 0.5, 0.93, 1.0, 1.7] {
            for &k in &[0usize, 3, 40] {
                let ln_t = f64::ln(t);
                let (fast, _) = ln_binomial_power_sum(&lnf, k, k, 800, t);
                let mut full = LogSumExp::new();
                for i in k..=800 {
                    full.push(lnf.ln_binomial(i, k) + (i - k) as f64 * ln_t);
                }
                let diff = (fast - full.value()).abs();
                assert!(diff < 1e-11, "t={t} k={k}: {fast} vs {}", full.value());
            }
        }
    }

    #[test]
    fn signs_at_zero() {
        let lnf = LnFactorial::new(40);
        let one = eval_sides(&lnf, BoundEquation::OneSided, 10, 0.1, 3, 0.0).unwrap();
        assert_eq!(one.signed().sign, Sign::Positive);
        assert!((one.signed().value() - 0.01).abs() < 1e-15);

        let two = eval_sides(&lnf, BoundEquation::TwoSided, 10, 0.1, 3, 0.0).unwrap();
        assert_eq!(two.signed().sign, Sign::Negative);
        assert!((two.signed().value() + 0.1 / 20.0).abs() < 1e-15);

        let full = eval_sides(&lnf, BoundEquation::TwoSidedFull, 10, 0.1, 10, 0.0).unwrap();
        assert_eq!(full.signed().sign, Sign::Positive);
        assert!((full.signed().value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_argument_is_rejected() {
        let lnf = LnFactorial::new(40);
        let err = eval_sides(&lnf, BoundEquation::OneSided, 10, 0.1, 3, -1e-3).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
