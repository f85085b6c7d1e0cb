//! Certified envelopes for the distribution of a cost.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bounds::BoundContext;
use crate::error::{Error, Result};
use crate::rng;
use crate::scenario::{Decision, ScenarioSampler, ScenarioSet, SupportInfo};

/// Strictly increasing cost levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThresholdGrid {
    levels: Vec<f64>,
}

impl ThresholdGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::domain(
                "threshold grid must contain at least one level",
            ));
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(Error::domain("threshold grid levels must be finite"));
        }
        if let Some(w) = levels.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "threshold grid must be strictly increasing, found {} followed by {}",
                w[0], w[1]
            )));
        }
        Ok(ThresholdGrid { levels })
    }

    /// `count` equally spaced levels from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::domain("grid count must be at least 1")),
            1 => Self::new(vec![lo]),
            _ => {
                if !(lo < hi) {
                    return Err(Error::domain(format!(
                        "grid needs lo < hi, got {lo} and {hi}"
                    )));
                }
                let step = (hi - lo) / (count - 1) as f64;
                let mut levels: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
                levels[count - 1] = hi;
                Self::new(levels)
            }
        }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ThresholdGrid {
    type Error = Error;
    fn try_from(levels: Vec<f64>) -> Result<Self> {
        ThresholdGrid::new(levels)
    }
}

impl From<ThresholdGrid> for Vec<f64> {
    fn from(g: ThresholdGrid) -> Self {
        g.levels
    }
}

/// Costs of the training scenarios at one decision, sorted once.
#[derive(Clone, Debug)]
pub struct CostCache {
    sorted: Vec<f64>,
    support_sorted: Vec<f64>,
}

impl CostCache {
    pub fn new<S, F>(
        scenarios: &ScenarioSet<S>,
        decision: &Decision,
        support: &SupportInfo,
        mut cost: F,
    ) -> Result<Self>
    where
        F: FnMut(&Decision, &S) -> Result<f64>,
    {
        let in_support: BTreeSet<_> = support.indices.iter().copied().collect();
        let mut sorted = Vec::with_capacity(scenarios.len());
        let mut support_sorted = Vec::with_capacity(in_support.len());
        for (id, s) in scenarios.iter() {
            let c = cost(decision, s).map_err(|e| Error::Predicate {
                scenario: id,
                source: Box::new(e),
            })?;
            if c.is_nan() {
                return Err(Error::Predicate {
                    scenario: id,
                    source: Box::new(Error::numerical("cost evaluated to NaN")),
                });
            }
            sorted.push(c);
            if in_support.contains(&id) {
                support_sorted.push(c);
            }
        }
        sorted.sort_by(f64::total_cmp);
        support_sorted.sort_by(f64::total_cmp);
        Ok(CostCache {
            sorted,
            support_sorted,
        })
    }

    /// `|support ∪ {i : cost_i > level}|`.
    pub fn complexity_at(&self, level: f64) -> usize {
        let violators = self.sorted.len() - self.sorted.partition_point(|&c| c <= level);
        let support_ok = self.support_sorted.partition_point(|&c| c <= level);
        violators + support_ok
    }

    pub fn costs(&self) -> &[f64] {
        &self.sorted
    }
}

/// Post-design complexity bound for each grid level.
pub fn per_level_complexities<S, F>(
    scenarios: &ScenarioSet<S>,
    decision: &Decision,
    support: &SupportInfo,
    cost: F,
    grid: &ThresholdGrid,
) -> Result<Vec<usize>>
where
    F: FnMut(&Decision, &S) -> Result<f64>,
{
    let cache = CostCache::new(scenarios, decision, support, cost)?;
    Ok(grid
        .levels()
        .iter()
        .map(|&l| cache.complexity_at(l))
        .collect())
}

/// `nested[j] = (level_j <= baseline_level)`.
pub fn nested_flags_below(grid: &ThresholdGrid, baseline_level: f64) -> Vec<bool> {
    grid.levels().iter().map(|&l| l <= baseline_level).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMode {
    /// Both sides; requires asserted non-degeneracy.
    TwoSided,
    /// Lower side only, from ε.
    LowerOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfEnvelope {
    pub grid: ThresholdGrid,
    pub per_level_complexity: Vec<usize>,
    pub lower_values: Vec<f64>,
    pub upper_values: Option<Vec<f64>>,
    pub confidence: f64,
    pub nested_flags: Vec<bool>,
    /// Number of non-nested levels.
    pub r: usize,
    pub baseline_complexity: usize,
    pub mode: EnvelopeMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

pub fn build_envelope(
    per_level: &[usize],
    grid: &ThresholdGrid,
    sample_size: usize,
    confidence_beta: f64,
    s_b: usize,
    nested_flags: &[bool],
    mode: EnvelopeMode,
) -> Result<CdfEnvelope> {
    let ctx = BoundContext::new(sample_size, confidence_beta)?;
    build_envelope_with(&ctx, per_level, grid, s_b, nested_flags, mode)
}

pub fn build_envelope_with(
    ctx: &BoundContext,
    per_level: &[usize],
    grid: &ThresholdGrid,
    s_b: usize,
    nested_flags: &[bool],
    mode: EnvelopeMode,
) -> Result<CdfEnvelope> {
    let h = grid.len();
    if per_level.len() != h || nested_flags.len() != h {
        return Err(Error::domain(format!(
            "grid has {h} levels but {} complexities and {} nested flags were given",
            per_level.len(),
            nested_flags.len()
        )));
    }
    if per_level.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::domain(
            "per-level complexities must be nonincreasing",
        ));
    }
    let n = ctx.sample_size();
    if let Some(&s) = per_level.iter().find(|&&s| s > n) {
        return Err(Error::domain(format!(
            "complexity {s} exceeds sample size {n}"
        )));
    }
    let beta = ctx.confidence_beta();
    let r = nested_flags.iter().filter(|&&f| !f).count();

    let mut pairs: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    let mut uppers: BTreeMap<usize, f64> = BTreeMap::new();
    let wrap = |k: usize, e: Error| Error::AtComplexity {
        k,
        source: Box::new(e),
    };
    let (lower_values, upper_values, confidence) = match mode {
        EnvelopeMode::LowerOnly => {
            let mut lower = Vec::with_capacity(h);
            for &s in per_level {
                let e = match uppers.get(&s) {
                    Some(&e) => e,
                    None => {
                        let e = ctx.epsilon_upper(s).map_err(|e| wrap(s, e))?;
                        uppers.insert(s, e);
                        e
                    }
                };
                lower.push(1.0 - e);
            }
            (lower, None, 1.0 - h as f64 * beta)
        }
        EnvelopeMode::TwoSided => {
            let eps_b = if r > 0 {
                ctx.epsilon_upper(s_b).map_err(|e| wrap(s_b, e))?
            } else {
                0.0
            };
            let mut lower = Vec::with_capacity(h);
            let mut upper = Vec::with_capacity(h);
            for (&s, &nested) in per_level.iter().zip(nested_flags) {
                let (lo, hi) = match pairs.get(&s) {
                    Some(&p) => p,
                    None => {
                        let p = ctx.epsilon_pair(s).map_err(|e| wrap(s, e))?;
                        pairs.insert(s, p);
                        p
                    }
                };
                let tilde = if nested { lo } else { lo - eps_b };
                lower.push(1.0 - hi);
                upper.push((1.0 - tilde).min(1.0));
            }
            (lower, Some(upper), 1.0 - (h + r) as f64 * beta)
        }
    };
    Ok(CdfEnvelope {
        grid: grid.clone(),
        per_level_complexity: per_level.to_vec(),
        lower_values,
        upper_values,
        confidence,
        nested_flags: nested_flags.to_vec(),
        r,
        baseline_complexity: s_b,
        mode,
    })
}

/// Value of one side of the step envelope at `level`.
pub fn evaluate_envelope(envelope: &CdfEnvelope, side: Side, level: f64) -> Result<f64> {
    let levels = envelope.grid.levels();
    let h = levels.len();
    match side {
        Side::Lower => {
            // right-continuous steps: lower_values[j] on [l_j, l_{j+1})
            let count = levels.partition_point(|&l| l <= level);
            Ok(if count == 0 {
                0.0
            } else {
                envelope.lower_values[count - 1]
            })
        }
        Side::Upper => {
            let upper = envelope.upper_values.as_ref().ok_or_else(|| {
                Error::domain("upper envelope requested on a lower-only envelope")
            })?;
            if level > levels[h - 1] {
                return Ok(1.0);
            }
            // left-continuous steps: upper_values[j] on (l_{j-1}, l_j]
            let j = levels.partition_point(|&l| l < level);
            Ok(upper[j])
        }
    }
}

/// `level,lower,upper` rows; `upper` is empty on lower-only envelopes.
pub fn envelope_csv(envelope: &CdfEnvelope) -> String {
    let mut out = String::from("level,lower,upper\n");
    for (j, &l) in envelope.grid.levels().iter().enumerate() {
        let upper = envelope
            .upper_values
            .as_ref()
            .map(|u| format!("{}", crate::format::round_sig(u[j])))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{}\n",
            crate::format::round_sig(l),
            crate::format::round_sig(envelope.lower_values[j]),
            upper
        ));
    }
    out
}

/// Empirical distribution of `cost` at each grid level over `n_samples`
/// fresh draws from the validation stream.
pub fn monte_carlo_cdf<S, F>(
    mut cost: F,
    decision: &Decision,
    sampler: &S,
    n_samples: usize,
    seed: u64,
    grid: &ThresholdGrid,
) -> Result<Vec<f64>>
where
    S: ScenarioSampler,
    F: FnMut(&Decision, &S::Scenario) -> Result<f64>,
{
    if n_samples == 0 {
        return Err(Error::domain("Monte Carlo sample size must be positive"));
    }
    let mut r = rng::validation_rng(seed);
    let mut costs = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let s = sampler.sample(&mut r)?;
        let c = cost(decision, &s).map_err(|e| Error::Predicate {
            scenario: i + 1,
            source: Box::new(e),
        })?;
        costs.push(c);
    }
    costs.sort_by(f64::total_cmp);
    Ok(grid
        .levels()
        .iter()
        .map(|&l| costs.partition_point(|&c| c <= l) as f64 / n_samples as f64)
        .collect())
}
