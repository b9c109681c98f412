//! Index and weight schedules: which operators act at step `n`, and with
//! what weights, plus validation of the quasi-cyclic hypotheses (weights sum
//! to one, positive weights bounded below, every index active in every
//! window of `p` consecutive steps).

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::sampling;
use crate::{Error, Result};

/// Tolerance on `|sum_i w_i - 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Step `n` to weight vector `(w_{0,n}, ..., w_{m-1,n})`.
#[derive(Clone)]
pub struct WeightRule(Arc<dyn Fn(usize) -> Vec<f64> + Send + Sync>);

impl fmt::Debug for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("WeightRule(..)")
    }
}

impl WeightRule {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(usize) -> Vec<f64> + Send + Sync + 'static,
    {
        WeightRule(Arc::new(f))
    }

    /// Rows repeat periodically: step `n` uses `rows[n % rows.len()]`.
    pub fn table(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyList("weight table"));
        }
        Ok(WeightRule::from_fn(move |n| rows[n % rows.len()].clone()))
    }

    /// Unit weight on `indices[n]`; steps past the end reuse the last index.
    pub fn point_masses(indices: Vec<usize>, m: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyList("indices"));
        }
        Ok(WeightRule::from_fn(move |n| {
            let mut w = vec![0.0; m];
            let i = indices[n.min(indices.len() - 1)];
            if i < m {
                w[i] = 1.0;
            }
            w
        }))
    }

    pub fn weights(&self, n: usize) -> Vec<f64> {
        (self.0)(n)
    }
}

#[derive(Debug, Clone)]
pub enum Schedule {
    /// Index `n mod m` at step `n`; drivers may instead run one composed pass per step.
    Cyclic { m: usize },
    QuasiCyclic {
        m: usize,
        weights: WeightRule,
        window: usize,
        weight_floor: f64,
    },
    /// Every block of `window` consecutive draws contains all `m` indices.
    RandomMap { m: usize, seed: u64, window: usize },
    Bernoulli { probs: Vec<f64>, seed: u64 },
}

impl Schedule {
    pub fn cyclic(m: usize) -> Self {
        Schedule::Cyclic { m }
    }

    /// Point masses cycling through `0..m`, expressed as quasi-cyclic weights.
    pub fn cyclic_point_masses(m: usize) -> Self {
        Schedule::QuasiCyclic {
            m,
            weights: WeightRule::from_fn(move |n| {
                let mut w = vec![0.0; m];
                w[n % m] = 1.0;
                w
            }),
            window: m,
            weight_floor: 1.0,
        }
    }

    /// Uniform weights `1/m` at every step.
    pub fn parallel(m: usize) -> Self {
        Schedule::QuasiCyclic {
            m,
            weights: WeightRule::from_fn(move |_| vec![1.0 / m as f64; m]),
            window: 1,
            weight_floor: 1.0 / m as f64,
        }
    }

    /// Half weight on each of `n mod m` and `(n + 1) mod m`.
    pub fn round_robin_pairs(m: usize) -> Self {
        if m <= 1 {
            return Self::cyclic_point_masses(m);
        }
        Schedule::QuasiCyclic {
            m,
            weights: WeightRule::from_fn(move |n| {
                let mut w = vec![0.0; m];
                w[n % m] += 0.5;
                w[(n + 1) % m] += 0.5;
                w
            }),
            window: (m - 1).max(1),
            weight_floor: 0.5,
        }
    }

    pub fn random_map(m: usize, seed: u64, window: usize) -> Self {
        Schedule::RandomMap { m, seed, window }
    }

    pub fn bernoulli(probs: Vec<f64>, seed: u64) -> Self {
        Schedule::Bernoulli { probs, seed }
    }

    /// Number of operators the schedule indexes.
    pub fn m(&self) -> usize {
        match self {
            Schedule::Cyclic { m }
            | Schedule::QuasiCyclic { m, .. }
            | Schedule::RandomMap { m, .. } => *m,
            Schedule::Bernoulli { probs, .. } => probs.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Cyclic { .. } => "cyclic",
            Schedule::QuasiCyclic { .. } => "quasi_cyclic",
            Schedule::RandomMap { .. } => "random_map",
            Schedule::Bernoulli { .. } => "bernoulli",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Schedule::RandomMap { seed, .. } | Schedule::Bernoulli { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    /// A copy whose random state starts from a seed derived from `stream`.
    pub fn with_derived_seed(&self, stream: u64) -> Self {
        match self {
            Schedule::RandomMap { m, seed, window } => Schedule::RandomMap {
                m: *m,
                seed: sampling::derive_seed(*seed, stream),
                window: *window,
            },
            Schedule::Bernoulli { probs, seed } => Schedule::Bernoulli {
                probs: probs.clone(),
                seed: sampling::derive_seed(*seed, stream),
            },
            other => other.clone(),
        }
    }

    /// Index sequence for the randomized schedules, `None` otherwise.
    pub fn draw_indices(&self, horizon: usize) -> Option<Result<Vec<usize>>> {
        match self {
            Schedule::RandomMap { m, seed, window } => {
                Some(draw_random_map(*m, *seed, *window, horizon))
            }
            Schedule::Bernoulli { probs, seed } => Some(draw_bernoulli(probs, *seed, horizon)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Schedule parameters are well formed (m >= 1, window >= 1, floor > 0, ...).
    Parameters,
    Nonnegative,
    WeightsSum,
    WeightFloor,
    WindowCoverage,
    ProbabilityVector,
}

impl Hypothesis {
    pub fn name(self) -> &'static str {
        match self {
            Hypothesis::Parameters => "parameters",
            Hypothesis::Nonnegative => "weights nonnegative",
            Hypothesis::WeightsSum => "weights sum",
            Hypothesis::WeightFloor => "weight floor",
            Hypothesis::WindowCoverage => "window coverage",
            Hypothesis::ProbabilityVector => "probability vector",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    /// First failing step (for coverage: the first window start).
    pub first_violation: Option<usize>,
    pub detail: String,
}

impl HypothesisCheck {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none() && self.detail.is_empty()
    }

    fn pass(hypothesis: Hypothesis) -> Self {
        HypothesisCheck {
            hypothesis,
            first_violation: None,
            detail: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub horizon: usize,
    pub window: usize,
    pub weight_floor: f64,
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(HypothesisCheck::passed)
    }

    pub fn check(&self, h: Hypothesis) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == h)
    }

    pub fn first_failure(&self) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| !c.passed())
    }

    pub fn into_result(self) -> Result<Self> {
        match self.first_failure() {
            None => Ok(self),
            Some(c) => Err(Error::ScheduleRejected(format!(
                "{} failed{}{}",
                c.hypothesis.name(),
                c.first_violation
                    .map(|n| format!(" at step {n}"))
                    .unwrap_or_default(),
                if c.detail.is_empty() {
                    String::new()
                } else {
                    format!(": {}", c.detail)
                }
            ))),
        }
    }
}

fn parameter_failure(detail: impl Into<String>, horizon: usize) -> ValidationReport {
    ValidationReport {
        horizon,
        window: 0,
        weight_floor: 0.0,
        checks: vec![HypothesisCheck {
            hypothesis: Hypothesis::Parameters,
            first_violation: None,
            detail: detail.into(),
        }],
    }
}

/// Checks the quasi-cyclic hypotheses over steps `0..horizon`.
///
/// Window coverage is checked for every window that fits in the horizon; a
/// horizon shorter than the window passes coverage vacuously.
pub fn validate(schedule: &Schedule, horizon: usize) -> ValidationReport {
    match schedule {
        Schedule::Cyclic { m } => {
            if *m == 0 {
                return parameter_failure("m must be >= 1", horizon);
            }
            // point masses on n mod m: sums are 1, floor 1, any m consecutive steps cover
            ValidationReport {
                horizon,
                window: *m,
                weight_floor: 1.0,
                checks: [
                    Hypothesis::Nonnegative,
                    Hypothesis::WeightsSum,
                    Hypothesis::WeightFloor,
                    Hypothesis::WindowCoverage,
                ]
                .into_iter()
                .map(HypothesisCheck::pass)
                .collect(),
            }
        }
        Schedule::QuasiCyclic {
            m,
            weights,
            window,
            weight_floor,
        } => {
            if *m == 0 || *window == 0 || !(*weight_floor > 0.0 && *weight_floor <= 1.0) {
                return parameter_failure("need m >= 1, window >= 1 and floor in (0, 1]", horizon);
            }
            validate_weights(&|n| weights.weights(n), *m, *window, *weight_floor, horizon)
        }
        Schedule::RandomMap { m, seed, window } => {
            match draw_random_map(*m, *seed, *window, horizon.max(1)) {
                Err(e) => parameter_failure(format!("{e}"), horizon),
                Ok(idx) => {
                    let m = *m;
                    validate_weights(
                        &|n| {
                            let mut w = vec![0.0; m];
                            w[idx[n]] = 1.0;
                            w
                        },
                        m,
                        2 * window - 1,
                        1.0,
                        horizon,
                    )
                }
            }
        }
        Schedule::Bernoulli { probs, .. } => {
            let mut check = HypothesisCheck::pass(Hypothesis::ProbabilityVector);
            if let Err(e) = check_probs(probs) {
                check.detail = format!("{e}");
            }
            ValidationReport {
                horizon,
                window: probs.len(),
                weight_floor: probs.iter().cloned().fold(f64::INFINITY, f64::min),
                checks: vec![check],
            }
        }
    }
}

/// Core check over an explicit weight rule.
pub fn validate_weights(
    weights: &dyn Fn(usize) -> Vec<f64>,
    m: usize,
    window: usize,
    weight_floor: f64,
    horizon: usize,
) -> ValidationReport {
    let mut nonneg = HypothesisCheck::pass(Hypothesis::Nonnegative);
    let mut sum = HypothesisCheck::pass(Hypothesis::WeightsSum);
    let mut floor = HypothesisCheck::pass(Hypothesis::WeightFloor);
    let mut coverage = HypothesisCheck::pass(Hypothesis::WindowCoverage);
    let floor_cut = weight_floor * (1.0 - 1e-12);

    let mut supports: Vec<Vec<usize>> = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let w = weights(n);
        if sum.first_violation.is_none() {
            if w.len() != m {
                sum.first_violation = Some(n);
                sum.detail = format!("step {n} has {} weights, expected {m}", w.len());
            } else {
                let s: f64 = w.iter().sum();
                if !((s - 1.0).abs() <= WEIGHT_SUM_TOL) {
                    sum.first_violation = Some(n);
                    sum.detail = format!("step {n} weights sum to {s}");
                }
            }
        }
        if nonneg.first_violation.is_none() {
            if let Some(i) = w.iter().position(|x| !(*x >= 0.0)) {
                nonneg.first_violation = Some(n);
                nonneg.detail = format!("weight {i} at step {n} is {}", w[i]);
            }
        }
        if floor.first_violation.is_none() {
            if let Some(i) = w.iter().position(|x| *x > 0.0 && *x < floor_cut) {
                floor.first_violation = Some(n);
                floor.detail = format!("weight {i} at step {n} is {} < {weight_floor}", w[i]);
            }
        }
        supports.push(
            w.iter()
                .enumerate()
                .filter(|(i, x)| **x > 0.0 && *i < m)
                .map(|(i, _)| i)
                .collect(),
        );
    }

    // sliding window over supports: counts[i] = active steps of i in the window
    if horizon >= window {
        let mut counts = vec![0usize; m];
        let mut covered = 0usize;
        let add = |counts: &mut Vec<usize>, covered: &mut usize, s: &[usize], up: bool| {
            for &i in s {
                if up {
                    if counts[i] == 0 {
                        *covered += 1;
                    }
                    counts[i] += 1;
                } else {
                    counts[i] -= 1;
                    if counts[i] == 0 {
                        *covered -= 1;
                    }
                }
            }
        };
        for s in &supports[..window] {
            add(&mut counts, &mut covered, s, true);
        }
        for start in 0..=(horizon - window) {
            if start > 0 {
                add(&mut counts, &mut covered, &supports[start - 1], false);
                add(&mut counts, &mut covered, &supports[start + window - 1], true);
            }
            if covered < m {
                let missing = counts.iter().position(|c| *c == 0).unwrap_or(0);
                coverage.first_violation = Some(start);
                coverage.detail = format!(
                    "index {missing} inactive in steps {start}..{}",
                    start + window - 1
                );
                break;
            }
        }
    }

    ValidationReport {
        horizon,
        window,
        weight_floor,
        checks: vec![nonneg, sum, floor, coverage],
    }
}

/// Random index sequence over `0..m` in which each block of `window`
/// consecutive draws contains every index; any `2 * window - 1` consecutive
/// draws therefore cover all indices. Deterministic given `seed`.
pub fn draw_random_map(m: usize, seed: u64, window: usize, horizon: usize) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::invalid("m", "must be >= 1"));
    }
    if window < m {
        return Err(Error::invalid("window", "must be >= m, otherwise coverage is impossible"));
    }
    let mut rng = sampling::rng(seed);
    let mut out = Vec::with_capacity(horizon + window);
    let mut block = Vec::with_capacity(window);
    while out.len() < horizon {
        block.clear();
        block.extend(0..m);
        for _ in m..window {
            block.push(rng.gen_range(0..m));
        }
        block.shuffle(&mut rng);
        out.extend_from_slice(&block);
    }
    out.truncate(horizon);
    Ok(out)
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::EmptyList("probs"));
    }
    if probs.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return Err(Error::invalid("probs", "every probability must be > 0"));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::invalid("probs", "must sum to 1"));
    }
    Ok(())
}

/// I.i.d. indices with `P(i) = probs[i]`. Deterministic given `seed`.
pub fn draw_bernoulli(probs: &[f64], seed: u64, horizon: usize) -> Result<Vec<usize>> {
    check_probs(probs)?;
    let mut rng = sampling::rng(seed);
    let last = probs.len() - 1;
    Ok((0..horizon)
        .map(|_| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    return i;
                }
            }
            last
        })
        .collect())
}
