//! Iteration drivers for `x_{n+1} = sum_i w_{i,n} T_i x_n` and its composed,
//! cyclic and randomized variants, with traces, Fejér monitoring and
//! stopping rules.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::control::{self, Schedule};
use crate::geometry::{SetDescriptor, Vector};
use crate::operators::{compose, FixedPointMap, ScalarFn};
use crate::{Error, Result};

/// Iterates are stored in full while `dim * (max_iter + 1)` stays at or below this.
pub const FULL_STORAGE_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One schedule step per iteration.
    Combination,
    /// Cyclic schedules only: one iteration applies `T_m ... T_1`.
    ComposedPass,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoppingRule {
    /// Stop once `||x_{n+1} - x_n|| <= tol`.
    ResidualBelow { tol: f64 },
    /// Stop once the named probe evaluated at the current iterate is `<= tol`
    /// (checked at `x_0` too).
    ProbeBelow { label: String, tol: f64 },
    MaxIterOnly,
}

/// A labelled scalar measurement of iterates.
#[derive(Clone)]
pub struct Probe {
    pub label: String,
    f: ScalarFn,
}

impl fmt::Debug for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Probe").field("label", &self.label).finish()
    }
}

impl Probe {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        Probe {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn distance_to(label: impl Into<String>, set: SetDescriptor) -> Self {
        Probe::new(label, move |x| set.distance_unchecked(x))
    }

    /// `max_i d_{sets[i]}(x)`.
    pub fn max_distance(label: impl Into<String>, sets: Vec<SetDescriptor>) -> Self {
        Probe::new(label, move |x| {
            sets.iter()
                .map(|s| s.distance_unchecked(x))
                .fold(0.0, f64::max)
        })
    }

    /// `max_i d_{sets[i]}(P_shadow x)`: feasibility of the shadow sequence.
    pub fn shadow_max_distance(
        label: impl Into<String>,
        shadow: SetDescriptor,
        sets: Vec<SetDescriptor>,
    ) -> Self {
        Probe::new(label, move |x| {
            let z = shadow.project_unchecked(x);
            sets.iter()
                .map(|s| s.distance_unchecked(&z))
                .fold(0.0, f64::max)
        })
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub maps: Vec<FixedPointMap>,
    pub schedule: Schedule,
    pub mode: Mode,
    pub start: Vector,
    pub max_iter: usize,
    pub stop: StoppingRule,
    pub probes: Vec<Probe>,
    /// Points `c` for the Fejér check `||x_{n+1} - c|| <= ||x_n - c||`.
    /// When empty, the final iterate is used retroactively.
    pub anchors: Vec<Vector>,
    /// Set to false to keep only the scalar series and the final iterate.
    pub record_iterates: bool,
}

impl RunConfig {
    pub fn new(maps: Vec<FixedPointMap>, schedule: Schedule, start: Vector) -> Self {
        RunConfig {
            maps,
            schedule,
            mode: Mode::Combination,
            start,
            max_iter: 1000,
            stop: StoppingRule::MaxIterOnly,
            probes: Vec::new(),
            anchors: Vec::new(),
            record_iterates: true,
        }
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn stop(mut self, rule: StoppingRule) -> Self {
        self.stop = rule;
        self
    }

    pub fn probe(mut self, p: Probe) -> Self {
        self.probes.push(p);
        self
    }

    pub fn anchor(mut self, c: Vector) -> Self {
        self.anchors.push(c);
        self
    }

    pub fn record_iterates(mut self, on: bool) -> Self {
        self.record_iterates = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ResidualBelow,
    ProbeBelow,
    MaxIter,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::ResidualBelow => "residual_below",
            StopReason::ProbeBelow => "probe_below",
            StopReason::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// `(n, x_n)` for stored iterates; always includes `x_0` and the final iterate.
    pub iterates: Vec<(usize, Vector)>,
    /// Spacing of stored iterates (1 means every iterate).
    pub stride: usize,
    /// `residuals[n] = ||x_{n+1} - x_n||`.
    pub residuals: Vec<f64>,
    pub probe_labels: Vec<String>,
    /// `probe_values[j][n]` is probe `j` at `x_n`, `n = 0..=iterations_used`.
    pub probe_values: Vec<Vec<f64>>,
    /// Per step, `max_c (||x_{n+1} - c|| - ||x_n - c||)_+`. When
    /// `fejer_self_anchored`, computed afterwards against the final iterate over
    /// consecutive stored iterates: a necessary condition only.
    pub fejer_violation: Vec<f64>,
    pub fejer_self_anchored: bool,
    /// Operator index used at each step (randomized and per-operator cyclic runs).
    pub indices: Option<Vec<usize>>,
    pub stop_reason: StopReason,
    pub iterations_used: usize,
    pub final_iterate: Vector,
}

impl RunTrace {
    pub fn max_fejer_violation(&self) -> f64 {
        self.fejer_violation.iter().cloned().fold(0.0, f64::max)
    }

    pub fn probe(&self, label: &str) -> Option<&[f64]> {
        self.probe_labels
            .iter()
            .position(|l| l == label)
            .map(|j| self.probe_values[j].as_slice())
    }

    pub fn converged(&self) -> bool {
        self.stop_reason != StopReason::MaxIter
    }
}

/// How each step picks its weights.
enum StepLaw {
    Composed(FixedPointMap),
    Cyclic(usize),
    Weights(control::WeightRule),
    Indices(Vec<usize>),
}

fn check_config(cfg: &RunConfig) -> Result<()> {
    if cfg.max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be >= 1"));
    }
    if cfg.maps.is_empty() {
        return Err(Error::EmptyList("maps"));
    }
    if cfg.maps.len() != cfg.schedule.m() {
        return Err(Error::invalid(
            "schedule",
            format!("indexes {} maps but {} were given", cfg.schedule.m(), cfg.maps.len()),
        ));
    }
    let dim = cfg.start.dim();
    for d in cfg.maps.iter().map(FixedPointMap::dim).chain(cfg.anchors.iter().map(Vector::dim)) {
        if d != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d,
            });
        }
    }
    match &cfg.stop {
        StoppingRule::ResidualBelow { tol } | StoppingRule::ProbeBelow { tol, .. } if !(*tol > 0.0) => {
            return Err(Error::invalid("tol", "must be > 0"));
        }
        StoppingRule::ProbeBelow { label, .. } if !cfg.probes.iter().any(|p| &p.label == label) => {
            return Err(Error::UnknownProbe(label.clone()));
        }
        _ => {}
    }
    if cfg.mode == Mode::ComposedPass && !matches!(cfg.schedule, Schedule::Cyclic { .. }) {
        return Err(Error::invalid("mode", "composed passes need a cyclic schedule"));
    }
    Ok(())
}

/// Quasi-cyclic driver. Accepts every schedule: cyclic (per operator or one
/// composed pass per iteration), explicit weights, and randomized schedules
/// lowered to point masses. The schedule must validate over `max_iter` steps.
pub fn run_quasi_cyclic(cfg: &RunConfig) -> Result<RunTrace> {
    check_config(cfg)?;
    control::validate(&cfg.schedule, cfg.max_iter).into_result()?;
    let law = match (&cfg.schedule, cfg.mode) {
        (Schedule::Cyclic { .. }, Mode::ComposedPass) => StepLaw::Composed(compose(&cfg.maps)?),
        (Schedule::Cyclic { m }, Mode::Combination) => StepLaw::Cyclic(*m),
        (Schedule::QuasiCyclic { weights, .. }, _) => StepLaw::Weights(weights.clone()),
        (s, _) => StepLaw::Indices(s.draw_indices(cfg.max_iter).expect("randomized schedule")?),
    };
    Ok(iterate(cfg, law))
}

/// Random-map / Bernoulli driver `x_{n+1} = T_{r(n)} x_n`; the index sequence
/// is recorded in the trace.
pub fn run_random(cfg: &RunConfig) -> Result<RunTrace> {
    check_config(cfg)?;
    let idx = match cfg.schedule.draw_indices(cfg.max_iter) {
        Some(idx) => idx?,
        None => {
            return Err(Error::invalid(
                "schedule",
                "run_random needs a random_map or bernoulli schedule",
            ))
        }
    };
    control::validate(&cfg.schedule, cfg.max_iter).into_result()?;
    Ok(iterate(cfg, StepLaw::Indices(idx)))
}

fn fejer_step(anchors: &[Vector], prev: &Vector, next: &Vector) -> f64 {
    anchors
        .iter()
        .map(|c| (next.dist(c) - prev.dist(c)).max(0.0))
        .fold(0.0, f64::max)
}

fn iterate(cfg: &RunConfig, law: StepLaw) -> RunTrace {
    let dim = cfg.start.dim();
    let stride = if !cfg.record_iterates {
        usize::MAX
    } else if dim.saturating_mul(cfg.max_iter + 1) <= FULL_STORAGE_LIMIT {
        1
    } else {
        dim.saturating_mul(cfg.max_iter + 1).div_ceil(FULL_STORAGE_LIMIT)
    };
    let stop_probe = match &cfg.stop {
        StoppingRule::ProbeBelow { label, tol } => cfg
            .probes
            .iter()
            .position(|p| &p.label == label)
            .map(|j| (j, *tol)),
        _ => None,
    };

    let mut x = cfg.start.clone();
    let mut iterates = vec![(0usize, x.clone())];
    let mut residuals = Vec::new();
    let mut probe_values: Vec<Vec<f64>> = cfg.probes.iter().map(|p| vec![p.eval(&x)]).collect();
    let mut fejer = Vec::new();
    let mut used_indices = match &law {
        StepLaw::Indices(_) | StepLaw::Cyclic(_) => Some(Vec::new()),
        _ => None,
    };
    let mut reason = StopReason::MaxIter;
    let mut n = 0usize;

    let probe_hit = |vals: &Vec<Vec<f64>>| stop_probe.map_or(false, |(j, tol)| *vals[j].last().unwrap() <= tol);

    if !probe_hit(&probe_values) {
        while n < cfg.max_iter {
            let next = match &law {
                StepLaw::Composed(t) => t.apply_unchecked(&x),
                StepLaw::Indices(idx) => {
                    let i = idx[n];
                    if let Some(u) = used_indices.as_mut() {
                        u.push(i);
                    }
                    cfg.maps[i].apply_unchecked(&x)
                }
                StepLaw::Cyclic(m) => {
                    let i = n % m;
                    if let Some(u) = used_indices.as_mut() {
                        u.push(i);
                    }
                    cfg.maps[i].apply_unchecked(&x)
                }
                StepLaw::Weights(rule) => combine(&cfg.maps, &rule.weights(n), &x),
            };
            let r = next.dist(&x);
            residuals.push(r);
            if !cfg.anchors.is_empty() {
                fejer.push(fejer_step(&cfg.anchors, &x, &next));
            }
            for (vals, p) in probe_values.iter_mut().zip(&cfg.probes) {
                vals.push(p.eval(&next));
            }
            x = next;
            n += 1;
            if stride != usize::MAX && n % stride == 0 {
                iterates.push((n, x.clone()));
            }
            if let StoppingRule::ResidualBelow { tol } = cfg.stop {
                if r <= tol {
                    reason = StopReason::ResidualBelow;
                    break;
                }
            }
            if probe_hit(&probe_values) {
                reason = StopReason::ProbeBelow;
                break;
            }
        }
    } else {
        reason = StopReason::ProbeBelow;
    }

    if iterates.last().map(|(k, _)| *k) != Some(n) {
        iterates.push((n, x.clone()));
    }
    let self_anchored = cfg.anchors.is_empty();
    if self_anchored {
        let c = core::slice::from_ref(&x);
        fejer = iterates
            .windows(2)
            .map(|w| fejer_step(c, &w[0].1, &w[1].1))
            .collect();
    }
    if !cfg.record_iterates {
        iterates.retain(|(k, _)| *k == n);
    }
    RunTrace {
        iterates,
        stride: if cfg.record_iterates { stride } else { 0 },
        residuals,
        probe_labels: cfg.probes.iter().map(|p| p.label.clone()).collect(),
        probe_values,
        fejer_violation: fejer,
        fejer_self_anchored: self_anchored,
        indices: used_indices,
        stop_reason: reason,
        iterations_used: n,
        final_iterate: x,
    }
}

fn combine(maps: &[FixedPointMap], w: &[f64], x: &Vector) -> Vector {
    let mut active = w.iter().zip(maps).filter(|(wi, _)| **wi > 0.0);
    match (active.next(), active.next()) {
        (Some((wi, t)), None) if *wi == 1.0 => t.apply_unchecked(x),
        _ => {
            let mut acc = Vector::zeros(x.dim());
            for (wi, t) in w.iter().zip(maps).filter(|(wi, _)| **wi > 0.0) {
                acc.axpy(*wi, &t.apply_unchecked(x));
            }
            acc
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// `exp(slope)` of the least-squares line through `(n, ln d_n)`.
    pub alpha: f64,
    pub r2: f64,
    /// Largest observed per-step ratio `(d_{k+1} / d_k)^(1 / gap)`.
    pub max_step_ratio: f64,
    pub samples: usize,
}

/// Geometric fit of `target_distance` along the stored iterates of `trace`.
pub fn estimate_rate<F>(trace: &RunTrace, target_distance: F) -> Result<RateEstimate>
where
    F: Fn(&Vector) -> f64,
{
    let series: Vec<(usize, f64)> = trace
        .iterates
        .iter()
        .map(|(n, x)| (*n, target_distance(x)))
        .collect();
    estimate_rate_from_series(&series)
}

/// Same fit from explicit `(n, d_n)` pairs. Only the prefix of strictly
/// positive distances is used.
pub fn estimate_rate_from_series(series: &[(usize, f64)]) -> Result<RateEstimate> {
    let prefix: Vec<(f64, f64)> = series
        .iter()
        .take_while(|(_, d)| *d > 0.0 && d.is_finite())
        .map(|(n, d)| (*n as f64, libm::log(*d)))
        .collect();
    if prefix.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            found: prefix.len(),
        });
    }
    let k = prefix.len() as f64;
    let mx = prefix.iter().map(|p| p.0).sum::<f64>() / k;
    let my = prefix.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = prefix.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = prefix.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = prefix.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let ss_res: f64 = prefix
        .iter()
        .map(|p| {
            let e = p.1 - (my + slope * (p.0 - mx));
            e * e
        })
        .sum();
    let r2 = if ss_tot <= f64::EPSILON * f64::EPSILON * k {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    let max_step_ratio = prefix
        .windows(2)
        .map(|w| libm::exp((w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
        .fold(0.0, f64::max);
    Ok(RateEstimate {
        alpha: libm::exp(slope),
        r2,
        max_step_ratio,
        samples: prefix.len(),
    })
}

/// Largest excess of `||x_n - limit||` over the envelope `2 alpha^n d0 (1 + 1e-6)`
/// across stored iterates; `<= 0` means the envelope holds everywhere.
pub fn linear_envelope_excess(trace: &RunTrace, limit: &Vector, alpha: f64, d0: f64) -> f64 {
    trace
        .iterates
        .iter()
        .map(|(n, x)| x.dist(limit) - 2.0 * libm::pow(alpha, *n as f64) * d0 * (1.0 + 1e-6))
        .fold(f64::NEG_INFINITY, f64::max)
}
