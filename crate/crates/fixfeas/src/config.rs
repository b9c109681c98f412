//! JSON configuration files and their translation into core objects.
//!
//! Sets are declared once under `"sets"` by name and referenced by name from
//! operators and probes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fixfeas_core::control::{Schedule, WeightRule};
use fixfeas_core::diagnostics::DrPair;
use fixfeas_core::engine::{Mode, Probe, StoppingRule};
use fixfeas_core::geometry::AffineSet;
use fixfeas_core::operators::{
    btm_chain, cadra_chain, compose, convex_combination, cyclic_projections, dr_operator, projector, reflector,
    relaxed_projector, thresholder_fixture, two_lines_fixture,
};
use fixfeas_core::{FixedPointMap, SetDescriptor, Vector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{at, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// `null` bounds are infinite.
    Box { lower: Vec<Option<f64>>, upper: Vec<Option<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
    /// `basis` may be any spanning set; it is orthonormalized on load.
    Affine { basepoint: Vec<f64>, basis: Vec<Vec<f64>> },
    OrthantFace { n: usize, k: usize },
}

impl SetSpec {
    pub fn build(&self) -> fixfeas_core::Result<SetDescriptor> {
        match self {
            SetSpec::Hyperplane { normal, offset } => SetDescriptor::hyperplane(Vector::from(normal.as_slice()), *offset),
            SetSpec::Halfspace { normal, offset } => SetDescriptor::halfspace(Vector::from(normal.as_slice()), *offset),
            SetSpec::Box { lower, upper } => {
                let lo = lower.iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect();
                let hi = upper.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
                SetDescriptor::boxed(lo, hi)
            }
            SetSpec::Ball { center, radius } => SetDescriptor::ball(Vector::from(center.as_slice()), *radius),
            SetSpec::Affine { basepoint, basis } => {
                let point = Vector::from(basepoint.as_slice());
                let spanning: Vec<Vector> = basis.iter().map(|b| Vector::from(b.as_slice())).collect();
                if let Some(b) = spanning.iter().find(|b| b.dim() != point.dim()) {
                    return Err(fixfeas_core::Error::DimensionMismatch {
                        expected: point.dim(),
                        found: b.dim(),
                    });
                }
                Ok(AffineSet::from_spanning(point, &spanning).to_descriptor())
            }
            SetSpec::OrthantFace { n, k } => SetDescriptor::orthant_face(*n, *k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpSpec {
    Projector { set: String },
    RelaxedProjector { set: String, relax: f64 },
    Reflector { set: String },
    /// Douglas–Rachford `P_B R_A + Id - P_A`; affine pairs get the exact Fix oracle.
    Dr { a: String, b: String },
    /// `of[0]` is applied first.
    Compose { of: Vec<OpSpec> },
    ConvexCombination { of: Vec<OpSpec>, weights: Vec<f64> },
    Btm { sets: Vec<String> },
    Cadra { anchor: String, walls: Vec<String> },
    CyclicProjections { sets: Vec<String> },
    TwoLines { theta: f64 },
    Thresholder,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Cyclic,
    Parallel,
    RoundRobinPairs,
    /// Rows are reused periodically.
    QuasiCyclic { weights: Vec<Vec<f64>>, window: usize, floor: f64 },
    RandomMap { window: Option<usize>, seed: Option<u64> },
    Bernoulli { probs: Vec<f64>, seed: Option<u64> },
}

impl ScheduleSpec {
    pub fn build(&self, m: usize, seed: u64) -> CliResult<Schedule> {
        Ok(match self {
            ScheduleSpec::Cyclic => Schedule::cyclic(m),
            ScheduleSpec::Parallel => Schedule::parallel(m),
            ScheduleSpec::RoundRobinPairs => Schedule::round_robin_pairs(m),
            ScheduleSpec::QuasiCyclic { weights, window, floor } => Schedule::QuasiCyclic {
                m,
                weights: WeightRule::table(weights.clone()).map_err(at("schedule.weights"))?,
                window: *window,
                weight_floor: *floor,
            },
            ScheduleSpec::RandomMap { window, seed: s } => Schedule::random_map(m, s.unwrap_or(seed), window.unwrap_or(m)),
            ScheduleSpec::Bernoulli { probs, seed: s } => Schedule::bernoulli(probs.clone(), s.unwrap_or(seed)),
        })
    }

    pub fn is_random(&self) -> bool {
        matches!(self, ScheduleSpec::RandomMap { .. } | ScheduleSpec::Bernoulli { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    Combination,
    ComposedPass,
}

impl From<ModeSpec> for Mode {
    fn from(m: ModeSpec) -> Mode {
        match m {
            ModeSpec::Combination => Mode::Combination,
            ModeSpec::ComposedPass => Mode::ComposedPass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeKind {
    Distance { set: String },
    MaxDistance { sets: Vec<String> },
    ShadowMaxDistance { shadow: String, sets: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub label: String,
    #[serde(flatten)]
    pub kind: ProbeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StopSpec {
    Residual { tol: f64 },
    Probe { probe: String, tol: f64 },
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    pub operators: Vec<OpSpec>,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub mode: ModeSpec,
    pub start: Vec<f64>,
    pub max_iter: Option<usize>,
    pub stop: Option<StopSpec>,
    #[serde(default)]
    pub probes: Vec<ProbeSpec>,
    /// Known common fixed points for the Fejér check.
    #[serde(default)]
    pub anchors: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    /// Also write every stored iterate to `iterates.csv`.
    #[serde(default)]
    pub write_iterates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransversalitySpec {
    pub center: Vec<f64>,
    pub delta: f64,
    #[serde(default)]
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseFile {
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    pub operator: Option<OpSpec>,
    /// Shorthand for a DR operator on the pair, enabling the transversality check.
    pub pair: Option<PairSpec>,
    /// Sets whose intersection regularity `mu` is estimated.
    pub family: Option<Vec<String>>,
    pub rho: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub transversality: Option<TransversalitySpec>,
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(path.display().to_string(), e))
}

/// Named sets resolved to descriptors.
pub struct SetTable {
    sets: BTreeMap<String, SetDescriptor>,
}

impl SetTable {
    pub fn build(specs: &BTreeMap<String, SetSpec>) -> CliResult<Self> {
        let mut sets = BTreeMap::new();
        for (name, spec) in specs {
            let field = format!("sets.{name}");
            sets.insert(name.clone(), spec.build().map_err(at(field))?);
        }
        Ok(SetTable { sets })
    }

    pub fn get(&self, name: &str, field: &str) -> CliResult<&SetDescriptor> {
        self.sets
            .get(name)
            .ok_or_else(|| CliError::config(field, format!("unknown set {name:?}")))
    }

    pub fn many(&self, names: &[String], field: &str) -> CliResult<Vec<SetDescriptor>> {
        names.iter().map(|n| self.get(n, field).cloned()).collect()
    }

    pub fn build_op(&self, op: &OpSpec, field: &str) -> CliResult<FixedPointMap> {
        let set = |name: &str, sub: &str| self.get(name, &format!("{field}.{sub}"));
        let sub = |s: &str| format!("{field}.{s}");
        match op {
            OpSpec::Projector { set: s } => projector(set(s, "set")?).map_err(at(field)),
            OpSpec::RelaxedProjector { set: s, relax } => relaxed_projector(set(s, "set")?, *relax).map_err(at(sub("relax"))),
            OpSpec::Reflector { set: s } => reflector(set(s, "set")?).map_err(at(field)),
            OpSpec::Dr { a, b } => dr_with_oracle(set(a, "a")?, set(b, "b")?, field),
            OpSpec::Compose { of } => {
                let maps = self.build_ops(of, &sub("of"))?;
                compose(&maps).map_err(at(sub("of")))
            }
            OpSpec::ConvexCombination { of, weights } => {
                let maps = self.build_ops(of, &sub("of"))?;
                convex_combination(&maps, weights).map_err(at(sub("weights")))
            }
            OpSpec::Btm { sets } => btm_chain(&self.many(sets, &sub("sets"))?).map_err(at(sub("sets"))),
            OpSpec::Cadra { anchor, walls } => {
                cadra_chain(set(anchor, "anchor")?, &self.many(walls, &sub("walls"))?).map_err(at(sub("walls")))
            }
            OpSpec::CyclicProjections { sets } => {
                cyclic_projections(&self.many(sets, &sub("sets"))?).map_err(at(sub("sets")))
            }
            OpSpec::TwoLines { theta } => two_lines_fixture(*theta).map_err(at(sub("theta"))),
            OpSpec::Thresholder => Ok(thresholder_fixture()),
        }
    }

    pub fn build_ops(&self, ops: &[OpSpec], field: &str) -> CliResult<Vec<FixedPointMap>> {
        ops.iter()
            .enumerate()
            .map(|(i, op)| self.build_op(op, &format!("{field}[{i}]")))
            .collect()
    }

    pub fn build_probe(&self, p: &ProbeSpec, field: &str) -> CliResult<Probe> {
        Ok(match &p.kind {
            ProbeKind::Distance { set } => Probe::distance_to(&p.label, self.get(set, &format!("{field}.set"))?.clone()),
            ProbeKind::MaxDistance { sets } => Probe::max_distance(&p.label, self.many(sets, &format!("{field}.sets"))?),
            ProbeKind::ShadowMaxDistance { shadow, sets } => Probe::shadow_max_distance(
                &p.label,
                self.get(shadow, &format!("{field}.shadow"))?.clone(),
                self.many(sets, &format!("{field}.sets"))?,
            ),
        })
    }
}

/// DR map, with the exact Fix oracle attached when the pair is affine and consistent.
pub fn dr_with_oracle(a: &SetDescriptor, b: &SetDescriptor, field: &str) -> CliResult<FixedPointMap> {
    let pair = DrPair::new(a.clone(), b.clone()).map_err(at(field))?;
    match pair.operator_with_oracle() {
        Ok(t) => Ok(t),
        Err(fixfeas_core::Error::NotAffine | fixfeas_core::Error::EmptyIntersection) => {
            dr_operator(a, b).map_err(at(field))
        }
        Err(e) => Err(at(field)(e)),
    }
}

impl StopSpec {
    /// `tol` replaces the rule's tolerance; with no rule it means a residual stop.
    pub fn build(spec: Option<&StopSpec>, tol: Option<f64>) -> CliResult<StoppingRule> {
        if let Some(t) = tol {
            if !(t > 0.0) {
                return Err(CliError::config("--tol", "must be > 0"));
            }
        }
        Ok(match (spec, tol) {
            (Some(StopSpec::Probe { probe, tol: t }), o) => StoppingRule::ProbeBelow {
                label: probe.clone(),
                tol: o.unwrap_or(*t),
            },
            (Some(StopSpec::Residual { tol: t }), o) => StoppingRule::ResidualBelow { tol: o.unwrap_or(*t) },
            (Some(StopSpec::MaxIter) | None, Some(t)) => StoppingRule::ResidualBelow { tol: t },
            (Some(StopSpec::MaxIter) | None, None) => StoppingRule::MaxIterOnly,
        })
    }
}
