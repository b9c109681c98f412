//! Random feasibility problems `find x in A n B_1 n ... n B_m` with
//! `A = R^k_+ x {0}` and hyperplane walls with positive normals, solved by
//! cyclic projections, Borwein–Tam and CADRA, reported as medians and wins.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::control::Schedule;
use crate::engine::{run_quasi_cyclic, Probe, RunConfig, StopReason, StoppingRule};
use crate::geometry::{SetDescriptor, Vector};
use crate::operators::{btm_chain, cadra_chain, cyclic_projections, FixedPointMap};
use crate::sampling;
use crate::{Error, Result};

pub const SOLUTION_RANGE: (f64, f64) = (0.5, 1.5);
pub const NORMAL_RANGE: (f64, f64) = (0.1, 1.1);
pub const START_NORM: f64 = 100.0;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const FULL_MAX_ITER: usize = 250_000;
pub const DESK_MAX_ITER: usize = 50_000;

const STOP_PROBE: &str = "shadow_infeasibility";

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProblem {
    pub dim: usize,
    pub k: usize,
    pub anchor: SetDescriptor,
    pub walls: Vec<SetDescriptor>,
    pub planted_solution: Vector,
    pub seed: u64,
}

impl FeasibilityProblem {
    pub fn m(&self) -> usize {
        self.walls.len()
    }

    /// `A, B_1, ..., B_m`.
    pub fn sets(&self) -> Vec<SetDescriptor> {
        let mut v = Vec::with_capacity(self.walls.len() + 1);
        v.push(self.anchor.clone());
        v.extend(self.walls.iter().cloned());
        v
    }

    /// `max_i d_{B_i}(P_A x)`.
    pub fn shadow_infeasibility(&self, x: &Vector) -> f64 {
        let z = self.anchor.project_unchecked(x);
        self.walls
            .iter()
            .map(|b| b.distance_unchecked(&z))
            .fold(0.0, f64::max)
    }
}

pub fn generate_problem(n: usize, k: usize, m: usize, seed: u64) -> Result<FeasibilityProblem> {
    if m == 0 {
        return Err(Error::invalid("m", "must be >= 1"));
    }
    let anchor = SetDescriptor::orthant_face(n, k)?;
    let mut rng = sampling::rng(seed);
    let planted: Vector = (0..n)
        .map(|i| {
            if i < k {
                sampling::uniform(&mut rng, SOLUTION_RANGE.0, SOLUTION_RANGE.1)
            } else {
                0.0
            }
        })
        .collect();
    let mut walls = Vec::with_capacity(m);
    for _ in 0..m {
        let normal: Vector = (0..n)
            .map(|_| sampling::uniform(&mut rng, NORMAL_RANGE.0, NORMAL_RANGE.1))
            .collect();
        let offset = normal.dot(&planted);
        walls.push(SetDescriptor::hyperplane(normal, offset)?);
    }
    Ok(FeasibilityProblem {
        dim: n,
        k,
        anchor,
        walls,
        planted_solution: planted,
        seed,
    })
}

/// Points of `R^n_+` with Euclidean norm `norm`.
pub fn starting_points(n: usize, count: usize, norm: f64, seed: u64) -> Result<Vec<Vector>> {
    if count == 0 {
        return Err(Error::invalid("count", "must be >= 1"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    let mut rng = sampling::rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vector = (0..n).map(|_| sampling::uniform(&mut rng, 0.0, 1.0)).collect();
        let len = v.norm();
        if len > 0.0 {
            out.push(v.scale(norm / len));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    CycP,
    Btm,
    Cadra,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::CycP, Algorithm::Btm, Algorithm::Cadra];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::CycP => "CycP",
            Algorithm::Btm => "BTM",
            Algorithm::Cadra => "CADRA",
        }
    }

    /// One pass of the algorithm as a single map.
    pub fn pass(self, p: &FeasibilityProblem) -> Result<FixedPointMap> {
        match self {
            Algorithm::CycP => cyclic_projections(&p.sets()),
            Algorithm::Btm => btm_chain(&p.sets()),
            Algorithm::Cadra => cadra_chain(&p.anchor, &p.walls),
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl core::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cycp" => Ok(Algorithm::CycP),
            "btm" => Ok(Algorithm::Btm),
            "cadra" => Ok(Algorithm::Cadra),
            _ => Err(Error::invalid("algorithm", format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub m: usize,
    pub problem_seed: u64,
    pub start_index: usize,
    pub algorithm: Algorithm,
    /// Composed passes until the stopping rule held (or `max_iter`).
    pub iterations: usize,
    pub converged: bool,
    pub final_infeasibility: f64,
    pub max_fejer_violation: f64,
}

/// Runs one (problem, start, algorithm) cell until `max_i d_{B_i}(P_A x_n) <= tol`.
pub fn run_cell(
    problem: &FeasibilityProblem,
    start: &Vector,
    start_index: usize,
    algorithm: Algorithm,
    tol: f64,
    max_iter: usize,
) -> Result<CellResult> {
    let walls = problem.walls.clone();
    let cfg = RunConfig::new(vec![algorithm.pass(problem)?], Schedule::cyclic(1), start.clone())
        .max_iter(max_iter)
        .probe(Probe::shadow_max_distance(STOP_PROBE, problem.anchor.clone(), walls))
        .stop(StoppingRule::ProbeBelow {
            label: String::from(STOP_PROBE),
            tol,
        })
        .anchor(problem.planted_solution.clone())
        .record_iterates(false);
    let trace = run_quasi_cyclic(&cfg)?;
    let last = trace.probe(STOP_PROBE).and_then(|v| v.last().copied()).unwrap_or(f64::NAN);
    Ok(CellResult {
        m: problem.m(),
        problem_seed: problem.seed,
        start_index,
        algorithm,
        iterations: trace.iterations_used,
        converged: trace.stop_reason == StopReason::ProbeBelow,
        final_infeasibility: last,
        max_fejer_violation: trace.max_fejer_violation(),
    })
}

/// Experiment grid: every `m`, `seeds` problems per `m`, `starts` starting points per problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub n: usize,
    pub k: usize,
    pub ms: Vec<usize>,
    pub seeds: usize,
    pub starts: usize,
    pub start_norm: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub m: usize,
    pub problem_seed: u64,
    pub start_seed: u64,
    pub start_index: usize,
    pub algorithm: Algorithm,
}

impl BenchPlan {
    pub fn full(ms: Vec<usize>, seeds: usize) -> Self {
        BenchPlan {
            n: 100,
            k: 50,
            ms,
            seeds,
            starts: 10,
            start_norm: START_NORM,
            tol: DEFAULT_TOL,
            max_iter: FULL_MAX_ITER,
            base_seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
        }
    }

    pub fn desk(ms: Vec<usize>, seeds: usize) -> Self {
        BenchPlan {
            n: 20,
            k: 10,
            starts: 5,
            max_iter: DESK_MAX_ITER,
            ..BenchPlan::full(ms, seeds)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k > self.n || self.n == 0 {
            return Err(Error::invalid("k", "need 1 <= n and k <= n"));
        }
        if self.ms.is_empty() || self.ms.contains(&0) {
            return Err(Error::invalid("m", "need a nonempty range of values >= 1"));
        }
        if self.seeds == 0 {
            return Err(Error::invalid("seeds", "must be >= 1"));
        }
        if self.starts == 0 {
            return Err(Error::invalid("starts", "must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", "must be > 0"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be >= 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::EmptyList("algorithms"));
        }
        Ok(())
    }

    pub fn problem_seed(&self, m: usize, s: usize) -> u64 {
        sampling::derive_seed(self.base_seed, ((m as u64) << 32) | s as u64)
    }

    pub fn start_seed(&self, problem_seed: u64) -> u64 {
        sampling::derive_seed(problem_seed, u64::MAX)
    }

    /// Cells in report order.
    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::new();
        for &m in &self.ms {
            for s in 0..self.seeds {
                let problem_seed = self.problem_seed(m, s);
                for start_index in 0..self.starts {
                    for &algorithm in &self.algorithms {
                        out.push(CellSpec {
                            m,
                            problem_seed,
                            start_seed: self.start_seed(problem_seed),
                            start_index,
                            algorithm,
                        });
                    }
                }
            }
        }
        out
    }

    /// Regenerates the cell's problem and start; cells are independent.
    pub fn run(&self, cell: &CellSpec) -> Result<CellResult> {
        let problem = generate_problem(self.n, self.k, cell.m, cell.problem_seed)?;
        let starts = starting_points(self.n, self.starts, self.start_norm, cell.start_seed)?;
        run_cell(&problem, &starts[cell.start_index], cell.start_index, cell.algorithm, self.tol, self.max_iter)
    }
}

/// Sequential driver; see [`BenchPlan::run`] for running cells elsewhere.
pub fn run_benchmark(plan: &BenchPlan) -> Result<BenchReport> {
    plan.validate()?;
    let mut cells = Vec::new();
    for spec in plan.cells() {
        cells.push(plan.run(&spec)?);
    }
    Ok(BenchReport::from_cells(cells, &plan.algorithms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub label: String,
    pub m_lo: usize,
    pub m_hi: usize,
    /// Number of (problem, start) instances.
    pub instances: usize,
    /// Indexed by [`Algorithm`] order; `None` when no cell converged.
    pub medians: [Option<f64>; 3],
    pub wins: [f64; 3],
    pub non_converged: [usize; 3],
}

impl GroupSummary {
    pub fn median(&self, a: Algorithm) -> Option<f64> {
        self.medians[a.slot()]
    }

    pub fn wins(&self, a: Algorithm) -> f64 {
        self.wins[a.slot()]
    }

    pub fn win_percent(&self, a: Algorithm) -> f64 {
        if self.instances == 0 {
            0.0
        } else {
            100.0 * self.wins[a.slot()] / self.instances as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub cells: Vec<CellResult>,
    pub algorithms: Vec<Algorithm>,
    pub groups: Vec<GroupSummary>,
}

/// Bands of ten (`1-10`, `11-20`, ...) when the `m` values span more than
/// one, otherwise a single band.
pub fn band_of(m: usize, m_min: usize, m_max: usize) -> (usize, usize) {
    let band = |v: usize| (v - 1) / 10;
    if band(m_min) == band(m_max) {
        (m_min, m_max)
    } else {
        (band(m) * 10 + 1, band(m) * 10 + 10)
    }
}

fn median(v: &mut [usize]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_unstable();
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[h] as f64
    } else {
        (v[h - 1] + v[h]) as f64 / 2.0
    })
}

impl BenchReport {
    pub fn from_cells(cells: Vec<CellResult>, algorithms: &[Algorithm]) -> Self {
        let m_min = cells.iter().map(|c| c.m).min().unwrap_or(1);
        let m_max = cells.iter().map(|c| c.m).max().unwrap_or(1);
        let mut bands: Vec<(usize, usize)> = cells.iter().map(|c| band_of(c.m, m_min, m_max)).collect();
        bands.sort_unstable();
        bands.dedup();

        let groups = bands
            .into_iter()
            .map(|(lo, hi)| {
                let members: Vec<&CellResult> = cells.iter().filter(|c| c.m >= lo && c.m <= hi).collect();
                let mut medians = [None; 3];
                let mut non_converged = [0; 3];
                for a in Algorithm::ALL {
                    let mut its: Vec<usize> = members
                        .iter()
                        .filter(|c| c.algorithm == a && c.converged)
                        .map(|c| c.iterations)
                        .collect();
                    medians[a.slot()] = median(&mut its);
                    non_converged[a.slot()] = members.iter().filter(|c| c.algorithm == a && !c.converged).count();
                }
                let mut instances: Vec<(usize, u64, usize)> =
                    members.iter().map(|c| (c.m, c.problem_seed, c.start_index)).collect();
                instances.sort_unstable();
                instances.dedup();
                let mut wins = [0.0; 3];
                for key in &instances {
                    let entrants: Vec<&&CellResult> = members
                        .iter()
                        .filter(|c| (c.m, c.problem_seed, c.start_index) == *key && c.converged)
                        .collect();
                    if let Some(best) = entrants.iter().map(|c| c.iterations).min() {
                        let tied: Vec<_> = entrants.iter().filter(|c| c.iterations == best).collect();
                        for c in &tied {
                            wins[c.algorithm.slot()] += 1.0 / tied.len() as f64;
                        }
                    }
                }
                GroupSummary {
                    label: format!("{lo}-{hi}"),
                    m_lo: lo,
                    m_hi: hi,
                    instances: instances.len(),
                    medians,
                    wins,
                    non_converged,
                }
            })
            .collect();
        BenchReport {
            cells,
            algorithms: algorithms.to_vec(),
            groups,
        }
    }

    pub fn group_label(&self, m: usize) -> &str {
        self.groups
            .iter()
            .find(|g| m >= g.m_lo && m <= g.m_hi)
            .map_or("", |g| g.label.as_str())
    }

    /// Medians and win percentages per band, one column pair per algorithm.
    pub fn markdown(&self) -> String {
        let mut s = String::from("| Range of m |");
        for a in &self.algorithms {
            let _ = write!(s, " {} iterations | {} wins (%) |", a.name(), a.name());
        }
        s.push_str("\n|---|");
        for _ in &self.algorithms {
            s.push_str("---:|---:|");
        }
        s.push('\n');
        for g in &self.groups {
            let _ = write!(s, "| {} |", g.label);
            for &a in &self.algorithms {
                match g.median(a) {
                    Some(v) => {
                        let _ = write!(s, " {v:.1} |");
                    }
                    None => s.push_str(" n/a |"),
                }
                let _ = write!(s, " {:.1} |", g.win_percent(a));
            }
            s.push('\n');
        }
        let missed: usize = self.groups.iter().map(|g| g.non_converged.iter().sum::<usize>()).sum();
        if missed > 0 {
            let _ = writeln!(s, "\n{missed} cell(s) hit max_iter; they count as losses and are left out of the medians.");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_problem_invariants() {
        let p = generate_problem(30, 12, 7, 42).unwrap();
        let x = &p.planted_solution;
        assert!(x.iter().take(12).all(|&v| v > 0.0));
        assert!(x.iter().skip(12).all(|&v| v == 0.0));
        assert_eq!(p.anchor.distance(x).unwrap(), 0.0);
        for w in &p.walls {
            let SetDescriptor::Hyperplane { normal, offset } = w else { panic!() };
            assert!(normal.iter().all(|&v| v > 0.0));
            assert!((normal.dot(x) - offset).abs() <= 1e-12);
            assert!(w.distance(x).unwrap() < 1e-12);
        }
        assert_eq!(p, generate_problem(30, 12, 7, 42).unwrap());
    }

    #[test]
    fn perturbing_the_tail_breaks_feasibility() {
        let p = generate_problem(10, 5, 3, 1).unwrap();
        let mut y = p.planted_solution.clone();
        y[7] = 0.25;
        assert!((p.anchor.distance(&y).unwrap() - 0.25).abs() < 1e-15);
        // walls have positive normals, so the tail bump moves off every wall
        let worst = p.walls.iter().map(|w| w.distance(&y).unwrap()).fold(0.0, f64::max);
        assert!(worst > 0.0);
    }

    #[test]
    fn starting_points_sit_on_the_sphere() {
        let pts = starting_points(100, 10, 100.0, 9).unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            assert!((p.norm() - 100.0).abs() <= 1e-9);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
        assert_eq!(pts, starting_points(100, 10, 100.0, 9).unwrap());
        assert!(starting_points(3, 0, 1.0, 0).is_err());
    }

    #[test]
    fn planted_start_stops_immediately() {
        let p = generate_problem(8, 4, 1, 3).unwrap();
        for a in Algorithm::ALL {
            let c = run_cell(&p, &p.planted_solution, 0, a, 1e-3, 100).unwrap();
            assert!(c.converged);
            assert!(c.iterations <= 1);
        }
    }

    #[test]
    fn converged_cells_meet_the_stopping_rule() {
        let p = generate_problem(12, 6, 4, 5).unwrap();
        let starts = starting_points(12, 2, 100.0, 6).unwrap();
        for a in Algorithm::ALL {
            let c = run_cell(&p, &starts[1], 1, a, 1e-3, 20_000).unwrap();
            assert!(c.converged, "{a:?}");
            assert!(c.final_infeasibility <= 1e-3);
            assert!(c.max_fejer_violation <= 1e-8, "{a:?} {}", c.max_fejer_violation);
        }
    }

    fn cell(m: usize, start: usize, a: Algorithm, its: usize, ok: bool) -> CellResult {
        CellResult {
            m,
            problem_seed: m as u64,
            start_index: start,
            algorithm: a,
            iterations: its,
            converged: ok,
            final_infeasibility: 0.0,
            max_fejer_violation: 0.0,
        }
    }

    #[test]
    fn medians_and_fractional_wins() {
        use Algorithm::*;
        let cells = vec![
            cell(3, 0, CycP, 10, true),
            cell(3, 0, Btm, 10, true),
            cell(3, 0, Cadra, 12, true),
            cell(3, 1, CycP, 20, true),
            cell(3, 1, Btm, 5, false),
            cell(3, 1, Cadra, 7, true),
            cell(4, 0, CycP, 30, true),
            cell(4, 0, Btm, 40, true),
            cell(4, 0, Cadra, 30, true),
        ];
        let r = BenchReport::from_cells(cells, &Algorithm::ALL);
        assert_eq!(r.groups.len(), 1);
        let g = &r.groups[0];
        assert_eq!(g.label, "3-4");
        assert_eq!(g.instances, 3);
        assert_eq!(g.median(CycP), Some(20.0));
        assert_eq!(g.median(Btm), Some(25.0));
        assert_eq!(g.median(Cadra), Some(12.0));
        assert_eq!(g.non_converged, [0, 1, 0]);
        assert_eq!(g.wins, [1.0, 0.5, 1.5]);
        assert!((g.wins.iter().sum::<f64>() - 3.0).abs() < 1e-15);
        assert!(r.markdown().contains("| 3-4 | 20.0 | 33.3 | 25.0 | 16.7 | 12.0 | 50.0 |"));
    }

    #[test]
    fn bands_of_ten() {
        assert_eq!(band_of(5, 1, 50), (1, 10));
        assert_eq!(band_of(11, 1, 50), (11, 20));
        assert_eq!(band_of(30, 11, 30), (21, 30));
        assert_eq!(band_of(7, 3, 10), (3, 10));
    }

    #[test]
    fn plan_is_deterministic() {
        let plan = BenchPlan {
            starts: 2,
            ..BenchPlan::desk(vec![2, 3], 2)
        };
        assert_eq!(plan.cells().len(), 2 * 2 * 2 * 3);
        let a = run_benchmark(&plan).unwrap();
        let b = run_benchmark(&plan).unwrap();
        assert_eq!(a, b);
        assert!(a.cells.iter().all(|c| c.converged));
    }
}
