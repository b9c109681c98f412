//! `bench`: the CycP / BTM / CADRA comparison on random orthant-face plus
//! hyperplane problems, written as CSV, markdown and metadata JSON.

use std::collections::BTreeMap;
use std::path::PathBuf;

use fixfeas_core::bench::{self, Algorithm, BenchPlan, BenchReport, CellResult, GroupSummary};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{csv_writer, out_path, prepare_dir, write_json, write_text};
use crate::{CliError, CliResult};

pub const CSV_FILE: &str = "bench.csv";
pub const TABLE_FILE: &str = "bench.md";
pub const METADATA_FILE: &str = "bench_metadata.json";

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub out: PathBuf,
    pub m: (usize, usize),
    pub seeds: usize,
    pub starts: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: u64,
    pub desk: bool,
    pub jobs: Option<usize>,
    pub verbose: bool,
}

/// Parses `a..b`, `a..=b` (both inclusive) or a single `a`.
pub fn parse_m_range(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected a range like 1..50, got {s:?}");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim_start_matches('=').trim()),
        None => (s.trim(), s.trim()),
    };
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(format!("need 1 <= lo <= hi, got {s:?}"));
    }
    Ok((lo, hi))
}

impl BenchOptions {
    pub fn plan(&self) -> CliResult<BenchPlan> {
        let ms: Vec<usize> = (self.m.0..=self.m.1).collect();
        let mut plan = if self.desk {
            BenchPlan::desk(ms, self.seeds)
        } else {
            BenchPlan::full(ms, self.seeds)
        };
        if let Some(s) = self.starts {
            plan.starts = s;
        }
        if let Some(t) = self.tol {
            plan.tol = t;
        }
        if let Some(n) = self.max_iter {
            plan.max_iter = n;
        }
        plan.base_seed = self.seed;
        plan.validate().map_err(|e| match e {
            fixfeas_core::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
            e => CliError::config("bench", e),
        })?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, Serialize)]
struct GroupMeta {
    range: String,
    instances: usize,
    medians: BTreeMap<&'static str, Option<f64>>,
    win_percent: BTreeMap<&'static str, f64>,
    non_converged: BTreeMap<&'static str, usize>,
}

impl GroupMeta {
    fn from(g: &GroupSummary) -> Self {
        GroupMeta {
            range: g.label.clone(),
            instances: g.instances,
            medians: Algorithm::ALL.iter().map(|a| (a.name(), g.median(*a))).collect(),
            win_percent: Algorithm::ALL.iter().map(|a| (a.name(), g.win_percent(*a))).collect(),
            non_converged: Algorithm::ALL.iter().map(|a| (a.name(), g.non_converged[*a as usize])).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct BenchMetadata {
    preset: &'static str,
    n: usize,
    k: usize,
    m_range: (usize, usize),
    problem_seeds_per_m: usize,
    starts_per_problem: usize,
    start_norm: f64,
    tol: f64,
    max_iter: usize,
    base_seed: u64,
    solution_range: (f64, f64),
    normal_range: (f64, f64),
    anchor: &'static str,
    stopping_rule: &'static str,
    cycp_order: &'static str,
    btm_order: &'static str,
    ties: &'static str,
    non_converged_cells: usize,
    groups: Vec<GroupMeta>,
}

/// Runs every cell, on `jobs` threads when given; output order follows the plan.
pub fn run_cells(plan: &BenchPlan, jobs: Option<usize>, verbose: bool) -> anyhow::Result<Vec<CellResult>> {
    let specs = plan.cells();
    let work = || -> fixfeas_core::Result<Vec<CellResult>> {
        specs
            .par_iter()
            .map(|c| {
                let r = plan.run(c);
                if verbose {
                    if let Ok(r) = &r {
                        eprintln!(
                            "m={} seed={} start={} {}: {} iterations{}",
                            r.m,
                            r.problem_seed,
                            r.start_index,
                            r.algorithm.name(),
                            r.iterations,
                            if r.converged { "" } else { " (max_iter)" }
                        );
                    }
                }
                r
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(1)).build()?;
    Ok(pool.install(work)?)
}

pub fn run_bench(opts: &BenchOptions) -> CliResult<BenchReport> {
    if opts.jobs == Some(0) {
        return Err(CliError::config("--jobs", "must be >= 1"));
    }
    let plan = opts.plan()?;
    prepare_dir(&opts.out)?;
    let cells = run_cells(&plan, opts.jobs, opts.verbose)?;
    let report = BenchReport::from_cells(cells, &plan.algorithms);

    let mut w = csv_writer(&out_path(&opts.out, CSV_FILE))?;
    w.write_record(["m", "group", "problem_seed", "start_index", "algorithm", "iterations", "converged"])
        .map_err(anyhow::Error::from)?;
    for c in &report.cells {
        w.write_record([
            c.m.to_string(),
            report.group_label(c.m).to_string(),
            c.problem_seed.to_string(),
            c.start_index.to_string(),
            c.algorithm.name().to_string(),
            c.iterations.to_string(),
            c.converged.to_string(),
        ])
        .map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;

    write_text(&out_path(&opts.out, TABLE_FILE), &report.markdown())?;
    let meta = BenchMetadata {
        preset: if opts.desk { "desk" } else { "full" },
        n: plan.n,
        k: plan.k,
        m_range: opts.m,
        problem_seeds_per_m: plan.seeds,
        starts_per_problem: plan.starts,
        start_norm: plan.start_norm,
        tol: plan.tol,
        max_iter: plan.max_iter,
        base_seed: plan.base_seed,
        solution_range: bench::SOLUTION_RANGE,
        normal_range: bench::NORMAL_RANGE,
        anchor: "R^k_+ x {0}",
        stopping_rule: "max_i d_{B_i}(P_A x_n) <= tol, checked after every full pass",
        cycp_order: "A, B_1, ..., B_m",
        btm_order: "DR(A,B_1), DR(B_1,B_2), ..., DR(B_m,A)",
        ties: "t tied algorithms each get 1/t of a win; max_iter cells lose and are left out of medians",
        non_converged_cells: report.cells.iter().filter(|c| !c.converged).count(),
        groups: report.groups.iter().map(GroupMeta::from).collect(),
    };
    write_json(&out_path(&opts.out, METADATA_FILE), &meta)?;
    Ok(report)
}
