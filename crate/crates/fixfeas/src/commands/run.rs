//! `run`: iterate an operator pipeline from a JSON config and write its trace.

use std::path::{Path, PathBuf};

use fixfeas_core::engine::{estimate_rate_from_series, run_quasi_cyclic, run_random, RunConfig, RunTrace, StoppingRule};
use fixfeas_core::Vector;
use serde::Serialize;

use crate::config::{load, RunFile, SetTable, StopSpec};
use crate::error::at;
use crate::output::{csv_writer, num, out_path, prepare_dir, write_json};
use crate::{CliError, CliResult};

pub const TRACE_FILE: &str = "trace.csv";
pub const ITERATES_FILE: &str = "iterates.csv";
pub const METADATA_FILE: &str = "run_metadata.json";
const DEFAULT_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSummary {
    pub alpha: f64,
    pub r2: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub config: String,
    pub driver: &'static str,
    pub schedule: &'static str,
    pub mode: String,
    pub seed: u64,
    pub max_iter: usize,
    pub stop_rule: String,
    pub stop_reason: &'static str,
    pub converged: bool,
    pub iterations_used: usize,
    pub final_iterate: Vec<f64>,
    pub final_residual: Option<f64>,
    pub max_fejer_violation: f64,
    pub fejer_self_anchored: bool,
    pub iterate_stride: usize,
    /// Geometric fit of the residual series.
    pub residual_rate: Option<RateSummary>,
    pub outputs: Vec<String>,
}

/// Builds the run described by `file`, applying CLI overrides.
pub fn build_config(file: &RunFile, opts: &RunOptions) -> CliResult<RunConfig> {
    let sets = SetTable::build(&file.sets)?;
    let maps = sets.build_ops(&file.operators, "operators")?;
    if maps.is_empty() {
        return Err(CliError::config("operators", "at least one operator is required"));
    }
    let seed = opts.seed.or(file.seed).unwrap_or(0);
    let schedule = file.schedule.build(maps.len(), seed)?;
    let max_iter = opts.max_iter.or(file.max_iter).unwrap_or(DEFAULT_MAX_ITER);
    if max_iter == 0 {
        return Err(CliError::config("max_iter", "must be >= 1"));
    }
    let start = Vector::from(file.start.as_slice());
    let mut cfg = RunConfig::new(maps, schedule, start)
        .mode(file.mode.into())
        .max_iter(max_iter)
        .stop(StopSpec::build(file.stop.as_ref(), opts.tol)?);
    for (i, p) in file.probes.iter().enumerate() {
        cfg = cfg.probe(sets.build_probe(p, &format!("probes[{i}]"))?);
    }
    for a in &file.anchors {
        cfg = cfg.anchor(Vector::from(a.as_slice()));
    }
    Ok(cfg)
}

fn field_of(e: &fixfeas_core::Error) -> &'static str {
    use fixfeas_core::Error::*;
    match e {
        DimensionMismatch { .. } => "start",
        ScheduleRejected(_) => "schedule",
        UnknownProbe(_) => "stop.probe",
        InvalidParameter { name, .. } => name,
        _ => "config",
    }
}

pub fn execute(cfg: &RunConfig, random: bool) -> CliResult<RunTrace> {
    let res = if random { run_random(cfg) } else { run_quasi_cyclic(cfg) };
    res.map_err(|e| at(field_of(&e))(e))
}

pub fn run(opts: &RunOptions) -> CliResult<RunMetadata> {
    let file: RunFile = load(&opts.config)?;
    let cfg = build_config(&file, opts)?;
    prepare_dir(&opts.out)?;
    let random = file.schedule.is_random();
    let trace = execute(&cfg, random)?;

    write_trace(&out_path(&opts.out, TRACE_FILE), &trace)?;
    let mut outputs = vec![TRACE_FILE.to_string()];
    if file.write_iterates {
        write_iterates(&out_path(&opts.out, ITERATES_FILE), &trace)?;
        outputs.push(ITERATES_FILE.to_string());
    }
    outputs.push(METADATA_FILE.to_string());

    let series: Vec<(usize, f64)> = trace.residuals.iter().cloned().enumerate().collect();
    let meta = RunMetadata {
        config: opts.config.display().to_string(),
        driver: if random { "random" } else { "quasi_cyclic" },
        schedule: cfg.schedule.name(),
        mode: format!("{:?}", cfg.mode),
        seed: cfg.schedule.seed().or(opts.seed).or(file.seed).unwrap_or(0),
        max_iter: cfg.max_iter,
        stop_rule: describe_stop(&cfg.stop),
        stop_reason: trace.stop_reason.name(),
        converged: trace.converged(),
        iterations_used: trace.iterations_used,
        final_iterate: trace.final_iterate.as_slice().to_vec(),
        final_residual: trace.residuals.last().copied(),
        max_fejer_violation: trace.max_fejer_violation(),
        fejer_self_anchored: trace.fejer_self_anchored,
        iterate_stride: trace.stride,
        residual_rate: estimate_rate_from_series(&series).ok().map(|r| RateSummary {
            alpha: r.alpha,
            r2: r.r2,
            samples: r.samples,
        }),
        outputs,
    };
    write_json(&out_path(&opts.out, METADATA_FILE), &meta)?;
    Ok(meta)
}

fn describe_stop(s: &StoppingRule) -> String {
    match s {
        StoppingRule::ResidualBelow { tol } => format!("residual <= {tol:?}"),
        StoppingRule::ProbeBelow { label, tol } => format!("{label} <= {tol:?}"),
        StoppingRule::MaxIterOnly => "max_iter".into(),
    }
}

/// One row per iterate `n`: the step residual `||x_{n+1} - x_n||`, each probe
/// at `x_n`, and the Fejér violation of step `n` (blank past the last step).
pub fn write_trace(path: &Path, trace: &RunTrace) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["iter".to_string(), "residual".to_string()];
    header.extend(trace.probe_labels.iter().map(|l| format!("probe_{l}")));
    header.push("fejer_violation".into());
    w.write_record(&header)?;
    // self-anchored violations of a thinned trace are per stored window, not per step
    let per_step = trace.fejer_violation.len() == trace.residuals.len();
    for n in 0..=trace.iterations_used {
        let mut row = vec![n.to_string(), trace.residuals.get(n).map_or(String::new(), |r| num(*r))];
        row.extend(trace.probe_values.iter().map(|v| v.get(n).map_or(String::new(), |x| num(*x))));
        row.push(if per_step {
            trace.fejer_violation.get(n).map_or(String::new(), |v| num(*v))
        } else {
            String::new()
        });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_iterates(path: &Path, trace: &RunTrace) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    let dim = trace.final_iterate.dim();
    let mut header = vec!["iter".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (n, x) in &trace.iterates {
        let mut row = vec![n.to_string()];
        row.extend(x.iter().map(|v| num(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
