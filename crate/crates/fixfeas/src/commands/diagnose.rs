//! `diagnose`: sampled regularity constants and inequality checks for one
//! operator (and optionally a set family), written as a JSON report.

use std::path::PathBuf;

use fixfeas_core::diagnostics::{
    averaged_inequality_violation, check_angle_condition, check_transversality_bound, estimate_family_mu,
    estimate_kappa, key_constants, sigma_of, verify_key_inequalities, DrPair, IntersectionOracle,
};
use fixfeas_core::{sampling, Error, FixedPointMap, Vector};
use serde::Serialize;

use crate::config::{dr_with_oracle, load, DiagnoseFile, SetTable};
use crate::error::at;
use crate::output::{out_path, prepare_dir, write_json};
use crate::{CliError, CliResult};

pub const REPORT_FILE: &str = "diagnose.json";
/// Slack allowed on every sampled inequality.
pub const VIOLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct DiagnoseOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub rho: Option<f64>,
    pub samples: Option<usize>,
    pub surrogate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub check: &'static str,
    pub max_violation: f64,
    pub samples: usize,
    pub passed: bool,
}

impl Violation {
    fn new(check: &'static str, max_violation: f64, samples: usize) -> Self {
        Violation {
            check,
            max_violation,
            samples,
            passed: max_violation <= VIOLATION_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalitySummary {
    pub theta_hat: f64,
    pub min_ratio: f64,
    pub delta: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnoseReport {
    pub operator: Option<String>,
    pub rho: f64,
    pub samples: usize,
    pub seed: u64,
    /// `null` when the operator has no Fix-distance oracle or regularity fails.
    pub kappa_hat: Option<f64>,
    pub kappa_argmax: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub mu_hat: Option<f64>,
    /// Largest sampled cosine in the angle condition.
    pub theta_hat: Option<f64>,
    pub angle_kappa_bound: Option<f64>,
    pub transversality: Option<TransversalitySummary>,
    pub surrogate: bool,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

pub fn diagnose(opts: &DiagnoseOptions) -> CliResult<DiagnoseReport> {
    let file: DiagnoseFile = load(&opts.config)?;
    let report = evaluate(&file, opts)?;
    prepare_dir(&opts.out)?;
    write_json(&out_path(&opts.out, REPORT_FILE), &report)?;
    Ok(report)
}

fn operator_of(file: &DiagnoseFile, sets: &SetTable) -> CliResult<Option<FixedPointMap>> {
    match (&file.operator, &file.pair) {
        (Some(_), Some(_)) => Err(CliError::config("pair", "give either `operator` or `pair`, not both")),
        (Some(op), None) => sets.build_op(op, "operator").map(Some),
        (None, Some(p)) => dr_with_oracle(sets.get(&p.a, "pair.a")?, sets.get(&p.b, "pair.b")?, "pair").map(Some),
        (None, None) => Ok(None),
    }
}

pub fn evaluate(file: &DiagnoseFile, opts: &DiagnoseOptions) -> CliResult<DiagnoseReport> {
    let rho = opts.rho.or(file.rho).unwrap_or(1.0);
    if !(rho > 0.0) {
        return Err(CliError::config("rho", "must be > 0"));
    }
    let n = opts.samples.or(file.samples).unwrap_or(10_000);
    if n == 0 {
        return Err(CliError::config("samples", "must be >= 1"));
    }
    let seed = opts.seed.or(file.seed).unwrap_or(0);
    let sets = SetTable::build(&file.sets)?;
    let op = operator_of(file, &sets)?;
    if op.is_none() && file.family.is_none() {
        return Err(CliError::config("operator", "nothing to diagnose: give `operator`, `pair` or `family`"));
    }

    let mut r = DiagnoseReport {
        operator: op.as_ref().map(|t| t.label().to_string()),
        rho,
        samples: n,
        seed,
        kappa_hat: None,
        kappa_argmax: None,
        sigma: None,
        alpha: None,
        beta: None,
        gamma: None,
        mu_hat: None,
        theta_hat: None,
        angle_kappa_bound: None,
        transversality: None,
        surrogate: false,
        violations: Vec::new(),
        notes: Vec::new(),
    };

    if let Some(t) = &op {
        operator_checks(t, &mut r, rho, n, seed)?;
    }
    if let (Some(p), Some(spec)) = (&file.pair, &file.transversality) {
        let pair = DrPair::new(sets.get(&p.a, "pair.a")?.clone(), sets.get(&p.b, "pair.b")?.clone())
            .map_err(at("pair"))?;
        let center = Vector::from(spec.center.as_slice());
        let rep = check_transversality_bound(&pair, &center, spec.delta, spec.theta, n, sampling::derive_seed(seed, 4))
            .map_err(at("transversality"))?;
        r.violations.push(Violation::new("transversality", rep.max_violation, rep.samples));
        r.transversality = Some(TransversalitySummary {
            theta_hat: rep.theta_hat,
            min_ratio: rep.min_ratio,
            delta: spec.delta,
            samples: rep.samples,
        });
    } else if file.transversality.is_some() {
        return Err(CliError::config("transversality", "needs a `pair`"));
    }
    if let Some(names) = &file.family {
        let family = sets.many(names, "family")?;
        let oracle = if opts.surrogate {
            IntersectionOracle::with_surrogate(&family)
        } else {
            IntersectionOracle::exact(&family)
        };
        let oracle = oracle.map_err(|e| match e {
            Error::NotAffine => CliError::config("family", "exact intersection needs affine sets; pass --surrogate"),
            e => at("family")(e),
        })?;
        r.surrogate = oracle.is_surrogate();
        if r.surrogate {
            r.notes.push("mu_hat uses the Dykstra surrogate intersection oracle".into());
        }
        match estimate_family_mu(&family, &oracle, rho, n, sampling::derive_seed(seed, 5)) {
            Ok(est) => r.mu_hat = Some(est.mu_hat),
            Err(Error::AllSamplesFeasible) => r.notes.push("every sample lies in every set; mu_hat undefined".into()),
            Err(e) => return Err(at("family")(e)),
        }
    }
    Ok(r)
}

fn operator_checks(t: &FixedPointMap, r: &mut DiagnoseReport, rho: f64, n: usize, seed: u64) -> CliResult<()> {
    r.sigma = sigma_of(t).ok();
    if r.sigma.is_none() {
        r.notes.push("operator has no averagedness constant; sigma checks skipped".into());
    }
    if t.has_fix_distance() {
        let est = estimate_kappa(t, rho, n, sampling::derive_seed(seed, 1)).map_err(at("operator"))?;
        if let Some(v) = &est.violation {
            r.notes.push(format!("zero residual with positive Fix distance at {:?}", v.as_slice()));
        } else {
            r.kappa_hat = Some(est.kappa_hat);
        }
        r.kappa_argmax = est.argmax.map(|x| x.as_slice().to_vec());
    } else {
        r.notes.push("operator has no Fix-distance oracle; kappa_hat not estimated".into());
    }

    if let Some(sigma) = r.sigma {
        if t.has_fix_projector() {
            let xs = sampling::ball_samples(t.dim(), rho, n, sampling::derive_seed(seed, 2));
            let ys = sampling::ball_samples(t.dim(), rho, n, sampling::derive_seed(seed, 3));
            let mut pairs = Vec::with_capacity(n);
            for (x, y) in xs.into_iter().zip(&ys) {
                let z = t.fix_point(y).map_err(at("operator"))?.expect("fix projector");
                pairs.push((x, z));
            }
            let v = averaged_inequality_violation(t, sigma, &pairs).map_err(at("operator"))?;
            r.violations.push(Violation::new("sigma_inequality", v, n));
        }
        if let Some(kappa) = r.kappa_hat.filter(|k| *k > 0.0) {
            let c = key_constants(kappa, sigma).map_err(at("operator"))?;
            (r.alpha, r.beta, r.gamma) = (Some(c.alpha), Some(c.beta), Some(c.gamma));
            let fd = |x: &Vector| t.fix_distance(x).ok().flatten().unwrap_or(0.0);
            let rep = verify_key_inequalities(t, fd, &c, rho, n, sampling::derive_seed(seed, 6)).map_err(at("operator"))?;
            r.violations.push(Violation::new("key1", rep.key1, rep.samples));
            r.violations.push(Violation::new("key2_lower", rep.key2_lower, rep.samples));
            r.violations.push(Violation::new("key2_upper", rep.key2_upper, rep.samples));
            r.violations.push(Violation::new("key3", rep.key3, rep.samples));
        }
    }
    if t.has_fix_projector() {
        let a = check_angle_condition(t, rho, n, sampling::derive_seed(seed, 7)).map_err(at("operator"))?;
        r.theta_hat = Some(a.theta_hat);
        r.angle_kappa_bound = a.kappa_bound.is_finite().then_some(a.kappa_bound);
    }
    Ok(())
}
