//! Suite orchestration and report files.
//!
//! `report.json` is a pure function of the config: wall-clock fields are
//! zeroed there and collected in `metadata.json` instead.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{bound_report, close_threshold_conjecture_check, write_bound_csv, BoundError, BoundReport};
use crate::config::{ModelKind, ModelSpec, SuiteConfig, SuiteSpec};
use crate::inequalities::{self as lab, LabError};
use crate::models::{ClassModel, ModelError, SplitP1Model, TorusModel};
use crate::report::{write_csv, MarginReport, Status};
use crate::suites;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("suite {suite}: {source}")]
    Lab { suite: String, source: LabError },
    #[error("model {model}: {source}")]
    Model { model: String, source: ModelError },
    #[error("pair {pair}: {source}")]
    Bound { pair: String, source: BoundError },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// Exit statuses of a run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Reports of one suite with its wall-clock time.
#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub suite: String,
    pub reports: Vec<MarginReport>,
    pub elapsed: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub seed: u64,
    pub suites: Vec<SuiteOutcome>,
    pub bounds: Vec<(String, BoundReport)>,
    pub elapsed: f64,
    pub threads: usize,
}

impl RunOutcome {
    pub fn reports(&self) -> impl Iterator<Item = &MarginReport> {
        self.suites.iter().flat_map(|s| s.reports.iter())
    }

    pub fn violations(&self) -> Vec<&MarginReport> {
        self.reports().filter(|r| !r.passed()).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.violations().is_empty() {
            EXIT_OK
        } else {
            EXIT_VIOLATION
        }
    }
}

fn lab<T>(suite: &str, r: Result<T, LabError>) -> Result<T, RunError> {
    r.map_err(|source| RunError::Lab {
        suite: suite.to_string(),
        source,
    })
}

fn per_model<T, S>(
    kinds: &[ModelKind],
    dims: impl Iterator<Item = usize> + Clone,
    torus: T,
    split: S,
) -> Result<Vec<MarginReport>, RunError>
where
    T: Fn(&TorusModel) -> Vec<MarginReport>,
    S: Fn(&SplitP1Model) -> Vec<MarginReport>,
{
    let mut out = Vec::new();
    for kind in kinds {
        for n in dims.clone() {
            let wrap = |source| RunError::Model {
                model: format!("{kind:?} n = {n}"),
                source,
            };
            match kind {
                ModelKind::Torus => out.extend(torus(&TorusModel::new(n).map_err(wrap)?)),
                ModelKind::SplitP1 => out.extend(split(&SplitP1Model::new(n).map_err(wrap)?)),
            }
        }
    }
    Ok(out)
}

/// Runs one suite. Report seeds derive from `seed` and the report id; the
/// Monge-Ampere suites use their own instance seeds.
pub fn run_suite(spec: &SuiteSpec, seed: u64) -> Result<Vec<MarginReport>, RunError> {
    use SuiteSpec::*;
    let name = spec.name();
    let name = name.as_str();
    let mut out = Vec::new();
    match spec {
        ProductBound {
            dims,
            grid_step,
            trials,
        } => {
            for &n in dims {
                out.push(lab(name, lab::verify_product_bound(n, *grid_step, *trials, seed))?);
            }
        }
        NefAngle {
            max_n,
            grid_step,
            trials,
            explicit_step,
        } => {
            for n in 1..=*max_n {
                for k in 0..=n {
                    out.push(lab(name, lab::verify_nef_angle(n, k, *grid_step, *trials, seed))?);
                }
            }
            out.push(lab(name, lab::verify_nef_angle_n3k1(*explicit_step))?);
        }
        Star { max_n, spectra, forms } => {
            for n in 1..=*max_n {
                for p in 1..=n {
                    out.push(lab(name, lab::verify_star(n, p, *spectra, *forms, seed))?);
                    out.push(lab(name, lab::verify_star_bis(n, p, *spectra, *forms, seed))?);
                }
            }
        }
        StarstarCore { max_n, trials } => {
            for n in 2..=*max_n {
                for p in 1..n {
                    out.push(lab(name, lab::verify_starstar_core(n, p, *trials, seed))?);
                }
            }
        }
        Starstar { max_n, trials } => {
            for n in 2..=*max_n {
                for p in 1..n {
                    for k in 0..=n - p {
                        out.push(lab(name, lab::verify_starstar(n, p, k, *trials, seed))?);
                    }
                }
            }
        }
        TraceProduct { max_n, trials } => {
            for n in 1..=*max_n {
                out.push(lab(name, lab::verify_trace_product(n, *trials, seed))?);
            }
        }
        TraceProductImproved { dims, trials, assert } => {
            for &n in dims {
                out.push(lab(
                    name,
                    lab::verify_trace_product_improved(n, *trials, seed, *assert),
                )?);
            }
        }
        Thresholds { max_n, trials, models } => {
            out = per_model(
                models,
                1..=*max_n,
                |m| suites::threshold_suite(m, *trials, seed),
                |m| suites::threshold_suite(m, *trials, seed),
            )?;
        }
        Profile { max_n, trials, models } => {
            out = per_model(
                models,
                1..=*max_n,
                |m| suites::hodge_teissier_suite(m, *trials, seed),
                |m| suites::hodge_teissier_suite(m, *trials, seed),
            )?;
        }
        Volume { max_n, trials, models } => {
            out = per_model(
                models,
                2..=*max_n,
                |m| {
                    let mut v = suites::volume_ordering_suite(m, *trials, seed);
                    v.push(suites::close_threshold_suite(m, *trials, seed));
                    v
                },
                |m| {
                    let mut v = suites::volume_ordering_suite(m, *trials, seed);
                    v.push(suites::close_threshold_suite(m, *trials, seed));
                    v
                },
            )?;
        }
        Chain { max_n, trials, models } => {
            out = per_model(
                models,
                1..=*max_n,
                |m| {
                    vec![
                        suites::chain_suite(m, *trials, seed),
                        suites::chain_form_suite(m.dim(), *trials, seed),
                        suites::power_diff_rhs_suite(m, *trials, seed),
                    ]
                },
                |m| {
                    vec![
                        suites::chain_suite(m, *trials, seed),
                        suites::power_diff_rhs_suite(m, *trials, seed),
                    ]
                },
            )?;
        }
        SkIdentity { max_n, trials } => out.push(suites::s_k_identity_suite(*max_n, *trials, seed)),
        GF { max_n, trials } => out = suites::g_f_suite(*max_n, *trials, seed),
        Constants { max_n, trials } => out = suites::constants_suite(*max_n, *trials, seed),
        MaLinear { size, instance } => out.push(suites::ma_linear_report(*size, *instance)),
        MaManufactured { size, instance } => out = suites::ma_manufactured_reports(*size, *instance),
        ProdTraces {
            size,
            instances,
            instance,
        } => out.push(suites::prod_traces_report(*instances, *size, *instance)),
        FixedPoint {
            size,
            epsilons,
            iters,
            instance,
        } => out = suites::fixed_point_reports(*size, epsilons, *iters, *instance),
    }
    Ok(out)
}

fn explicit_pair(spec: &ModelSpec) -> Result<(BoundReport, MarginReport), RunError> {
    let name = spec.name().to_string();
    let bound = |e: BoundError| RunError::Bound {
        pair: name.clone(),
        source: e,
    };
    let model_err = |e: ModelError| RunError::Model {
        model: name.clone(),
        source: e,
    };
    let (report, check) = match spec {
        ModelSpec::Torus { alpha, beta, .. } => {
            // Validated at load.
            let a = alpha.to_hmatrix().expect("validated matrix");
            let b = beta.to_hmatrix().expect("validated matrix");
            let model = TorusModel::new(a.nrows()).map_err(model_err)?;
            (
                bound_report(&model, &a, &b).map_err(bound)?,
                close_threshold_conjecture_check(&model, &a, &b).map_err(bound)?,
            )
        }
        ModelSpec::SplitP1 { alpha, beta, .. } => {
            let model = SplitP1Model::new(alpha.len()).map_err(model_err)?;
            (
                bound_report(&model, alpha, beta).map_err(bound)?,
                close_threshold_conjecture_check(&model, alpha, beta).map_err(bound)?,
            )
        }
    };
    let mut check = check;
    check.inequality_id = format!("{}.{}", check.inequality_id, name);
    Ok((report, check))
}

fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Runs every suite of `config`, concurrently when `parallel` is set. Suite
/// outcomes are ordered by suite name either way.
pub fn run(config: &SuiteConfig, parallel: bool) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let one = |spec: &SuiteSpec| -> Result<SuiteOutcome, RunError> {
        let t = Instant::now();
        let mut reports = run_suite(spec, config.seed)?;
        if let Some(tol) = config.tolerance {
            for r in reports.iter_mut().filter(|r| r.status == Status::Asserted && !r.strict) {
                r.tolerance = tol;
                r.tolerance_source = "config override".into();
            }
        }
        Ok(SuiteOutcome {
            suite: spec.name(),
            reports,
            elapsed: t.elapsed().as_secs_f64(),
        })
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<SuiteOutcome, RunError>> = if parallel {
        use rayon::prelude::*;
        config.suites.par_iter().map(one).collect()
    } else {
        config.suites.iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<SuiteOutcome, RunError>> = {
        let _ = parallel;
        config.suites.iter().map(one).collect()
    };
    let mut suites = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut bounds = Vec::new();
    if !config.models.is_empty() {
        let t = Instant::now();
        let mut checks = Vec::new();
        for spec in &config.models {
            let (report, check) = explicit_pair(spec)?;
            bounds.push((spec.name().to_string(), report));
            checks.push(check);
        }
        suites.push(SuiteOutcome {
            suite: "pairs".into(),
            reports: checks,
            elapsed: t.elapsed().as_secs_f64(),
        });
    }
    suites.sort_by(|a, b| a.suite.cmp(&b.suite));
    Ok(RunOutcome {
        seed: config.seed,
        suites,
        bounds,
        elapsed: start.elapsed().as_secs_f64(),
        threads: threads(),
    })
}

#[derive(Serialize)]
struct BoundEntry<'a> {
    instance: &'a str,
    #[serde(flatten)]
    report: &'a BoundReport,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    schema: u32,
    seed: u64,
    passed: bool,
    asserted: usize,
    violations: Vec<&'a str>,
    reports: Vec<MarginReport>,
    bounds: Vec<BoundEntry<'a>>,
}

#[derive(Serialize)]
struct MetadataFile<'a> {
    schema: u32,
    version: &'a str,
    unix_time: u64,
    threads: usize,
    elapsed: f64,
    suite_elapsed: BTreeMap<&'a str, f64>,
    report_elapsed: BTreeMap<&'a str, f64>,
}

/// The deterministic JSON report.
pub fn report_json(outcome: &RunOutcome) -> String {
    let file = ReportFile {
        schema: SCHEMA_VERSION,
        seed: outcome.seed,
        passed: outcome.exit_code() == EXIT_OK,
        asserted: outcome.reports().filter(|r| r.status == Status::Asserted).count(),
        violations: outcome.violations().iter().map(|r| r.inequality_id.as_str()).collect(),
        reports: outcome.reports().map(MarginReport::deterministic).collect(),
        bounds: outcome
            .bounds
            .iter()
            .map(|(n, r)| BoundEntry { instance: n, report: r })
            .collect(),
    };
    // Non-finite margins (NaN for failures, inf for vacuous scans) become null.
    serde_json::to_string_pretty(&file).expect("report serializes")
}

pub fn metadata_json(outcome: &RunOutcome) -> String {
    let file = MetadataFile {
        schema: SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        unix_time: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        threads: outcome.threads,
        elapsed: outcome.elapsed,
        suite_elapsed: outcome.suites.iter().map(|s| (s.suite.as_str(), s.elapsed)).collect(),
        report_elapsed: outcome
            .reports()
            .map(|r| (r.inequality_id.as_str(), r.elapsed))
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("metadata serializes")
}

/// Writes `report.json` and `metadata.json` and/or `margins.csv` and
/// `bounds.csv` into `dir`; returns the written paths.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path, json: bool, csv: bool) -> Result<Vec<PathBuf>, RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Write { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    if json {
        for (name, text) in [
            ("report.json", report_json(outcome)),
            ("metadata.json", metadata_json(outcome)),
        ] {
            let path = dir.join(name);
            fs::write(&path, text + "\n").map_err(io(&path))?;
            written.push(path);
        }
    }
    if csv {
        let path = dir.join("margins.csv");
        let f = File::create(&path).map_err(io(&path))?;
        let reports: Vec<MarginReport> = outcome.reports().cloned().collect();
        write_csv(&reports, BufWriter::new(f)).map_err(|source| RunError::Csv {
            path: path.clone(),
            source,
        })?;
        written.push(path);
        let path = dir.join("bounds.csv");
        let f = File::create(&path).map_err(io(&path))?;
        write_bound_csv(&outcome.bounds, BufWriter::new(f)).map_err(|source| RunError::Csv {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
