//! Acceptance run: executes the shipped suites at full scale and prints one
//! PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use poslab::config::{SuiteConfig, SuiteSpec};
use poslab::report::{MarginReport, Status};
use poslab::runner::run_suite;

struct Criterion {
    label: &'static str,
    suites: &'static [&'static str],
    /// Loosest tolerance any asserted report of the criterion may use.
    max_tolerance: f64,
    /// Wall-clock limits in seconds, per suite name.
    time_limits: &'static [(&'static str, f64)],
}

const CRITERIA: [Criterion; 12] = [
    Criterion {
        label: "product bound",
        suites: &["product_bound"],
        max_tolerance: 1e-12,
        time_limits: &[("product_bound", 30.0)],
    },
    Criterion {
        label: "nef-angle inequality",
        suites: &["nef_angle"],
        max_tolerance: 1e-10,
        time_limits: &[],
    },
    Criterion {
        label: "weakly positive wedge lemma",
        suites: &["star"],
        max_tolerance: 1e-10,
        time_limits: &[],
    },
    Criterion {
        label: "combinatorial core",
        suites: &["starstar_core"],
        max_tolerance: 1e-10,
        time_limits: &[],
    },
    Criterion {
        label: "trace product",
        suites: &["trace_product"],
        max_tolerance: 1e-10,
        time_limits: &[],
    },
    Criterion {
        label: "thresholds",
        suites: &["thresholds"],
        max_tolerance: 1e-9,
        time_limits: &[],
    },
    Criterion {
        label: "chain and S_k identity",
        suites: &["chain", "sk_identity"],
        max_tolerance: 1e-10,
        time_limits: &[],
    },
    Criterion {
        label: "volume bound ordering, g and f",
        suites: &["volume", "g_f"],
        max_tolerance: 1e-6,
        time_limits: &[],
    },
    Criterion {
        label: "g-analysis constants",
        suites: &["constants"],
        max_tolerance: 1e-12,
        time_limits: &[],
    },
    Criterion {
        label: "log-concavity and Hodge-Teissier",
        suites: &["profile"],
        max_tolerance: 1e-10,
        time_limits: &[],
    },
    Criterion {
        label: "Monge-Ampere solver",
        suites: &["ma_linear", "ma_manufactured"],
        max_tolerance: 1e-7,
        time_limits: &[("ma_linear", 5.0), ("ma_manufactured", 300.0)],
    },
    Criterion {
        label: "integrated trace and fixed-point inequalities",
        suites: &["prod_traces", "fixed_point"],
        max_tolerance: 1e-6,
        time_limits: &[],
    },
];

struct Outcome {
    reports: Vec<MarginReport>,
    problems: Vec<String>,
}

fn evaluate(c: &Criterion, config: &SuiteConfig) -> Outcome {
    let mut reports = Vec::new();
    let mut problems = Vec::new();
    for &name in c.suites {
        let specs: Vec<&SuiteSpec> = config.suites.iter().filter(|s| s.name() == name).collect();
        if specs.is_empty() {
            problems.push(format!("suite {name} missing from the shipped config"));
        }
        for spec in specs {
            let start = Instant::now();
            match run_suite(spec, config.seed) {
                Ok(rs) => reports.extend(rs),
                Err(e) => problems.push(format!("{name}: {e}")),
            }
            let secs = start.elapsed().as_secs_f64();
            for &(limited, limit) in c.time_limits {
                if limited == name && secs >= limit {
                    problems.push(format!("{name} took {secs:.1} s, limit {limit} s"));
                }
            }
        }
    }
    let asserted: Vec<&MarginReport> = reports.iter().filter(|r| r.status == Status::Asserted).collect();
    if asserted.is_empty() {
        problems.push("no asserted reports".into());
    }
    for r in &asserted {
        if !r.passed() {
            problems.push(format!(
                "{} margin {:.3e} (tol {:.0e})",
                r.inequality_id, r.worst_margin, r.tolerance
            ));
        }
        if !r.strict && r.tolerance > c.max_tolerance {
            problems.push(format!(
                "{} uses tolerance {:e} above {:e}",
                r.inequality_id, r.tolerance, c.max_tolerance
            ));
        }
    }
    for r in &reports {
        if let Some(&d) = r.stats.get("equality_defect_at_ones") {
            if d > 1e-12 {
                problems.push(format!("{} equality defect {d:e} at ones", r.inequality_id));
            }
        }
    }
    Outcome { reports, problems }
}

fn main() -> ExitCode {
    // Lets `cargo test -- <filter>` runs of other targets skip this one.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let config = SuiteConfig::default_config();
    let mut failed = 0;
    for (i, c) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let out = evaluate(c, &config);
        let worst = out
            .reports
            .iter()
            .filter(|r| r.status == Status::Asserted)
            .map(|r| r.worst_margin)
            .fold(f64::INFINITY, f64::min);
        let ok = out.problems.is_empty();
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {:<48} reports {:>4}  worst margin {:>10.3e}  {:>6.1} s",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            c.label,
            out.reports.len(),
            worst,
            start.elapsed().as_secs_f64()
        );
        for p in &out.problems {
            println!("       {p}");
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
