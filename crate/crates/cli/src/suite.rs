//! Suite execution and summary reports.
//!
//! Jobs run in parallel on a rayon pool; results come back in job order and
//! are then sorted by theorem, seed, scenario and spoiler flag, so the JSON
//! report depends only on the config. Wall time appears only in the CSV
//! summary and on standard error.

use std::collections::BTreeMap;
use std::time::Instant;

use framekit::float_repr;
use framekit::frame::FrameBounds;
use framekit::instances::{check_instance, gen_instance, Scalar};
use framekit::theorems::{CheckError, CheckOptions, TheoremId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Job, SuiteConfig};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FRAMEKIT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    HypothesisFailed,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub theorem_id: TheoremId,
    pub seed: u64,
    pub scenario: String,
    pub spoiler: bool,
    pub dim: usize,
    pub scalar: Scalar,
    pub outcome: Outcome,
    /// Certified instances are expected to pass, spoilers to fail a
    /// hypothesis.
    pub expected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<FrameBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actual: Option<FrameBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margins: Option<Margins>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    #[serde(with = "float_repr")]
    pub lower: f64,
    #[serde(with = "float_repr")]
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub theorem_id: TheoremId,
    pub n_instances: usize,
    pub n_pass: usize,
    pub n_fail: usize,
    pub n_hypfail: usize,
    pub n_error: usize,
    pub n_unexpected: usize,
    /// Smallest relative lower and upper margins over certified instances;
    /// `inf` when there are none.
    #[serde(with = "float_repr")]
    pub worst_lower_margin: f64,
    #[serde(with = "float_repr")]
    pub worst_upper_margin: f64,
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub n_instances: usize,
    pub n_unexpected: usize,
    pub passed: bool,
    pub summary: Vec<SummaryRow>,
    pub results: Vec<InstanceResult>,
}

/// Worker count from `FRAMEKIT_THREADS`, or `None` for rayon's default.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Generate and check one job.
pub fn run_job(job: &Job, tol: f64) -> InstanceResult {
    let start = Instant::now();
    let spec = &job.spec;
    let opts = CheckOptions {
        tol,
        ..CheckOptions::with_seed(spec.seed)
    };
    let checked = gen_instance(spec)
        .map_err(|e| (Outcome::Error, format!("generation failed: {e}")))
        .and_then(|inst| check_instance(&inst, job.theorem, &opts).map_err(|e| (classify(&e), e.to_string())));
    let mut result = InstanceResult {
        theorem_id: job.theorem,
        seed: spec.seed,
        scenario: spec.scenario.as_str().to_owned(),
        spoiler: spec.spoiler,
        dim: spec.dim,
        scalar: spec.scalar,
        outcome: Outcome::Error,
        expected: false,
        predicted: None,
        actual: None,
        margins: None,
        detail: None,
        seconds: 0.0,
    };
    match checked {
        Ok(report) => {
            result.outcome = if report.passed { Outcome::Pass } else { Outcome::Fail };
            result.predicted = Some(report.predicted);
            result.actual = Some(report.actual);
            result.margins = Some(Margins {
                lower: report.lower_margin,
                upper: report.upper_margin,
            });
        }
        Err((outcome, detail)) => {
            result.outcome = outcome;
            result.detail = Some(detail);
        }
    }
    let wanted = if spec.spoiler { Outcome::HypothesisFailed } else { Outcome::Pass };
    result.expected = result.outcome == wanted;
    result.seconds = start.elapsed().as_secs_f64();
    result
}

fn classify(e: &CheckError) -> Outcome {
    if e.is_hypothesis_failure() {
        Outcome::HypothesisFailed
    } else {
        Outcome::Error
    }
}

/// Run every job of `config` on up to `FRAMEKIT_THREADS` workers, with
/// `tol_override` replacing all per-theorem tolerances.
pub fn run_suite(config: &SuiteConfig, seed_override: Option<u64>, tol_override: Option<f64>) -> SuiteReport {
    run_suite_on(config, seed_override, tol_override, thread_cap())
}

/// [`run_suite`] with an explicit worker count.
pub fn run_suite_on(
    config: &SuiteConfig,
    seed_override: Option<u64>,
    tol_override: Option<f64>,
    threads: Option<usize>,
) -> SuiteReport {
    let jobs = config.jobs(seed_override);
    let tol = |t| tol_override.unwrap_or_else(|| config.tolerance(t));
    let run = || -> Vec<InstanceResult> { jobs.par_iter().map(|job| run_job(job, tol(job.theorem))).collect() };
    let mut results = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    };
    results.sort_by(|x, y| {
        (x.theorem_id, x.seed, &x.scenario, x.spoiler, x.dim, x.scalar.is_complex()).cmp(&(
            y.theorem_id,
            y.seed,
            &y.scenario,
            y.spoiler,
            y.dim,
            y.scalar.is_complex(),
        ))
    });
    let summary = summarize(&results);
    let n_unexpected = summary.iter().map(|r| r.n_unexpected).sum();
    SuiteReport {
        suite: config.name.clone(),
        n_instances: results.len(),
        n_unexpected,
        passed: n_unexpected == 0,
        summary,
        results,
    }
}

pub fn summarize(results: &[InstanceResult]) -> Vec<SummaryRow> {
    let mut rows: BTreeMap<TheoremId, SummaryRow> = BTreeMap::new();
    for r in results {
        let row = rows.entry(r.theorem_id).or_insert_with(|| SummaryRow {
            theorem_id: r.theorem_id,
            n_instances: 0,
            n_pass: 0,
            n_fail: 0,
            n_hypfail: 0,
            n_error: 0,
            n_unexpected: 0,
            worst_lower_margin: f64::INFINITY,
            worst_upper_margin: f64::INFINITY,
            wall_time_s: 0.0,
        });
        row.n_instances += 1;
        match r.outcome {
            Outcome::Pass => row.n_pass += 1,
            Outcome::Fail => row.n_fail += 1,
            Outcome::HypothesisFailed => row.n_hypfail += 1,
            Outcome::Error => row.n_error += 1,
        }
        row.n_unexpected += usize::from(!r.expected);
        if let (false, Some(m)) = (r.spoiler, r.margins) {
            row.worst_lower_margin = row.worst_lower_margin.min(m.lower);
            row.worst_upper_margin = row.worst_upper_margin.min(m.upper);
        }
        row.wall_time_s += r.seconds;
    }
    rows.into_values().collect()
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }

    /// Summary table with the fixed columns
    /// `theorem_id,n_instances,n_pass,n_fail,n_hypfail,n_error,n_unexpected,worst_lower_margin,worst_upper_margin,wall_time_s`.
    pub fn to_csv(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            theorem_id: &'a str,
            n_instances: usize,
            n_pass: usize,
            n_fail: usize,
            n_hypfail: usize,
            n_error: usize,
            n_unexpected: usize,
            worst_lower_margin: f64,
            worst_upper_margin: f64,
            wall_time_s: f64,
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        for r in &self.summary {
            writer
                .serialize(Row {
                    theorem_id: r.theorem_id.as_str(),
                    n_instances: r.n_instances,
                    n_pass: r.n_pass,
                    n_fail: r.n_fail,
                    n_hypfail: r.n_hypfail,
                    n_error: r.n_error,
                    n_unexpected: r.n_unexpected,
                    worst_lower_margin: r.worst_lower_margin,
                    worst_upper_margin: r.worst_upper_margin,
                    wall_time_s: r.wall_time_s,
                })
                .expect("in-memory csv");
        }
        String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    /// One line per theorem for standard error.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for r in &self.summary {
            out.push_str(&format!(
                "{:<9} {:>4} instances  pass {:>4}  fail {:>3}  hypfail {:>3}  error {:>3}  unexpected {:>3}  worst margins {:.3e} / {:.3e}  {:.2}s\n",
                r.theorem_id.as_str(),
                r.n_instances,
                r.n_pass,
                r.n_fail,
                r.n_hypfail,
                r.n_error,
                r.n_unexpected,
                r.worst_lower_margin,
                r.worst_upper_margin,
                r.wall_time_s,
            ));
        }
        out
    }
}
