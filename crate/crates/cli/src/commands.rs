//! The `gen`, `check` and `suite` commands.
//!
//! Each command writes to the given streams and returns its exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | passed |
//! | 1 | bracketing failed (or, for `suite`, any unexpected outcome) |
//! | 2 | a hypothesis or admissibility condition failed |
//! | 3 | unreadable input, parse or config error |
//! | 4 | numerical failure inside a checker |

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use framekit::instances::gen_instance;
use framekit::theorems::{CheckError, CheckOptions, TheoremId, TheoremReport};
use serde::Serialize;

use crate::config::{self, Format, SuiteConfig};
use crate::instance_file::InstanceFile;
use crate::suite;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub struct Streams<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

fn fail(streams: &mut Streams, code: i32, message: impl std::fmt::Display) -> i32 {
    let _ = writeln!(streams.err, "error: {message}");
    code
}

fn emit(streams: &mut Streams, out: Option<&Path>, text: &str) -> i32 {
    match out {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => EXIT_PASS,
            Err(e) => fail(streams, EXIT_INPUT, format!("{}: {e}", path.display())),
        },
        None => match streams.out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_PASS,
            Err(e) => fail(streams, EXIT_INPUT, e),
        },
    }
}

/// File name of a generated instance.
pub fn instance_file_name(spec: &framekit::instances::GenSpec) -> String {
    let spoiler = if spec.spoiler { "-spoiler" } else { "" };
    format!(
        "{}-{}-d{}-s{}{spoiler}.json",
        spec.scenario.as_str(),
        if spec.scalar.is_complex() { "complex" } else { "real" },
        spec.dim,
        spec.seed
    )
}

/// Generate every instance of a suite config (or a single spec) into `out`.
pub fn cmd_gen(config_path: &Path, seed: Option<u64>, out: Option<&Path>, streams: &mut Streams) -> i32 {
    let config = match config::read_text(config_path).and_then(|text| config::parse_gen_config(&text)) {
        Ok(c) => c,
        Err(e) => return fail(streams, EXIT_INPUT, e),
    };
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return fail(streams, EXIT_INPUT, format!("{}: {e}", dir.display()));
    }
    let mut specs: Vec<_> = config.jobs(seed).into_iter().map(|job| job.spec).collect();
    specs.dedup();
    for spec in specs {
        let inst = match gen_instance(&spec) {
            Ok(inst) => inst,
            Err(e) => return fail(streams, EXIT_INPUT, format!("seed {}: {e}", spec.seed)),
        };
        let path = dir.join(instance_file_name(&spec));
        if let Err(e) = std::fs::write(&path, InstanceFile::from_instance(&inst).to_json()) {
            return fail(streams, EXIT_INPUT, format!("{}: {e}", path.display()));
        }
        let _ = writeln!(streams.out, "{}", path.display());
    }
    EXIT_PASS
}

pub struct CheckArgs<'a> {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub format: Format,
    pub out: Option<&'a Path>,
}

#[derive(Serialize)]
struct CheckFailure<'a> {
    theorem_id: TheoremId,
    outcome: &'a str,
    message: String,
}

#[derive(Serialize)]
struct CheckRow {
    theorem_id: &'static str,
    seed: Option<u64>,
    passed: bool,
    predicted_lower: f64,
    predicted_upper: f64,
    actual_lower: f64,
    actual_upper: f64,
    lower_margin: f64,
    upper_margin: f64,
}

fn report_text(report: &TheoremReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
            text.push('\n');
            text
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer
                .serialize(CheckRow {
                    theorem_id: report.theorem_id.as_str(),
                    seed: report.seed,
                    passed: report.passed,
                    predicted_lower: report.predicted.lower,
                    predicted_upper: report.predicted.upper,
                    actual_lower: report.actual.lower,
                    actual_upper: report.actual.upper,
                    lower_margin: report.lower_margin,
                    upper_margin: report.upper_margin,
                })
                .expect("in-memory csv");
            String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("csv is utf-8")
        }
    }
}

/// Check one instance file against one theorem.
pub fn cmd_check(file: &Path, theorem: &str, args: &CheckArgs, streams: &mut Streams) -> i32 {
    let Some(theorem) = TheoremId::parse(theorem) else {
        let known: Vec<_> = TheoremId::ALL.iter().map(|t| t.as_str()).collect();
        return fail(
            streams,
            EXIT_INPUT,
            format!("unknown theorem `{theorem}` (expected one of {})", known.join(", ")),
        );
    };
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return fail(streams, EXIT_INPUT, "--tol must be positive");
        }
    }
    let parsed = InstanceFile::read(file).and_then(|f| Ok((f.meta.seed, f.to_instance()?)));
    let (file_seed, inst) = match parsed {
        Ok(p) => p,
        Err(e) => return fail(streams, EXIT_INPUT, format!("{}: {e}", file.display())),
    };
    let mut opts = CheckOptions::with_seed(args.seed.or(file_seed).unwrap_or(0));
    if let Some(tol) = args.tol {
        opts.tol = tol;
    }
    match framekit::instances::check_instance(&inst, theorem, &opts) {
        Ok(report) => {
            let code = emit(streams, args.out, &report_text(&report, args.format));
            if code != EXIT_PASS {
                code
            } else if report.passed {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let (outcome, code) = match &e {
                e if e.is_hypothesis_failure() => ("hypothesis_failed", EXIT_HYPOTHESIS),
                CheckError::InvalidInput { .. } => ("invalid_input", EXIT_INPUT),
                _ => ("numerical_error", EXIT_NUMERICAL),
            };
            let failure = CheckFailure {
                theorem_id: theorem,
                outcome,
                message: e.to_string(),
            };
            let mut text = serde_json::to_string_pretty(&failure).expect("failures serialize");
            text.push('\n');
            let _ = streams.out.write_all(text.as_bytes());
            let _ = writeln!(streams.err, "{e}");
            code
        }
    }
}

pub struct SuiteArgs<'a> {
    pub config: Option<&'a Path>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<&'a Path>,
}

/// Run a suite (the built-in one without `--config`) and write its report.
pub fn cmd_suite(args: &SuiteArgs, streams: &mut Streams) -> i32 {
    let config = match args.config {
        Some(path) => match SuiteConfig::read(path) {
            Ok(c) => c,
            Err(e) => return fail(streams, EXIT_INPUT, e),
        },
        None => SuiteConfig::default_suite(),
    };
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return fail(streams, EXIT_INPUT, "--tol must be positive");
        }
    }
    let start = Instant::now();
    let report = suite::run_suite(&config, args.seed, args.tol);
    let elapsed = start.elapsed().as_secs_f64();
    let text = match args.format.or(config.format).unwrap_or_default() {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    let out = args.out.map(Path::to_path_buf).or_else(|| config.output.clone());
    let code = emit(streams, out.as_deref(), &text);
    let _ = write!(streams.err, "{}", report.describe());
    let _ = writeln!(
        streams.err,
        "{}: {} instances, {} unexpected, {elapsed:.2}s wall",
        report.suite, report.n_instances, report.n_unexpected
    );
    if code != EXIT_PASS {
        code
    } else if report.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
