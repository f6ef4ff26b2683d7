//! Suite configuration.
//!
//! A suite is a list of entries, each a theorem plus a [`GenSpec`] template
//! expanded into `count` instances. Instance `i` of an entry uses seed
//! `spec.seed + i` and sweeps the dimension, member count and subspace size
//! through the entry's ranges, so a compact config covers a grid of shapes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use framekit::instances::{scenarios_for, GenSpec, Scalar, Scenario, MAX_DIM, MIN_DIM};
use framekit::theorems::{TheoremId, DEFAULT_TOL};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Seed of the built-in suite.
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_INSTANCES_PER_THEOREM: usize = 200;
pub const DEFAULT_SPOILERS_PER_SCENARIO: usize = 8;
pub const DEFAULT_DIMS: [usize; 2] = [2, 16];
/// Stride between entry seeds when `--seed` overrides a config.
pub const SEED_STRIDE: u64 = 1 << 32;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Real,
    Complex,
    /// Alternate real and complex, starting with real.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub theorem: TheoremId,
    #[serde(default = "one")]
    pub count: usize,
    /// Inclusive dimension range swept by the entry; defaults to `spec.dim`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar_mode: Option<ScalarMode>,
    pub spec: GenSpec,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub name: String,
    pub entries: Vec<SuiteEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<TheoremId, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// One instance to generate and check.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub theorem: TheoremId,
    pub spec: GenSpec,
}

impl SuiteEntry {
    fn expand(&self, seed: u64) -> impl Iterator<Item = GenSpec> + '_ {
        let [lo, hi] = self.dims.unwrap_or([self.spec.dim, self.spec.dim]);
        let sweep = self.dims.is_some();
        (0..self.count).map(move |i| {
            let mut spec = self.spec.clone();
            spec.seed = seed.wrapping_add(i as u64);
            if sweep {
                spec.dim = lo + i % (hi - lo + 1);
                spec.n_members = spec.dim + i % 3;
                spec.max_subspace_dim = 1 + (i / 3) % self.spec.max_subspace_dim.min(spec.dim);
            }
            spec.scalar = match self.scalar_mode {
                None => spec.scalar,
                Some(ScalarMode::Real) => Scalar::Real,
                Some(ScalarMode::Complex) => Scalar::Complex,
                Some(ScalarMode::Mixed) if i % 2 == 0 => Scalar::Real,
                Some(ScalarMode::Mixed) => Scalar::Complex,
            };
            spec
        })
    }
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&read_text(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.entries.is_empty() {
            return Err(invalid("entries", "at least one entry is required"));
        }
        for (theorem, &tol) in &self.tolerances {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(invalid(format!("tolerances.{theorem}"), "must be positive and finite"));
            }
        }
        for (i, entry) in self.entries.iter().enumerate() {
            if entry.count == 0 {
                return Err(invalid(format!("entries[{i}].count"), "must be at least 1"));
            }
            if let Some([lo, hi]) = entry.dims {
                if lo > hi || lo < MIN_DIM || hi > MAX_DIM {
                    return Err(invalid(
                        format!("entries[{i}].dims"),
                        format!("must be an increasing range within [{MIN_DIM}, {MAX_DIM}]"),
                    ));
                }
            }
            if entry.spec.max_subspace_dim == 0 {
                return Err(invalid(format!("entries[{i}].spec.max_subspace_dim"), "must be at least 1"));
            }
            for spec in entry.expand(entry.spec.seed) {
                spec.validate()
                    .map_err(|e| invalid(format!("entries[{i}].spec (dim {})", spec.dim), e.to_string()))?;
            }
        }
        Ok(())
    }

    /// All jobs, in entry order. With `seed_override`, entry `j` starts at
    /// `seed + j·2^32` instead of its own seed.
    pub fn jobs(&self, seed_override: Option<u64>) -> Vec<Job> {
        self.entries
            .iter()
            .enumerate()
            .flat_map(|(j, entry)| {
                let seed = match seed_override {
                    Some(s) => s.wrapping_add((j as u64).wrapping_mul(SEED_STRIDE)),
                    None => entry.spec.seed,
                };
                entry.expand(seed).map(|spec| Job {
                    theorem: entry.theorem,
                    spec,
                })
            })
            .collect()
    }

    pub fn tolerance(&self, theorem: TheoremId) -> f64 {
        self.tolerances.get(&theorem).copied().unwrap_or(DEFAULT_TOL)
    }

    /// The built-in suite: for every theorem, 200 certified instances spread
    /// over its scenarios at dims 2–16, real and complex alternating, plus a
    /// few negative controls per scenario.
    pub fn default_suite() -> Self {
        let mut entries = Vec::new();
        for (t, &theorem) in TheoremId::ALL.iter().enumerate() {
            let scenarios = scenarios_for(theorem);
            let share = DEFAULT_INSTANCES_PER_THEOREM / scenarios.len();
            let extra = DEFAULT_INSTANCES_PER_THEOREM % scenarios.len();
            for (s, &scenario) in scenarios.iter().enumerate() {
                let seed = DEFAULT_SEED + ((t * 8 + s) as u64) * 10_000;
                let count = share + usize::from(s < extra);
                entries.push(default_entry(theorem, scenario, seed, count, false));
                entries.push(default_entry(theorem, scenario, seed + 5_000, DEFAULT_SPOILERS_PER_SCENARIO, true));
            }
        }
        Self {
            name: "default".to_owned(),
            entries,
            tolerances: BTreeMap::new(),
            output: None,
            format: None,
        }
    }
}

fn default_entry(theorem: TheoremId, scenario: Scenario, seed: u64, count: usize, spoiler: bool) -> SuiteEntry {
    let mut spec = GenSpec::new(seed, DEFAULT_DIMS[0], scenario);
    spec.max_subspace_dim = 4;
    spec.spoiler = spoiler;
    SuiteEntry {
        theorem,
        count,
        dims: Some(DEFAULT_DIMS),
        scalar_mode: Some(ScalarMode::Mixed),
        spec,
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A `gen` config: either a full suite or a bare [`GenSpec`].
pub fn parse_gen_config(text: &str) -> Result<SuiteConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("entries").is_some() {
        return SuiteConfig::parse(text);
    }
    let spec: GenSpec = serde_json::from_str(text)?;
    spec.validate().map_err(|e| invalid("spec", e.to_string()))?;
    Ok(SuiteConfig {
        name: "gen".to_owned(),
        entries: vec![SuiteEntry {
            // The theorem is irrelevant to generation.
            theorem: TheoremId::ImageUnderK,
            count: 1,
            dims: None,
            scalar_mode: None,
            spec,
        }],
        tolerances: BTreeMap::new(),
        output: None,
        format: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_shape() {
        let suite = SuiteConfig::default_suite();
        suite.validate().unwrap();
        let jobs = suite.jobs(None);
        for theorem in TheoremId::ALL {
            let certified = jobs.iter().filter(|j| j.theorem == theorem && !j.spec.spoiler).count();
            assert_eq!(certified, DEFAULT_INSTANCES_PER_THEOREM, "{theorem}");
            assert!(jobs.iter().any(|j| j.theorem == theorem && j.spec.spoiler));
        }
        assert!(jobs.iter().all(|j| (2..=16).contains(&j.spec.dim)));
        assert!(jobs.iter().any(|j| j.spec.dim == 16));
        assert!(jobs.iter().any(|j| j.spec.scalar == Scalar::Complex));
    }

    #[test]
    fn seed_override_separates_entries() {
        let suite = SuiteConfig::default_suite();
        let jobs = suite.jobs(Some(5));
        assert_eq!(jobs[0].spec.seed, 5);
        let second_entry = suite.entries[0].count;
        assert_eq!(jobs[second_entry].spec.seed, 5 + SEED_STRIDE);
    }

    #[test]
    fn empty_entries_are_rejected() {
        let err = SuiteConfig::parse(r#"{"name": "x", "entries": []}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "entries"), "{err}");
    }

    #[test]
    fn bad_tolerance_and_dim_are_rejected() {
        let entry = r#"{"theorem": "thm3.1", "spec": {"seed": 1, "dim": 3, "n_members": 3, "max_subspace_dim": 1, "scenario": "idempotent"}}"#;
        let tol = format!(r#"{{"name": "x", "entries": [{entry}], "tolerances": {{"thm3.1": 0.0}}}}"#);
        assert!(matches!(SuiteConfig::parse(&tol), Err(ConfigError::Invalid { .. })));

        let dim0 = r#"{"seed": 1, "dim": 0, "n_members": 1, "max_subspace_dim": 1, "scenario": "axes"}"#;
        let err = parse_gen_config(dim0).unwrap_err();
        assert!(err.to_string().contains("dim"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = SuiteConfig::parse("{\n  \"name\": \"x\",\n  \"entries\": [\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 4, .. }), "{err}");
    }
}
