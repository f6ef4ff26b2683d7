//! On-disk instance format.
//!
//! A single JSON document:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "scalar": "real",
//!   "members": [{ "basis": [[1.0], [0.0]], "weight": 1.0 }],
//!   "perturbed": [{ "basis": [[0.0], [1.0]], "weight": 1.0 }],
//!   "operators": { "K": [[1.0, 0.0], [0.0, 1.0]] },
//!   "constants": { "a": 0.0, "b": 0.0, "c": 0.0, "R": 0.01 },
//!   "erased": [],
//!   "meta": { "seed": 7, "scenario": "identical" }
//! }
//! ```
//!
//! Matrices are arrays of rows. An entry is a number, or an `[re, im]` pair
//! for complex data. A member basis holds the spanning vectors as columns;
//! columns that are not orthonormal are orthonormalized on load.
//! Floats are written in shortest round-trip form, so parse → serialize →
//! parse reproduces every value exactly.

use std::path::Path;

use framekit::frame::WeightedSubspaceFamily;
use framekit::instances::{GenSpec, Instance, Scalar};
use framekit::numerics::{self, Matrix, Subspace};
use framekit::theorems::PerturbationConstants;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl FileError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        FileError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for FileError {
    fn from(e: serde_json::Error) -> Self {
        FileError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

pub type Rows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberFile {
    pub basis: Rows,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operators {
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Rows>,
    #[serde(rename = "K1", default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<Rows>,
    #[serde(rename = "K2", default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<Rows>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub spoiler: bool,
    /// The generator input, enough to regenerate the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<GenSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dim: usize,
    #[serde(default)]
    pub scalar: Scalar,
    pub members: Vec<MemberFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed: Option<Vec<MemberFile>>,
    #[serde(default)]
    pub operators: Operators,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub erased: Vec<usize>,
    #[serde(default)]
    pub meta: Meta,
}

fn rows_of(m: &Matrix, scalar: Scalar) -> Rows {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let z = m[(i, j)];
                    match scalar {
                        Scalar::Real => Entry::Real(z.re),
                        Scalar::Complex => Entry::Complex([z.re, z.im]),
                    }
                })
                .collect()
        })
        .collect()
}

fn matrix_of(rows: &Rows, n_rows: usize, n_cols: Option<usize>, field: &str) -> Result<Matrix, FileError> {
    if rows.len() != n_rows {
        return Err(FileError::invalid(field, format!("expected {n_rows} rows, found {}", rows.len())));
    }
    let width = n_cols.unwrap_or_else(|| rows.first().map_or(0, Vec::len));
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(FileError::invalid(
            format!("{field}[{i}]"),
            format!("expected {width} entries, found {}", rows[i].len()),
        ));
    }
    let m = Matrix::from_fn(n_rows, width, |i, j| rows[i][j].value());
    if !numerics::is_finite(&m) {
        return Err(FileError::invalid(field, "entries must be finite"));
    }
    Ok(m)
}

fn family_of(members: &[MemberFile], dim: usize, field: &str) -> Result<WeightedSubspaceFamily, FileError> {
    let mut pairs = Vec::with_capacity(members.len());
    for (i, m) in members.iter().enumerate() {
        let name = format!("{field}[{i}]");
        let basis = matrix_of(&m.basis, dim, None, &format!("{name}.basis"))?;
        let subspace = match Subspace::new(basis.clone()) {
            Ok(s) => s,
            Err(_) => Subspace::span(&basis),
        };
        if !(m.weight.is_finite() && m.weight > 0.0) {
            return Err(FileError::invalid(format!("{name}.weight"), "must be positive and finite"));
        }
        pairs.push((subspace, m.weight));
    }
    WeightedSubspaceFamily::from_pairs(dim, pairs).map_err(|e| FileError::invalid(field, e.to_string()))
}

fn members_of(family: &WeightedSubspaceFamily, scalar: Scalar) -> Vec<MemberFile> {
    family
        .members()
        .iter()
        .map(|m| MemberFile {
            basis: rows_of(m.subspace.basis(), scalar),
            weight: m.weight,
        })
        .collect()
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let scalar = inst
            .spec
            .as_ref()
            .map(|s| s.scalar)
            .unwrap_or_else(|| detect_scalar(inst));
        let op = |m: &Option<Matrix>| m.as_ref().map(|m| rows_of(m, scalar));
        Self {
            dim: inst.family.ambient_dim(),
            scalar,
            members: members_of(&inst.family, scalar),
            perturbed: inst.perturbed.as_ref().map(|f| members_of(f, scalar)),
            operators: Operators {
                k: op(&inst.k),
                k1: op(&inst.k1),
                k2: op(&inst.k2),
            },
            constants: Constants {
                a: inst.constants.map(|c| c.a),
                b: inst.constants.map(|c| c.b),
                c: inst.constants.map(|c| c.c),
                r: inst.r,
            },
            erased: inst.erased.clone(),
            meta: Meta {
                seed: inst.spec.as_ref().map(|s| s.seed),
                scenario: inst.spec.as_ref().map(|s| s.scenario.as_str().to_owned()),
                spoiler: inst.spec.as_ref().is_some_and(|s| s.spoiler),
                spec: inst.spec.clone(),
            },
        }
    }

    pub fn to_instance(&self) -> Result<Instance, FileError> {
        let n = self.dim;
        if n == 0 {
            return Err(FileError::invalid("dim", "must be positive"));
        }
        let family = family_of(&self.members, n, "members")?;
        let perturbed = self
            .perturbed
            .as_ref()
            .map(|p| family_of(p, n, "perturbed"))
            .transpose()?;
        let op = |rows: &Option<Rows>, name: &str| {
            rows.as_ref()
                .map(|r| matrix_of(r, n, Some(n), &format!("operators.{name}")))
                .transpose()
        };
        let Constants { a, b, c, r } = self.constants;
        let constants = if a.is_some() || b.is_some() || c.is_some() {
            Some(PerturbationConstants::new(a.unwrap_or(0.0), b.unwrap_or(0.0), c.unwrap_or(0.0)))
        } else {
            None
        };
        for (name, v) in [("a", a), ("b", b), ("c", c), ("R", r)] {
            if v.is_some_and(|v| !v.is_finite()) {
                return Err(FileError::invalid(format!("constants.{name}"), "must be finite"));
            }
        }
        let mut inst = Instance::from_family(family);
        inst.spec = self.meta.spec.clone();
        inst.perturbed = perturbed;
        inst.k = op(&self.operators.k, "K")?;
        inst.k1 = op(&self.operators.k1, "K1")?;
        inst.k2 = op(&self.operators.k2, "K2")?;
        inst.constants = constants;
        inst.r = r;
        inst.erased = self.erased.clone();
        Ok(inst)
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("instance files serialize");
        text.push('\n');
        text
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        let text = std::fs::read_to_string(path).map_err(|source| FileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

fn detect_scalar(inst: &Instance) -> Scalar {
    let real = |m: &Matrix| m.iter().all(|z| z.im == 0.0);
    let families = std::iter::once(&inst.family).chain(inst.perturbed.as_ref());
    let all_real = families.flat_map(|f| f.members()).all(|m| real(m.subspace.basis()))
        && [&inst.k, &inst.k1, &inst.k2].into_iter().flatten().all(real);
    if all_real {
        Scalar::Real
    } else {
        Scalar::Complex
    }
}
