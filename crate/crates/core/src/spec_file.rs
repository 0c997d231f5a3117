//! JSON metric spec files.
//!
//! ```json
//! {"dimension": 2, "degree": 4,
//!  "coefficients": [
//!    {"index": [1, 1, 1, 1], "poly": [{"exp": [0, 0], "coeff": 1.0}]},
//!    {"index": [1, 1, 2, 2], "poly": [{"exp": [0, 0], "coeff": 0.1666}, {"exp": [1, 0], "coeff": 0.1666}]}
//!  ]}
//! ```
//!
//! Indices are 1-based and must be sorted ascending, so a coefficient tensor
//! that is not symmetric cannot be written down: the only way to give
//! `a_12` and `a_21` different values is to list the unsorted `[2, 1]`,
//! which is rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor_core::{MetricSpec, MultiIndex, XPolynomial};

#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed spec JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> SpecFileError {
    SpecFileError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub dimension: usize,
    pub degree: usize,
    pub coefficients: Vec<CoefficientEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub index: Vec<usize>,
    pub poly: Vec<TermEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub exp: Vec<u32>,
    pub coeff: f64,
}

impl SpecFile {
    pub fn from_spec(spec: &MetricSpec) -> Self {
        let coefficients = spec
            .coefficients()
            .iter()
            .map(|(idx, poly)| CoefficientEntry {
                index: idx.to_one_based(),
                poly: poly
                    .terms()
                    .map(|(exp, coeff)| TermEntry {
                        exp: exp.to_vec(),
                        coeff,
                    })
                    .collect(),
            })
            .collect();
        Self {
            dimension: spec.dimension(),
            degree: spec.degree(),
            coefficients,
        }
    }

    pub fn to_spec(&self) -> Result<MetricSpec, SpecFileError> {
        let n = self.dimension;
        let m = self.degree;
        if n < 1 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if m < 2 {
            return Err(invalid("degree", format!("must be at least 2, got {m}")));
        }
        if self.coefficients.is_empty() {
            return Err(invalid(
                "coefficients",
                "at least one coefficient is required",
            ));
        }
        let mut coeffs = BTreeMap::new();
        for (c, entry) in self.coefficients.iter().enumerate() {
            let field = format!("coefficients[{c}].index");
            if entry.index.len() != m {
                return Err(invalid(
                    field,
                    format!(
                        "{:?} has {} entries, expected degree {m}",
                        entry.index,
                        entry.index.len()
                    ),
                ));
            }
            if let Some(bad) = entry.index.iter().find(|&&i| i < 1 || i > n) {
                return Err(invalid(
                    field,
                    format!("{:?} has entry {bad} outside 1..={n}", entry.index),
                ));
            }
            if entry.index.windows(2).any(|w| w[0] > w[1]) {
                return Err(invalid(
                    field,
                    format!("{:?} is not sorted ascending", entry.index),
                ));
            }
            let idx = MultiIndex::from_one_based(&entry.index)
                .map_err(|e| invalid(&field, e.to_string()))?;

            if entry.poly.is_empty() {
                return Err(invalid(
                    format!("coefficients[{c}].poly"),
                    "needs at least one term",
                ));
            }
            let mut poly = XPolynomial::zero(n);
            let mut seen = std::collections::BTreeSet::new();
            for (t, term) in entry.poly.iter().enumerate() {
                let tfield = format!("coefficients[{c}].poly[{t}]");
                if term.exp.len() != n {
                    return Err(invalid(
                        tfield,
                        format!("exp has {} entries, expected dimension {n}", term.exp.len()),
                    ));
                }
                if !term.coeff.is_finite() {
                    return Err(invalid(tfield, "coeff is not finite"));
                }
                if !seen.insert(term.exp.clone()) {
                    return Err(invalid(tfield, format!("repeated exp {:?}", term.exp)));
                }
                poly.add_term(term.exp.clone(), term.coeff)
                    .map_err(|e| invalid(&tfield, e.to_string()))?;
            }
            if coeffs.insert(idx, poly).is_some() {
                return Err(invalid(
                    field,
                    format!("{:?} appears more than once", entry.index),
                ));
            }
        }
        MetricSpec::new(n, m, coeffs).map_err(|e| invalid("coefficients", e.to_string()))
    }
}

pub fn parse_spec(text: &str) -> Result<MetricSpec, SpecFileError> {
    let file: SpecFile = serde_json::from_str(text)?;
    file.to_spec()
}

pub fn read_spec(path: impl AsRef<Path>) -> Result<MetricSpec, SpecFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SpecFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec(&text)
}

/// Pretty-printed spec file for `spec`.
pub fn to_json(spec: &MetricSpec) -> String {
    serde_json::to_string_pretty(&SpecFile::from_spec(spec)).expect("spec files always serialize")
}
