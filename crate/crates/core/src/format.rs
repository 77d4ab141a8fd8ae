//! Sparse JSON operator files.
//!
//! ```text
//! {
//!   "format_version": "1",
//!   "m": 3,
//!   "ell": 2,
//!   "metadata": {"name": "W1"},
//!   "entries": [
//!     {"i":1,"j":1,"k":1,"value":0.8},
//!     ...
//!   ]
//! }
//! ```
//!
//! Indices are 1-based with `i <= j`; unlisted entries are zero. `ell` is advisory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::tensor::HeredityTensor;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDocument {
    pub format_version: String,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    pub entries: Vec<Entry>,
}

impl OperatorDocument {
    /// Nonzero entries of `p` in `(i, j, k)` order.
    pub fn from_tensor<T: Real>(p: &HeredityTensor<T>, ell: Option<usize>, metadata: BTreeMap<String, String>) -> Self {
        let m = p.dim();
        let mut entries = Vec::new();
        for (i, j) in p.pairs() {
            for k in 0..m {
                let value = p.get(i, j, k).as_f64();
                if value != 0.0 {
                    entries.push(Entry {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                        value,
                    });
                }
            }
        }
        Self {
            format_version: FORMAT_VERSION.into(),
            m,
            ell,
            metadata,
            entries,
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| FormatError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        doc.check()?;
        Ok(doc)
    }

    fn check(&self) -> Result<(), FormatError> {
        if self.format_version != FORMAT_VERSION {
            return Err(field_error(
                "format_version",
                format!("unsupported version {:?}, expected {FORMAT_VERSION:?}", self.format_version),
            ));
        }
        if self.m < 2 {
            return Err(field_error("m", format!("need m >= 2, got {}", self.m)));
        }
        if let Some(ell) = self.ell {
            if ell > self.m {
                return Err(field_error("ell", format!("{ell} exceeds m = {}", self.m)));
            }
        }
        let mut seen = BTreeSet::new();
        for (n, e) in self.entries.iter().enumerate() {
            for (name, v) in [("i", e.i), ("j", e.j), ("k", e.k)] {
                if v < 1 || v > self.m {
                    return Err(field_error(
                        format!("entries[{n}].{name}"),
                        format!("index {v} outside 1..={}", self.m),
                    ));
                }
            }
            if !e.value.is_finite() {
                return Err(field_error(format!("entries[{n}].value"), "not finite"));
            }
            let key = (e.i.min(e.j), e.i.max(e.j), e.k);
            if !seen.insert(key) {
                return Err(field_error(
                    format!("entries[{n}]"),
                    format!("duplicate entry for ({}, {}, {})", key.0, key.1, key.2),
                ));
            }
        }
        Ok(())
    }

    /// Entries with `i > j` are read as their symmetric counterpart.
    pub fn to_tensor<T: Real>(&self) -> Result<HeredityTensor<T>, FormatError> {
        self.check()?;
        let mut p = HeredityTensor::zeros(self.m).map_err(|e| field_error("m", e.to_string()))?;
        for (n, e) in self.entries.iter().enumerate() {
            p.set(e.i - 1, e.j - 1, e.k - 1, T::lit(e.value))
                .map_err(|err| field_error(format!("entries[{n}]"), err.to_string()))?;
        }
        Ok(p)
    }

    /// One entry per line, sorted by `(i, j, k)`.
    pub fn to_text(&self) -> String {
        let mut entries = self.entries.clone();
        for e in &mut entries {
            if e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
        }
        entries.sort_by_key(|e| (e.i, e.j, e.k));
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"format_version\": {},", json(self.format_version.as_str()));
        let _ = writeln!(out, "  \"m\": {},", self.m);
        if let Some(ell) = self.ell {
            let _ = writeln!(out, "  \"ell\": {ell},");
        }
        if self.metadata.is_empty() {
            out.push_str("  \"metadata\": {},\n");
        } else {
            out.push_str("  \"metadata\": {\n");
            let n = self.metadata.len();
            for (idx, (k, v)) in self.metadata.iter().enumerate() {
                let sep = if idx + 1 < n { "," } else { "" };
                let _ = writeln!(out, "    {}: {}{sep}", json(k), json(v));
            }
            out.push_str("  },\n");
        }
        out.push_str("  \"entries\": [\n");
        for (idx, e) in entries.iter().enumerate() {
            let sep = if idx + 1 < entries.len() { "," } else { "" };
            let _ = writeln!(out, "    {}{sep}", json(e));
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        std::fs::write(path, self.to_text()).map_err(|source| FormatError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn json<S: Serialize + ?Sized>(v: &S) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{named_operator, NamedOperator};

    #[test]
    fn round_trip_is_byte_stable() {
        for name in NamedOperator::ALL {
            let p: HeredityTensor<f64> = named_operator(name);
            let meta = BTreeMap::from([("name".to_string(), name.name().to_string())]);
            let text = OperatorDocument::from_tensor(&p, None, meta).to_text();
            let doc = OperatorDocument::parse(&text).unwrap();
            assert_eq!(doc.to_text(), text);
            assert_eq!(doc.to_tensor::<f64>().unwrap(), p);
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "{\n  \"format_version\": \"1\",\n  \"m\": 3,\n  \"entries\": [ {\"i\": 1,, } ]\n}";
        match OperatorDocument::parse(text) {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn field_errors_name_the_field() {
        let text = r#"{"format_version":"1","m":3,"entries":[{"i":1,"j":1,"k":1,"value":1.0},{"i":4,"j":1,"k":1,"value":0.5}]}"#;
        match OperatorDocument::parse(text) {
            Err(FormatError::Field { field, .. }) => assert_eq!(field, "entries[1].i"),
            other => panic!("{other:?}"),
        }
        let dup = r#"{"format_version":"1","m":2,"entries":[{"i":1,"j":2,"k":1,"value":0.5},{"i":2,"j":1,"k":1,"value":0.5}]}"#;
        assert!(matches!(OperatorDocument::parse(dup), Err(FormatError::Field { .. })));
        let version = r#"{"format_version":"9","m":2,"entries":[]}"#;
        assert!(matches!(OperatorDocument::parse(version), Err(FormatError::Field { field, .. }) if field == "format_version"));
    }

    #[test]
    fn swapped_indices_are_symmetrized() {
        let text = r#"{"format_version":"1","m":2,"entries":[{"i":2,"j":1,"k":1,"value":0.5}]}"#;
        let p: HeredityTensor<f64> = OperatorDocument::parse(text).unwrap().to_tensor().unwrap();
        assert_eq!(p.get(0, 1, 0), 0.5);
        assert_eq!(p.get(1, 0, 0), 0.5);
    }
}
