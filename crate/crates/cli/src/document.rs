//! The single on-disk format shared by every artifact.
//!
//! ```json
//! {"kind":"state","dims":[2,2],"data":[[[0.5,0.0],...],...],"meta":{"seed":"7"}}
//! ```
//!
//! `data` holds a row-major matrix of `[re, im]` pairs. Numbers are written
//! with 17 significant digits so that reading a document back reproduces the
//! exact binary values, and `meta` is ordered so output is byte-stable.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use aapt_core::linalg::{c, ComplexMatrix};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    State,
    Channel,
    Transfer,
    Certificate,
    Report,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::State => "state",
            Kind::Channel => "channel",
            Kind::Transfer => "transfer",
            Kind::Certificate => "certificate",
            Kind::Report => "report",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub kind: Kind,
    pub dims: Vec<usize>,
    pub data: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Encoded<'a> {
    kind: Kind,
    dims: &'a [usize],
    data: Vec<Vec<[Box<RawValue>; 2]>>,
    meta: &'a BTreeMap<String, String>,
}

/// Shortest form that still carries 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn raw(x: f64) -> Box<RawValue> {
    RawValue::from_string(format_number(x)).expect("exponent notation is valid JSON")
}

impl MatrixDocument {
    pub fn new(kind: Kind, dims: Vec<usize>) -> Self {
        MatrixDocument { kind, dims, data: Vec::new(), meta: BTreeMap::new() }
    }

    pub fn with_matrix(mut self, m: &ComplexMatrix) -> Self {
        self.data = rows_of(m);
        self
    }

    /// Appends the rows of `m` below the current data.
    pub fn stack(&mut self, m: &ComplexMatrix) {
        self.data.extend(rows_of(m));
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set_number(&mut self, key: &str, value: f64) {
        self.meta.insert(key.to_string(), format_number(value));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: MatrixDocument = serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))?;
        if let Some(first) = doc.data.first() {
            if doc.data.iter().any(|row| row.len() != first.len()) {
                return Err(CliError::Format("data rows have unequal lengths".into()));
            }
        }
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Format(msg) => CliError::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Compact JSON terminated by a newline.
    pub fn to_json(&self) -> Result<String, CliError> {
        let mut data = Vec::with_capacity(self.data.len());
        for row in &self.data {
            let mut out = Vec::with_capacity(row.len());
            for &[re, im] in row {
                if !re.is_finite() || !im.is_finite() {
                    return Err(CliError::Numerical(format!("non-finite entry in {} document", self.kind)));
                }
                out.push([raw(re), raw(im)]);
            }
            data.push(out);
        }
        let encoded = Encoded { kind: self.kind, dims: &self.dims, data, meta: &self.meta };
        let mut text = serde_json::to_string(&encoded).map_err(|e| CliError::Format(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()?).map_err(|e| CliError::io(path, e))
    }

    pub fn expect_kind(&self, kinds: &[Kind]) -> Result<(), CliError> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            let wanted: Vec<String> = kinds.iter().map(Kind::to_string).collect();
            Err(CliError::Format(format!("expected a {} document, got {}", wanted.join(" or "), self.kind)))
        }
    }

    /// Two positive dimensions, as used by states, channels and transfer maps.
    pub fn dim_pair(&self) -> Result<(usize, usize), CliError> {
        match self.dims[..] {
            [a, b] if a > 0 && b > 0 => Ok((a, b)),
            _ => Err(CliError::Format(format!("expected two positive dims, got {:?}", self.dims))),
        }
    }

    /// The data as a matrix, which must have the given shape.
    pub fn matrix(&self, rows: usize, cols: usize) -> Result<ComplexMatrix, CliError> {
        let width = self.data.first().map_or(0, Vec::len);
        if self.data.len() != rows || width != cols {
            return Err(CliError::Format(format!(
                "{} data must be {rows}x{cols}, got {}x{width}",
                self.kind,
                self.data.len()
            )));
        }
        Ok(ComplexMatrix::from_fn(rows, cols, |r, k| {
            let [re, im] = self.data[r][k];
            c(re, im)
        }))
    }
}

fn rows_of(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let values = [0.1, 1.0 / 3.0, -2.5e-300, f64::MIN_POSITIVE, 1e308, -0.0, std::f64::consts::PI, 5e-324];
        let m = ComplexMatrix::from_fn(2, 4, |r, k| c(values[r * 4 + k], values[7 - (r * 4 + k)]));
        let doc = MatrixDocument::new(Kind::State, vec![2, 4]).with_matrix(&m).with_meta("seed", 7);
        let text = doc.to_json().unwrap();
        let back = MatrixDocument::parse(&text).unwrap();
        let m2 = back.matrix(2, 4).unwrap();
        for (x, y) in m.iter().zip(m2.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(MatrixDocument::parse("{}").is_err());
        assert!(MatrixDocument::parse(r#"{"kind":"nope","dims":[],"data":[]}"#).is_err());
        assert!(MatrixDocument::parse(r#"{"kind":"state","dims":[1,1],"data":[[[1,0]],[]]}"#).is_err());
        let doc = MatrixDocument::parse(r#"{"kind":"state","dims":[1,1],"data":[[[1,0]]]}"#).unwrap();
        assert!(doc.matrix(2, 2).is_err());
        assert!(doc.expect_kind(&[Kind::Channel]).is_err());
        assert_eq!(doc.dim_pair().unwrap(), (1, 1));
    }

    #[test]
    fn non_finite_values_are_not_written() {
        let m = ComplexMatrix::from_element(1, 1, c(f64::NAN, 0.0));
        assert!(matches!(
            MatrixDocument::new(Kind::Report, vec![1]).with_matrix(&m).to_json(),
            Err(CliError::Numerical(_))
        ));
    }
}
