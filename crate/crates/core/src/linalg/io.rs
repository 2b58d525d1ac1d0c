//! Matrix file formats.
//!
//! JSON: `{"dim": n, "entries": [[[re, im], ...], ...]}`, row-major.
//! CSV: a `dim=n` header line followed by `n^2` lines of `re,im`, row-major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{HarnackError, Result};

#[derive(Serialize, Deserialize)]
pub(crate) struct MatrixDoc {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixDoc {
    pub(crate) fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z = m.get(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        Self { dim: n, entries }
    }

    pub(crate) fn into_matrix(self) -> Result<ComplexMatrix> {
        if self.entries.len() != self.dim {
            return Err(HarnackError::DimensionError(format!(
                "dim is {} but {} rows were given",
                self.dim,
                self.entries.len()
            )));
        }
        let rows: Vec<Vec<Complex64>> = self
            .entries
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows)
    }
}

fn parse_error(e: serde_json::Error) -> HarnackError {
    HarnackError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn read_json<R: Read>(reader: R) -> Result<ComplexMatrix> {
    let doc: MatrixDoc = serde_json::from_reader(reader).map_err(parse_error)?;
    doc.into_matrix()
}

pub fn from_json_str(s: &str) -> Result<ComplexMatrix> {
    let doc: MatrixDoc = serde_json::from_str(s).map_err(parse_error)?;
    doc.into_matrix()
}

pub fn to_json_string(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixDoc::from_matrix(m)).expect("matrix documents always serialize")
}

pub fn to_json_value(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixDoc::from_matrix(m)).expect("matrix documents always serialize")
}

pub fn write_json<W: Write>(m: &ComplexMatrix, mut writer: W) -> Result<()> {
    writer.write_all(to_json_string(m).as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<ComplexMatrix> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| HarnackError::Parse {
            line: 1,
            column: 1,
            message: "empty input, expected `dim=n` header".into(),
        })?;
    let dim: usize = header
        .trim()
        .strip_prefix("dim=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| HarnackError::Parse {
            line: 1,
            column: 1,
            message: format!("expected `dim=n` header, found `{header}`"),
        })?;
    let mut values = Vec::with_capacity(dim * dim);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut parse_field = |column: usize| -> Result<f64> {
            let field = fields.next().ok_or_else(|| HarnackError::Parse {
                line: line_no,
                column,
                message: "expected `re,im`".into(),
            })?;
            field.trim().parse::<f64>().map_err(|e| HarnackError::Parse {
                line: line_no,
                column,
                message: format!("invalid number `{}`: {e}", field.trim()),
            })
        };
        let re = parse_field(1)?;
        let im = parse_field(2)?;
        if fields.next().is_some() {
            return Err(HarnackError::Parse {
                line: line_no,
                column: 3,
                message: "too many fields, expected `re,im`".into(),
            });
        }
        values.push(Complex64::new(re, im));
    }
    if values.len() != dim * dim {
        return Err(HarnackError::DimensionError(format!(
            "dim={dim} requires {} entries, found {}",
            dim * dim,
            values.len()
        )));
    }
    ComplexMatrix::from_fn(dim, |i, j| values[i * dim + j])
}

pub fn write_csv<W: Write>(m: &ComplexMatrix, mut writer: W) -> Result<()> {
    let n = m.dim();
    writeln!(writer, "dim={n}")?;
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            writeln!(writer, "{:?},{:?}", z.re, z.im)?;
        }
    }
    Ok(())
}

/// Reads a matrix file; `.csv` selects the CSV format, anything else JSON.
pub fn read_path(path: &Path) -> Result<ComplexMatrix> {
    let file = File::open(path)?;
    if is_csv(path) {
        read_csv(file)
    } else {
        read_json(BufReader::new(file))
    }
}

pub fn write_path(m: &ComplexMatrix, path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    if is_csv(path) {
        write_csv(m, file)
    } else {
        write_json(m, file)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}
