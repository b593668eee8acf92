//! Dense real matrices and their file formats.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real `rows x cols` matrix stored row-major. Entries are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawMatrix> for DenseMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        DenseMatrix::from_row_major(raw.rows, raw.cols, raw.entries)
    }
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Config(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!(
                "entry ({}, {}) is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::Config("rows have unequal lengths".into()));
        }
        let entries = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_row_major(rows.len(), cols, entries)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::from_row_major(rows, cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: rows.max(1),
            cols: cols.max(1),
            entries: vec![0.0; rows.max(1) * cols.max(1)],
        }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        let mut m = Self::zeros(n, n);
        m.entries.fill(value);
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..m.rows {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_fn(
            values.len(),
            values.len(),
            |i, j| if i == j { values[i] } else { 0.0 },
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Entrywise map. The result must stay finite.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::from_row_major(self.rows, self.cols, self.entries.iter().map(|&x| f(x)).collect())
    }

    /// The leading `k` rows.
    pub fn top_rows(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.rows {
            return Err(Error::Config(format!(
                "cannot take {k} rows of a {}-row matrix",
                self.rows
            )));
        }
        Ok(Self {
            rows: k,
            cols: self.cols,
            entries: self.entries[..k * self.cols].to_vec(),
        })
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        for (dst, &src) in perm.iter().enumerate() {
            out.entries[dst * self.cols..(dst + 1) * self.cols].copy_from_slice(self.row(src));
        }
        out
    }

    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        self.transpose().permute_rows(perm).transpose()
    }

    /// Multiplies row `i` by `factor`.
    pub fn scale_row(&self, i: usize, factor: f64) -> Result<Self> {
        let mut out = self.clone();
        for x in &mut out.entries[i * self.cols..(i + 1) * self.cols] {
            *x *= factor;
        }
        Self::from_row_major(out.rows, out.cols, out.entries)
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    /// Parses CSV: one matrix row per line, comma-separated decimals.
    /// Blank lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            let mut column = 1;
            for field in line.split(',') {
                let value = field.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no + 1,
                    column,
                    message: format!("invalid number {:?}", field.trim()),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        line: line_no + 1,
                        column,
                        message: "entries must be finite".into(),
                    });
                }
                row.push(value);
                column += field.len() + 1;
            }
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Parse {
                        line: line_no + 1,
                        column: 1,
                        message: format!("expected {} fields, found {}", first.len(), row.len()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "empty matrix file".into(),
            });
        }
        Self::from_rows(&rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{x:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses `{"rows": n, "cols": m, "entries": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.cols + j]
    }
}
