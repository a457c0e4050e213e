//! JSON documents for matrices and subspace bases.
//!
//! `{"field": "Q" | "Fp:<p>", "rows": n, "cols": m, "entries": [["7/2", "-1", ...], ...]}`
//! Scalars are decimal strings; plain JSON integers are accepted on input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarText {
    Text(String),
    Int(i64),
}

impl ScalarText {
    pub fn parse(&self, field: FieldSpec) -> Result<Scalar> {
        match self {
            ScalarText::Text(s) => field.parse_scalar(s),
            ScalarText::Int(v) => Ok(field.from_i64(*v)),
        }
    }
}

impl From<&Scalar> for ScalarText {
    fn from(s: &Scalar) -> Self {
        ScalarText::Text(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<ScalarText>>,
}

impl MatrixDoc {
    pub fn from_matrix(a: &Matrix) -> Self {
        MatrixDoc {
            field: a.field(),
            rows: a.rows(),
            cols: a.cols(),
            entries: rows_to_text(a),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        let entries = parse_rows(&self.entries, self.field, self.rows, self.cols)?;
        Matrix::new(self.rows, self.cols, self.field, entries)
    }
}

pub(crate) fn rows_to_text(a: &Matrix) -> Vec<Vec<ScalarText>> {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| ScalarText::from(a.get(i, j))).collect())
        .collect()
}

pub(crate) fn parse_rows(
    rows: &[Vec<ScalarText>],
    field: FieldSpec,
    nrows: usize,
    ncols: usize,
) -> Result<Vec<Scalar>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ShapeMismatch(format!(
            "entries do not form a {nrows}x{ncols} array"
        )));
    }
    rows.iter().flatten().map(|t| t.parse(field)).collect()
}

pub fn matrix_to_json(a: &Matrix) -> String {
    serde_json::to_string(&MatrixDoc::from_matrix(a)).expect("matrix serializes")
}

pub fn matrix_from_json(s: &str) -> Result<Matrix> {
    let doc: MatrixDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_matrix()
}

/// A basis file is a JSON list of matrix documents.
pub fn matrices_from_json(s: &str) -> Result<Vec<Matrix>> {
    let docs: Vec<MatrixDoc> = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    docs.iter().map(MatrixDoc::to_matrix).collect()
}

pub fn matrices_to_json(ms: &[Matrix]) -> String {
    let docs: Vec<MatrixDoc> = ms.iter().map(MatrixDoc::from_matrix).collect();
    serde_json::to_string(&docs).expect("matrices serialize")
}
