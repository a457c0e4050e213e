//! Gaussian elimination over the exact fields.

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::Matrix;

/// Reduced row-echelon form: nonzero rows only, pivots ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub rows: Vec<Vec<Scalar>>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Row-reduces a list of equal-length vectors.
pub fn rref(mut rows: Vec<Vec<Scalar>>, width: usize) -> Echelon {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..width {
        if top == rows.len() {
            break;
        }
        let Some(found) = (top..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(top, found);
        let inv = rows[top][col].inv().expect("pivot is nonzero");
        if !inv.is_one() {
            for v in rows[top][col..].iter_mut() {
                *v = &*v * &inv;
            }
        }
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == top || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                if !pv.is_zero() {
                    *v = &*v - &(&factor * pv);
                }
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    Echelon { rows, pivots }
}

pub fn rank_of_rows(rows: Vec<Vec<Scalar>>, width: usize) -> usize {
    rref(rows, width).rank()
}

pub fn matrix_rows(a: &Matrix) -> Vec<Vec<Scalar>> {
    a.entries().chunks(a.cols().max(1)).take(a.rows()).map(|r| r.to_vec()).collect()
}

pub fn rank(a: &Matrix) -> usize {
    rank_of_rows(matrix_rows(a), a.cols())
}

pub fn is_invertible(a: &Matrix) -> bool {
    a.is_square() && rank(a) == a.rows()
}

/// Solution set of `A x = b`: a particular solution plus a kernel basis, or
/// `None` if the system is inconsistent.
pub fn solve(a: &Matrix, b: &[Scalar]) -> Result<Option<(Vec<Scalar>, Vec<Vec<Scalar>>)>> {
    if b.len() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "right-hand side of length {} for {} equations",
            b.len(),
            a.rows()
        )));
    }
    let field = a.field();
    let m = a.cols();
    let rows: Vec<Vec<Scalar>> = matrix_rows(a)
        .into_iter()
        .zip(b)
        .map(|(mut r, v)| {
            r.push(v.clone());
            r
        })
        .collect();
    let ech = rref(rows, m + 1);
    if ech.pivots.last() == Some(&m) {
        return Ok(None);
    }
    let mut particular = vec![field.zero(); m];
    for (row, &c) in ech.rows.iter().zip(&ech.pivots) {
        particular[c] = row[m].clone();
    }
    let kernel = free_columns(&ech.pivots, m)
        .map(|f| {
            let mut v = vec![field.zero(); m];
            v[f] = field.one();
            for (row, &c) in ech.rows.iter().zip(&ech.pivots) {
                v[c] = row[f].neg();
            }
            v
        })
        .collect();
    Ok(Some((particular, kernel)))
}

fn free_columns(pivots: &[usize], width: usize) -> impl Iterator<Item = usize> + '_ {
    (0..width).filter(move |c| !pivots.contains(c))
}

/// `Σ c_i v_i` for equal-length vectors.
pub fn combine(field: FieldSpec, coeffs: &[Scalar], vectors: &[Vec<Scalar>], width: usize) -> Vec<Scalar> {
    let mut out = vec![field.zero(); width];
    for (c, v) in coeffs.iter().zip(vectors) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            if !x.is_zero() {
                *o = &*o + &(c * x);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[i64]]) -> Matrix {
        Matrix::from_i64_rows(FieldSpec::Q, rows).unwrap()
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&q(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(&q(&[&[1, 2], &[3, 4]])), 2);
        assert_eq!(rank(&Matrix::zero(3, 3, FieldSpec::Q)), 0);
        let f3 = FieldSpec::prime(3).unwrap();
        // over F_3 the rows (1,2) and (2,1) are dependent: 2*(1,2) = (2,1)
        assert_eq!(rank(&Matrix::from_i64_rows(f3, &[&[1, 2], &[2, 1]]).unwrap()), 1);
        assert!(is_invertible(&Matrix::identity(4, f3)));
    }

    #[test]
    fn rref_is_canonical() {
        let e = rref(matrix_rows(&q(&[&[2, 4, 2], &[1, 3, 0], &[3, 7, 2]])), 3);
        assert_eq!(e.pivots, vec![0, 1]);
        let f = FieldSpec::Q;
        let want = vec![
            vec![f.one(), f.zero(), f.from_i64(3)],
            vec![f.zero(), f.one(), f.from_i64(-1)],
        ];
        assert_eq!(e.rows, want);
    }

    #[test]
    fn solve_consistent_and_not() {
        let f = FieldSpec::Q;
        let a = q(&[&[1, 1, 0], &[0, 0, 1]]);
        let b = vec![f.from_i64(2), f.from_i64(5)];
        let (x, ker) = solve(&a, &b).unwrap().unwrap();
        assert_eq!(x, vec![f.from_i64(2), f.zero(), f.from_i64(5)]);
        assert_eq!(ker, vec![vec![f.from_i64(-1), f.one(), f.zero()]]);
        let a = q(&[&[1, 1], &[1, 1]]);
        assert!(solve(&a, &[f.one(), f.zero()]).unwrap().is_none());
        assert!(solve(&a, &[f.one()]).is_err());
    }
}
