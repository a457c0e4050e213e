//! Raising permanental rank by one along a line `A + μ E_ij` while keeping a
//! polynomial constraint nonzero.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::json::MatrixDoc;
use crate::matrix::Matrix;
use crate::permanent::{per_fast, prk, prk_decide_leq, WitnessDoc};

/// A polynomial function of the matrix entries, given as an evaluator and a
/// bound on its total degree. The caller guarantees polynomiality; the bound
/// is only used to limit how many scalars a root-avoiding scan must try.
pub trait PolyConstraint {
    fn evaluate(&self, a: &Matrix) -> Result<Scalar>;
    fn degree(&self) -> usize;
}

/// Constraints available from the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuiltinConstraint {
    One,
    /// The entry at `(i, j)`, 0-based.
    Entry(usize, usize),
    /// `per(A[I|J])`, 0-based ascending index sets of equal size.
    PerMinor(Vec<usize>, Vec<usize>),
}

impl PolyConstraint for BuiltinConstraint {
    fn evaluate(&self, a: &Matrix) -> Result<Scalar> {
        match self {
            BuiltinConstraint::One => Ok(a.field().one()),
            BuiltinConstraint::Entry(i, j) => {
                if *i >= a.rows() || *j >= a.cols() {
                    return Err(Error::IndexOutOfRange {
                        index: (*i).max(*j),
                        bound: a.rows().min(a.cols()),
                    });
                }
                Ok(a.get(*i, *j).clone())
            }
            BuiltinConstraint::PerMinor(rows, cols) => per_fast(&a.submatrix(rows, cols)?),
        }
    }

    fn degree(&self) -> usize {
        match self {
            BuiltinConstraint::One => 0,
            BuiltinConstraint::Entry(..) => 1,
            BuiltinConstraint::PerMinor(rows, _) => rows.len(),
        }
    }
}

/// Parses `one`, `entry:i,j` and `perminor:1+2,1+3` (1-based).
impl FromStr for BuiltinConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown constraint {s:?}; expected one, entry:i,j or perminor:I,J"));
        let one_based = |t: &str| -> Result<usize> {
            let v: usize = t.trim().parse().map_err(|_| bad())?;
            v.checked_sub(1).ok_or_else(bad)
        };
        if s == "one" {
            return Ok(BuiltinConstraint::One);
        }
        if let Some(rest) = s.strip_prefix("entry:") {
            let (i, j) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(BuiltinConstraint::Entry(one_based(i)?, one_based(j)?));
        }
        if let Some(rest) = s.strip_prefix("perminor:") {
            let (rows, cols) = rest.split_once(',').ok_or_else(bad)?;
            let set = |t: &str| -> Result<Vec<usize>> { t.split('+').map(one_based).collect() };
            let (rows, cols) = (set(rows)?, set(cols)?);
            if rows.len() != cols.len() || rows.windows(2).any(|w| w[0] >= w[1]) || cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad());
            }
            return Ok(BuiltinConstraint::PerMinor(rows, cols));
        }
        Err(bad())
    }
}

impl fmt::Display for BuiltinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join("+");
        match self {
            BuiltinConstraint::One => write!(f, "one"),
            BuiltinConstraint::Entry(i, j) => write!(f, "entry:{},{}", i + 1, j + 1),
            BuiltinConstraint::PerMinor(r, c) => write!(f, "perminor:{},{}", join(r), join(c)),
        }
    }
}

/// A constraint from a closure.
pub struct FnConstraint<F> {
    pub f: F,
    pub degree: usize,
}

impl<F: Fn(&Matrix) -> Result<Scalar>> PolyConstraint for FnConstraint<F> {
    fn evaluate(&self, a: &Matrix) -> Result<Scalar> {
        (self.f)(a)
    }

    fn degree(&self) -> usize {
        self.degree
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftOutcome {
    pub x: Matrix,
    pub mu: Scalar,
    /// 0-based `(i, j)` that was perturbed.
    pub position: (usize, usize),
    /// `prk(X)`, one more than `prk(A)`.
    pub rank: usize,
    /// The enlarged witness `(I ∪ {i}, J ∪ {j})`.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// `q(μ) = q0 + slope·μ`.
    pub q0: Scalar,
    pub slope: Scalar,
    /// Scalars tried before `mu` was accepted (including it).
    pub candidates_tried: usize,
    pub constraint_value: Scalar,
}

impl LiftOutcome {
    pub fn to_doc(&self) -> LiftDoc {
        LiftDoc {
            x: MatrixDoc::from_matrix(&self.x),
            mu: self.mu.to_string(),
            position: [self.position.0 + 1, self.position.1 + 1],
            prk: self.rank,
            witness: WitnessDoc {
                rank: self.rank,
                rows: self.rows.iter().map(|i| i + 1).collect(),
                cols: self.cols.iter().map(|j| j + 1).collect(),
            },
            constraint_value: self.constraint_value.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftDoc {
    #[serde(rename = "X")]
    pub x: MatrixDoc,
    pub mu: String,
    pub position: [usize; 2],
    pub prk: usize,
    pub witness: WitnessDoc,
    pub constraint_value: String,
}

fn line(a: &Matrix, i: usize, j: usize, mu: &Scalar) -> Matrix {
    let mut b = a.clone();
    let v = a.get(i, j) + mu;
    b.set(i, j, v).expect("position in range");
    b
}

fn insert_sorted(set: &[usize], x: usize) -> Vec<usize> {
    let mut out = set.to_vec();
    let at = out.partition_point(|&y| y < x);
    out.insert(at, x);
    out
}

/// Finds `X = A + μ̂ E_ij` with `prk(X) = prk(A) + 1` and `f(X) != 0`, taking
/// the least positive integer `μ̂` that avoids the root of
/// `q(μ) = per(B(μ)[I∪{i} | J∪{j}])` and the roots of `f(B(μ))`.
///
/// Without `position`, `(i, j)` is the least row outside `I` and the least
/// column outside `J`.
pub fn lift_rank(a: &Matrix, f: &dyn PolyConstraint, position: Option<(usize, usize)>) -> Result<LiftOutcome> {
    let field = a.field();
    if field.is_finite() {
        return Err(Error::FieldNotInfinite(field));
    }
    let n = a.order()?;
    if f.evaluate(a)?.is_zero() {
        return Err(Error::ConstraintVanishesAtA);
    }
    let w = prk(a)?;
    if w.rank == n {
        return Err(Error::RankSaturated(n));
    }
    let (i, j) = match position {
        Some((i, j)) => {
            for x in [i, j] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, bound: n });
                }
            }
            if w.rows.contains(&i) || w.cols.contains(&j) {
                return Err(Error::PositionInsideWitness { i, j });
            }
            (i, j)
        }
        None => {
            let free = |used: &[usize]| (0..n).find(|x| !used.contains(x)).expect("rank below n");
            (free(&w.rows), free(&w.cols))
        }
    };
    let rows = insert_sorted(&w.rows, i);
    let cols = insert_sorted(&w.cols, j);
    let q = |mu: &Scalar| per_fast(&line(a, i, j, mu).submatrix(&rows, &cols)?);

    // q must be linear with slope per(A[I|J])
    let (q0, q1, q2) = (q(&field.zero())?, q(&field.one())?, q(&field.from_i64(2))?);
    let slope = &q1 - &q0;
    let expected = if w.rows.is_empty() {
        field.one()
    } else {
        per_fast(&a.submatrix(&w.rows, &w.cols)?)?
    };
    if &q2 - &q1 != slope || slope != expected || slope.is_zero() {
        return Err(Error::AssertionFailure(format!(
            "q(μ) is not linear with slope per(A[I|J]) = {expected}: q(0), q(1), q(2) = {q0}, {q1}, {q2}"
        )));
    }
    let root = (-&q0).checked_div(&slope)?;

    let limit = f.degree() + 2;
    for step in 1..=limit {
        let mu = field.from_i64(step as i64);
        if mu == root {
            continue;
        }
        let x = line(a, i, j, &mu);
        let value = f.evaluate(&x)?;
        if value.is_zero() {
            continue;
        }
        let k = w.rank + 1;
        if !prk_decide_leq(&x, k)? || prk(&x)?.rank != k || per_fast(&x.submatrix(&rows, &cols)?)?.is_zero() {
            return Err(Error::AssertionFailure(format!("lift of prk {} did not land on prk {k}", w.rank)));
        }
        return Ok(LiftOutcome {
            x,
            mu,
            position: (i, j),
            rank: k,
            rows,
            cols,
            q0,
            slope,
            candidates_tried: step,
            constraint_value: value,
        });
    }
    Err(Error::ScanExhausted(limit))
}

/// Repeated lifts from `a` up to prk `target`, returning every step.
pub fn lift_chain(a: &Matrix, f: &dyn PolyConstraint, target: usize) -> Result<Vec<LiftOutcome>> {
    let mut out: Vec<LiftOutcome> = Vec::new();
    let mut current = a.clone();
    while prk(&current)?.rank < target {
        let step = lift_rank(&current, f, None)?;
        current = step.x.clone();
        out.push(step);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn q() -> FieldSpec {
        FieldSpec::Q
    }

    #[test]
    fn unit_lifts_to_two_units() {
        let e11 = Matrix::unit(3, 0, 0, q()).unwrap();
        let out = lift_rank(&e11, &BuiltinConstraint::Entry(0, 0), Some((1, 1))).unwrap();
        let want = Matrix::from_i64_rows(q(), &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]).unwrap();
        assert_eq!(out.x, want);
        assert_eq!(out.rank, 2);
        assert!(out.q0.is_zero());
        assert!(out.slope.is_one());
        assert!(out.constraint_value.is_one());
    }

    #[test]
    fn zero_lifts_to_a_scaled_unit() {
        let z = Matrix::zero(3, 3, q());
        let out = lift_rank(&z, &BuiltinConstraint::One, Some((2, 1))).unwrap();
        assert_eq!(out.x, Matrix::unit(3, 2, 1, q()).unwrap());
        assert_eq!(out.rank, 1);
    }

    #[test]
    fn lifts_a_vanishing_minor() {
        let a = Matrix::from_i64_rows(q(), &[&[1, 1, 0], &[1, -1, 0], &[0, 0, 0]]).unwrap();
        let out = lift_rank(&a, &BuiltinConstraint::One, None).unwrap();
        assert_eq!(out.position, (1, 1));
        assert!(out.q0.is_zero());
        assert!(out.mu.is_one());
        assert_eq!(out.rank, 2);
        let b = Matrix::from_i64_rows(q(), &[&[1, 1], &[1, -1]]).unwrap();
        let b = b.add(&Matrix::unit(2, 1, 1, q()).unwrap().scale(&q().from_i64(-1)).unwrap()).unwrap();
        assert_eq!(lift_rank(&b, &BuiltinConstraint::One, None), Err(Error::RankSaturated(2)));
    }

    #[test]
    fn skips_roots_of_the_constraint() {
        // f vanishes at μ = 1 and μ = 2 on the line
        let z = Matrix::zero(3, 3, q());
        let f = FnConstraint {
            f: |m: &Matrix| {
                let x = m.get(0, 0).clone();
                let one = m.field().one();
                let two = m.field().from_i64(2);
                Ok(&(&x - &one) * &(&x - &two))
            },
            degree: 2,
        };
        let out = lift_rank(&z, &f, None).unwrap();
        assert_eq!(out.mu, q().from_i64(3));
        assert_eq!(out.candidates_tried, 3);
    }

    #[test]
    fn argument_errors() {
        let f3 = FieldSpec::prime(3).unwrap();
        assert_eq!(
            lift_rank(&Matrix::zero(3, 3, f3), &BuiltinConstraint::One, None),
            Err(Error::FieldNotInfinite(f3))
        );
        let e11 = Matrix::unit(3, 0, 0, q()).unwrap();
        assert_eq!(
            lift_rank(&e11, &BuiltinConstraint::One, Some((0, 2))),
            Err(Error::PositionInsideWitness { i: 0, j: 2 })
        );
        assert_eq!(
            lift_rank(&e11, &BuiltinConstraint::Entry(1, 1), None),
            Err(Error::ConstraintVanishesAtA)
        );
    }

    #[test]
    fn chain_from_zero() {
        let steps = lift_chain(&Matrix::zero(3, 3, q()), &BuiltinConstraint::One, 3).unwrap();
        assert_eq!(steps.iter().map(|s| s.rank).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(steps[2].x, Matrix::identity(3, q()));
    }

    #[test]
    fn constraint_syntax() {
        assert_eq!("one".parse::<BuiltinConstraint>().unwrap(), BuiltinConstraint::One);
        assert_eq!("entry:1,2".parse::<BuiltinConstraint>().unwrap(), BuiltinConstraint::Entry(0, 1));
        let pm: BuiltinConstraint = "perminor:1+2,1+3".parse().unwrap();
        assert_eq!(pm, BuiltinConstraint::PerMinor(vec![0, 1], vec![0, 2]));
        assert_eq!(pm.to_string(), "perminor:1+2,1+3");
        assert_eq!(pm.degree(), 2);
        for bad in ["entry:0,1", "perminor:1+2,3", "perminor:2+1,1+2", "two", "entry:1"] {
            assert!(bad.parse::<BuiltinConstraint>().is_err(), "{bad}");
        }
    }
}
