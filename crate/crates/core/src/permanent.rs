//! Permanents and permanental rank.
//!
//! `per_naive` sums over all permutations with plain scalar arithmetic and
//! serves as the oracle for `per_fast`, which runs Ryser's formula on a
//! lowered ring. `prk` searches square submatrices from the largest size down
//! and reports the first nonzero minor in lexicographic order.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::kernel::{self, Lowered, ModRing};
use crate::matrix::Matrix;

/// Largest order accepted by [`per_naive`].
pub const NAIVE_LIMIT: usize = 10;
/// Default largest order accepted by [`per_fast`].
pub const FAST_LIMIT: usize = 16;
/// Default cap on the number of matrices a [`PrkTable`] may cover.
pub const DEFAULT_TABLE_BUDGET: u128 = 1 << 26;

/// A permanental rank with the row and column sets of a certifying minor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrkWitness {
    pub rank: usize,
    /// Row indices `I`, 0-based, ascending.
    pub rows: Vec<usize>,
    /// Column indices `J`, 0-based, ascending.
    pub cols: Vec<usize>,
    /// `per(A[I|J])`; equals one for the empty minor.
    pub per_value: Scalar,
}

/// JSON form of a witness, 1-based: `{"rank":r,"I":[...],"J":[...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub rank: usize,
    #[serde(rename = "I")]
    pub rows: Vec<usize>,
    #[serde(rename = "J")]
    pub cols: Vec<usize>,
}

impl PrkWitness {
    pub fn to_doc(&self) -> WitnessDoc {
        WitnessDoc {
            rank: self.rank,
            rows: self.rows.iter().map(|i| i + 1).collect(),
            cols: self.cols.iter().map(|j| j + 1).collect(),
        }
    }
}

/// Permanent by direct summation over `S_n`. Limited to `n <= 10`.
pub fn per_naive(a: &Matrix) -> Result<Scalar> {
    let n = a.order()?;
    if n > NAIVE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: NAIVE_LIMIT,
        });
    }
    let field = a.field();
    let mut total = field.zero();
    for sigma in (0..n).permutations(n) {
        let mut term = field.one();
        for (i, &j) in sigma.iter().enumerate() {
            term = &term * a.get(i, j);
            if term.is_zero() {
                break;
            }
        }
        total = &total + &term;
    }
    Ok(total)
}

/// Permanent by Ryser's formula, `O(2^n n)` ring operations.
pub fn per_fast(a: &Matrix) -> Result<Scalar> {
    per_fast_with_limit(a, FAST_LIMIT)
}

pub fn per_fast_with_limit(a: &Matrix, limit: usize) -> Result<Scalar> {
    let n = a.order()?;
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    let all: Vec<usize> = (0..n).collect();
    Ok(kernel::lowered_permanent(&kernel::lower(a), a.field(), n, &all, &all))
}

/// Permanental rank with a witness. The search runs from size `n` down and,
/// within a size, over row sets then column sets in lexicographic order.
pub fn prk(a: &Matrix) -> Result<PrkWitness> {
    let n = a.order()?;
    let low = kernel::lower(a);
    let (rank, rows, cols) = match &low {
        Lowered::Mod(ring, e) => kernel::prk_search(ring, e, n),
        Lowered::Int(e, _) => kernel::prk_search(&kernel::IntRing, e, n),
    };
    let per_value = kernel::lowered_permanent(&low, a.field(), n, &rows, &cols);
    Ok(PrkWitness {
        rank,
        rows,
        cols,
        per_value,
    })
}

/// Whether `prk(A) <= k`: every `(k+1)`-square minor vanishes. Stops at the
/// first nonzero minor.
pub fn prk_decide_leq(a: &Matrix, k: usize) -> Result<bool> {
    let n = a.order()?;
    if k > n {
        return Err(Error::InvalidRange(format!("k = {k} exceeds n = {n}")));
    }
    if k == n {
        return Ok(true);
    }
    let found = match kernel::lower(a) {
        Lowered::Mod(ring, e) => kernel::first_nonzero_minor(&ring, &e, n, k + 1),
        Lowered::Int(e, _) => kernel::first_nonzero_minor(&kernel::IntRing, &e, n, k + 1),
    };
    Ok(found.is_none())
}

/// Permanental rank of every `n x n` matrix over `F_p`, indexed by the
/// base-`p` number whose digits are the row-major entries (first entry most
/// significant). Index order is therefore lexicographic order of matrices.
#[derive(Clone, Debug)]
pub struct PrkTable {
    p: u64,
    n: usize,
    ranks: Vec<u8>,
}

impl PrkTable {
    pub fn build(field: FieldSpec, n: usize, budget: u128) -> Result<Self> {
        let p = field
            .modulus()
            .ok_or_else(|| Error::InvalidField("exhaustive tables need a prime field".into()))?;
        let size = table_size(p, n, budget)?;
        let ring = ModRing { p };
        let mut ranks = vec![0u8; size];
        ranks
            .par_chunks_mut(4096)
            .enumerate()
            .for_each(|(chunk, out)| {
                let start = chunk * 4096;
                let mut digits = decode(start as u64, p, n * n);
                for slot in out.iter_mut() {
                    *slot = kernel::prk_search(&ring, &digits, n).0 as u8;
                    increment(&mut digits, p);
                }
            });
        Ok(PrkTable { p, n, ranks })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank_at(&self, index: usize) -> usize {
        self.ranks[index] as usize
    }

    /// Table index of a residue vector in row-major order.
    pub fn index_of(&self, residues: &[u64]) -> usize {
        residues
            .iter()
            .fold(0u64, |acc, &d| acc * self.p + d) as usize
    }

    pub fn rank_of(&self, a: &Matrix) -> Result<usize> {
        if a.field().modulus() != Some(self.p) || a.order()? != self.n {
            return Err(Error::ShapeMismatch(format!(
                "table covers {}x{} over Fp:{}",
                self.n, self.n, self.p
            )));
        }
        let residues: Vec<u64> = a.entries().iter().filter_map(Scalar::residue).collect();
        Ok(self.rank_at(self.index_of(&residues)))
    }

    /// The matrix stored at a given index.
    pub fn matrix_at(&self, index: usize) -> Matrix {
        let field = FieldSpec::prime(self.p).expect("table modulus is prime");
        let digits = decode(index as u64, self.p, self.n * self.n);
        Matrix::new(
            self.n,
            self.n,
            field,
            digits
                .iter()
                .map(|&d| Scalar::Mod { value: d, p: self.p })
                .collect(),
        )
        .expect("decoded shape")
    }
}

pub(crate) fn table_size(p: u64, n: usize, budget: u128) -> Result<usize> {
    let required = (p as u128).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(required as usize)
}

/// Base-`p` digits of `index`, most significant first.
pub(crate) fn decode(mut index: u64, p: u64, len: usize) -> Vec<u64> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut().rev() {
        *d = index % p;
        index /= p;
    }
    digits
}

/// Odometer step; returns the positions that changed (from the last).
pub(crate) fn increment(digits: &mut [u64], p: u64) -> usize {
    let mut changed = 0;
    for d in digits.iter_mut().rev() {
        changed += 1;
        *d += 1;
        if *d == p {
            *d = 0;
        } else {
            break;
        }
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[i64]]) -> Matrix {
        Matrix::from_i64_rows(FieldSpec::Q, rows).unwrap()
    }

    #[test]
    fn naive_examples() {
        assert!(per_naive(&Matrix::identity(3, FieldSpec::Q)).unwrap().is_one());
        assert_eq!(per_naive(&q(&[&[1, 1], &[1, 1]])).unwrap(), FieldSpec::Q.from_i64(2));
        // per(E_ij + E_il - E_mj + E_ml) = 0
        assert!(per_naive(&q(&[&[1, 1], &[-1, 1]])).unwrap().is_zero());
        assert!(per_naive(&Matrix::zero(0, 0, FieldSpec::Q)).unwrap().is_one());
    }

    #[test]
    fn fast_examples() {
        assert!(per_fast(&Matrix::identity(4, FieldSpec::Q)).unwrap().is_one());
        let j3 = Matrix::all_ones(3, 3, FieldSpec::Q);
        assert_eq!(per_fast(&j3).unwrap(), FieldSpec::Q.from_i64(6));
        assert!(per_fast(&Matrix::zero(0, 0, FieldSpec::Q)).unwrap().is_one());
        let f7 = FieldSpec::prime(7).unwrap();
        // 4! = 24 = 3 mod 7
        assert_eq!(per_fast(&Matrix::all_ones(4, 4, f7)).unwrap(), f7.from_i64(3));
    }

    #[test]
    fn rational_permanent_is_exact() {
        let f = FieldSpec::Q;
        let a = Matrix::new(
            2,
            2,
            f,
            ["1/2", "1/3", "5", "-7/4"]
                .iter()
                .map(|s| f.parse_scalar(s).unwrap())
                .collect(),
        )
        .unwrap();
        // 1/2 * -7/4 + 1/3 * 5 = -7/8 + 5/3 = 19/24
        assert_eq!(per_fast(&a).unwrap().to_string(), "19/24");
        assert_eq!(per_naive(&a).unwrap().to_string(), "19/24");
    }

    #[test]
    fn guards() {
        let rect = Matrix::zero(2, 3, FieldSpec::Q);
        assert!(matches!(per_naive(&rect), Err(Error::NotSquare { .. })));
        assert!(matches!(per_fast(&rect), Err(Error::NotSquare { .. })));
        assert!(matches!(prk(&rect), Err(Error::NotSquare { .. })));
        let big = Matrix::identity(11, FieldSpec::Q);
        assert!(matches!(per_naive(&big), Err(Error::TooLarge { .. })));
        assert!(matches!(
            per_fast_with_limit(&big, 10),
            Err(Error::TooLarge { .. })
        ));
        assert!(per_fast(&big).unwrap().is_one());
    }

    #[test]
    fn prk_examples() {
        let f = FieldSpec::Q;
        let w = prk(&Matrix::zero(3, 3, f)).unwrap();
        assert_eq!(w.rank, 0);
        assert!(w.rows.is_empty() && w.cols.is_empty());
        assert!(w.per_value.is_one());

        let w = prk(&Matrix::unit(3, 0, 0, f).unwrap()).unwrap();
        assert_eq!((w.rank, w.rows.clone(), w.cols.clone()), (1, vec![0], vec![0]));

        let x = q(&[&[1, 1, 0], &[-1, 1, 0], &[0, 0, 1]]);
        let w = prk(&x).unwrap();
        assert_eq!(w.rank, 2);
        assert_eq!((w.rows.clone(), w.cols.clone()), (vec![0, 2], vec![0, 2]));
        assert!(w.per_value.is_one());
        assert_eq!(
            w.to_doc(),
            WitnessDoc {
                rank: 2,
                rows: vec![1, 3],
                cols: vec![1, 3]
            }
        );
    }

    #[test]
    fn decide_examples() {
        let f = FieldSpec::prime(3).unwrap();
        for n in 1..5 {
            assert!(!prk_decide_leq(&Matrix::identity(n, f), n - 1).unwrap());
            assert!(prk_decide_leq(&Matrix::identity(n, f), n).unwrap());
        }
        assert!(prk_decide_leq(&Matrix::unit(3, 0, 0, f).unwrap(), 1).unwrap());
        assert!(prk_decide_leq(&Matrix::identity(2, f), 3).is_err());
    }

    #[test]
    fn table_matches_direct_search() {
        let f = FieldSpec::prime(3).unwrap();
        let table = PrkTable::build(f, 2, DEFAULT_TABLE_BUDGET).unwrap();
        assert_eq!(table.len(), 81);
        for idx in 0..table.len() {
            let m = table.matrix_at(idx);
            assert_eq!(table.rank_of(&m).unwrap(), idx_rank(&m));
            assert_eq!(table.rank_at(idx), prk(&m).unwrap().rank);
        }
        assert!(matches!(
            PrkTable::build(f, 4, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(PrkTable::build(FieldSpec::Q, 2, 1000).is_err());
    }

    fn idx_rank(m: &Matrix) -> usize {
        prk(m).unwrap().rank
    }

    #[test]
    fn odometer_walks_in_index_order() {
        let mut d = decode(0, 3, 3);
        for idx in 0..27u64 {
            assert_eq!(d, decode(idx, 3, 3));
            increment(&mut d, 3);
        }
    }
}
