//! Ring-level kernels behind the permanent and prk routines.
//!
//! Matrices are lowered either to residues mod p or, over Q, to integer
//! matrices by clearing denominators row by row. Row scaling by a nonzero
//! integer multiplies every minor's permanent by that integer, so zero
//! patterns are untouched and exact values are recovered by division.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::field::{FieldSpec, Scalar};
use crate::matrix::Matrix;

pub(crate) trait Ring {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct ModRing {
    pub p: u64,
}

impl Ring for ModRing {
    type Elem = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct IntRing;

impl Ring for IntRing {
    type Elem = BigInt;
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
}

/// Ryser's inclusion-exclusion formula on `A[rows|cols]` of a row-major
/// matrix with `stride` columns, visiting column subsets in Gray-code order:
/// `per = (-1)^k Σ_S (-1)^{|S|} Π_i Σ_{j∈S} a_ij`.
pub(crate) fn ryser<R: Ring>(
    ring: &R,
    entries: &[R::Elem],
    stride: usize,
    rows: &[usize],
    cols: &[usize],
) -> R::Elem {
    let k = rows.len();
    debug_assert_eq!(k, cols.len());
    if k == 0 {
        return ring.one();
    }
    let mut sums = vec![ring.zero(); k];
    let mut in_set = vec![false; k];
    let mut total = ring.zero();
    for g in 1u64..(1u64 << k) {
        let bit = g.trailing_zeros() as usize;
        let col = cols[bit];
        let adding = !in_set[bit];
        in_set[bit] = adding;
        for (s, &r) in sums.iter_mut().zip(rows) {
            let a = &entries[r * stride + col];
            *s = if adding { ring.add(s, a) } else { ring.sub(s, a) };
        }
        let mut prod = ring.one();
        for s in &sums {
            if ring.is_zero(s) {
                prod = ring.zero();
                break;
            }
            prod = ring.mul(&prod, s);
        }
        // the Gray code index's popcount is |S|
        if (g ^ (g >> 1)).count_ones() % 2 == 1 {
            total = ring.sub(&total, &prod);
        } else {
            total = ring.add(&total, &prod);
        }
    }
    if k % 2 == 1 {
        ring.sub(&ring.zero(), &total)
    } else {
        total
    }
}

/// First `(rows, cols)` pair of `size`-subsets, in lexicographic order with
/// rows major, whose permanent is nonzero.
pub(crate) fn first_nonzero_minor<R: Ring>(
    ring: &R,
    entries: &[R::Elem],
    n: usize,
    size: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    if size == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    if size > n {
        return None;
    }
    let col_sets: Vec<Vec<usize>> = (0..n).combinations(size).collect();
    for rows in (0..n).combinations(size) {
        // a zero row inside the block kills every minor on these rows
        if rows
            .iter()
            .any(|&r| (0..n).all(|c| ring.is_zero(&entries[r * n + c])))
        {
            continue;
        }
        for cols in &col_sets {
            if !ring.is_zero(&ryser(ring, entries, n, &rows, cols)) {
                return Some((rows, cols.clone()));
            }
        }
    }
    None
}

/// Largest size with a nonzero minor, with the first such minor.
pub(crate) fn prk_search<R: Ring>(
    ring: &R,
    entries: &[R::Elem],
    n: usize,
) -> (usize, Vec<usize>, Vec<usize>) {
    for size in (1..=n).rev() {
        if let Some((rows, cols)) = first_nonzero_minor(ring, entries, n, size) {
            return (size, rows, cols);
        }
    }
    (0, Vec::new(), Vec::new())
}

/// A matrix lowered to a concrete ring.
pub(crate) enum Lowered {
    Mod(ModRing, Vec<u64>),
    /// Integer entries plus the per-row factor each row was multiplied by.
    Int(Vec<BigInt>, Vec<BigInt>),
}

pub(crate) fn lower(a: &Matrix) -> Lowered {
    match a.field().modulus() {
        Some(p) => Lowered::Mod(
            ModRing { p },
            a.entries()
                .iter()
                .map(|s| s.residue().expect("prime field entry"))
                .collect(),
        ),
        None => {
            let cols = a.cols();
            let mut ints = Vec::with_capacity(a.entries().len());
            let mut scales = Vec::with_capacity(a.rows());
            for i in 0..a.rows() {
                let row: Vec<&BigRational> = (0..cols)
                    .map(|j| a.get(i, j).as_rational().expect("rational entry"))
                    .collect();
                let lcm = row
                    .iter()
                    .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
                for r in row {
                    ints.push(r.numer() * (&lcm / r.denom()));
                }
                scales.push(lcm);
            }
            Lowered::Int(ints, scales)
        }
    }
}

/// Permanent of `A[rows|cols]` evaluated through the lowered form.
pub(crate) fn lowered_permanent(
    low: &Lowered,
    field: FieldSpec,
    stride: usize,
    rows: &[usize],
    cols: &[usize],
) -> Scalar {
    match low {
        Lowered::Mod(ring, e) => Scalar::Mod {
            value: ryser(ring, e, stride, rows, cols),
            p: ring.p,
        },
        Lowered::Int(e, scales) => {
            let v = ryser(&IntRing, e, stride, rows, cols);
            let den = rows
                .iter()
                .fold(BigInt::one(), |acc, &r| acc * &scales[r]);
            debug_assert!(field.modulus().is_none());
            Scalar::Rat(BigRational::new(v, den))
        }
    }
}
