//! Dense exact matrices and permutations.
//!
//! Library indices are 0-based. JSON documents and the CLI use 1-based
//! indices; conversion happens at that boundary.

use std::fmt;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: FieldSpec,
    entries: Vec<Scalar>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, checking length and fields.
    pub fn new(rows: usize, cols: usize, field: FieldSpec, entries: Vec<Scalar>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| e.field() != field) {
            return Err(Error::FieldMismatch {
                left: field,
                right: bad.field(),
            });
        }
        Ok(Matrix {
            rows,
            cols,
            field,
            entries,
        })
    }

    pub fn from_i64_rows(field: FieldSpec, rows: &[&[i64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let entries = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| field.from_i64(v)))
            .collect();
        Matrix::new(r, c, field, entries)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        field: FieldSpec,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                assert_eq!(v.field(), field, "entry field differs from matrix field");
                entries.push(v);
            }
        }
        Matrix {
            rows,
            cols,
            field,
            entries,
        }
    }

    pub fn zero(rows: usize, cols: usize, field: FieldSpec) -> Self {
        Matrix {
            rows,
            cols,
            field,
            entries: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(n: usize, field: FieldSpec) -> Self {
        Matrix::from_fn(n, n, field, |i, j| {
            if i == j {
                field.one()
            } else {
                field.zero()
            }
        })
    }

    /// The matrix unit `E_{i,j}` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize, field: FieldSpec) -> Result<Self> {
        check_index(i, n)?;
        check_index(j, n)?;
        let mut m = Matrix::zero(n, n, field);
        m.entries[i * n + j] = field.one();
        Ok(m)
    }

    pub fn diagonal(d: &[Scalar], field: FieldSpec) -> Result<Self> {
        if let Some(bad) = d.iter().find(|e| e.field() != field) {
            return Err(Error::FieldMismatch {
                left: field,
                right: bad.field(),
            });
        }
        let n = d.len();
        Ok(Matrix::from_fn(n, n, field, |i, j| {
            if i == j {
                d[i].clone()
            } else {
                field.zero()
            }
        }))
    }

    /// `P(σ)` with `p_{ij} = 1` iff `j = σ⁻¹(i)`, so that `P(σ) e_j = e_{σ(j)}`.
    pub fn permutation(sigma: &Permutation, field: FieldSpec) -> Self {
        let inv = sigma.inverse();
        let n = sigma.len();
        Matrix::from_fn(n, n, field, |i, j| {
            if j == inv.apply(i) {
                field.one()
            } else {
                field.zero()
            }
        })
    }

    pub fn all_ones(rows: usize, cols: usize, field: FieldSpec) -> Self {
        Matrix {
            rows,
            cols,
            field,
            entries: vec![field.one(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix, or `NotSquare`.
    pub fn order(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Scalar> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) -> Result<()> {
        check_index(i, self.rows)?;
        check_index(j, self.cols)?;
        if v.field() != self.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: v.field(),
            });
        }
        self.entries[i * self.cols + j] = v;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    /// Positions of nonzero entries in row-major order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(idx, _)| (idx / self.cols, idx % self.cols))
            .collect()
    }

    /// `A[J1|J2]`: rows `J1` and columns `J2`, both strictly ascending.
    pub fn submatrix(&self, row_set: &[usize], col_set: &[usize]) -> Result<Matrix> {
        check_index_set(row_set, self.rows)?;
        check_index_set(col_set, self.cols)?;
        let mut entries = Vec::with_capacity(row_set.len() * col_set.len());
        for &i in row_set {
            for &j in col_set {
                entries.push(self.get(i, j).clone());
            }
        }
        Ok(Matrix {
            rows: row_set.len(),
            cols: col_set.len(),
            field: self.field,
            entries,
        })
    }

    fn check_same_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: other.field,
            });
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        self.check_same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zero(self.rows, other.cols, self.field);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.entries[idx] = &out.entries[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Entrywise product `c_{ij} = a_{ij} b_{ij}`.
    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    pub fn scale(&self, c: &Scalar) -> Result<Matrix> {
        if c.field() != self.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: c.field(),
            });
        }
        Ok(self.map(|a| a * c))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, self.field, |i, j| {
            self.get(j, i).clone()
        })
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row = (0..self.cols).map(|j| self.get(i, j).to_string()).join(", ");
            write!(f, "[{row}]")?;
        }
        write!(f, "]")
    }
}

/// A bijection of `{0, .., n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(images));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng);
        Permutation { images }
    }

    /// All of `S_n` in lexicographic order of the image sequence.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (0..n)
            .permutations(n)
            .map(|images| Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { images: inv }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "permutations of {} and {} points",
                self.len(),
                other.len()
            )));
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }
}

pub(crate) fn check_index(i: usize, bound: usize) -> Result<()> {
    if i < bound {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, bound })
    }
}

pub(crate) fn check_index_set(set: &[usize], bound: usize) -> Result<()> {
    for &i in set {
        check_index(i, bound)?;
    }
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedIndexSet(set.to_vec()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(rows: &[&[i64]]) -> Matrix {
        Matrix::from_i64_rows(FieldSpec::Q, rows).unwrap()
    }

    #[test]
    fn submatrix_examples() {
        let i3 = Matrix::identity(3, FieldSpec::Q);
        assert_eq!(
            i3.submatrix(&[0, 1], &[0, 1]).unwrap(),
            Matrix::identity(2, FieldSpec::Q)
        );
        let empty = i3.submatrix(&[], &[]).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (0, 0));
        let a = q(&[&[1, 2], &[3, 4]]);
        assert_eq!(a.submatrix(&[1], &[0]).unwrap(), q(&[&[3]]));
    }

    #[test]
    fn submatrix_errors() {
        let a = Matrix::identity(3, FieldSpec::Q);
        assert_eq!(
            a.submatrix(&[3], &[0]),
            Err(Error::IndexOutOfRange { index: 3, bound: 3 })
        );
        assert!(matches!(
            a.submatrix(&[1, 0], &[0, 1]),
            Err(Error::UnsortedIndexSet(_))
        ));
    }

    #[test]
    fn special_matrices() {
        let f = FieldSpec::Q;
        assert_eq!(Matrix::unit(2, 0, 0, f).unwrap(), q(&[&[1, 0], &[0, 0]]));
        assert!(Matrix::unit(2, 2, 0, f).is_err());
        let swap = Permutation::new(vec![1, 0]).unwrap();
        assert_eq!(Matrix::permutation(&swap, f), q(&[&[0, 1], &[1, 0]]));
        let d = [f.from_i64(2), f.from_i64(3)];
        assert_eq!(Matrix::diagonal(&d, f).unwrap(), q(&[&[2, 0], &[0, 3]]));
        assert_eq!(Matrix::zero(2, 2, f), q(&[&[0, 0], &[0, 0]]));
    }

    #[test]
    fn permutation_matrix_convention() {
        // 3-cycle 0 -> 1 -> 2 -> 0: p_{ij} = 1 iff j = σ⁻¹(i)
        let f = FieldSpec::Q;
        let sigma = Permutation::new(vec![1, 2, 0]).unwrap();
        let p = Matrix::permutation(&sigma, f);
        assert_eq!(p, q(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]));
        // P(σ) E_{i,j} = E_{σ(i), j}
        let e = Matrix::unit(3, 0, 2, f).unwrap();
        assert_eq!(p.mul(&e).unwrap(), Matrix::unit(3, 1, 2, f).unwrap());
    }

    #[test]
    fn matrix_op_examples() {
        let f = FieldSpec::Q;
        let h = q(&[&[1, 2], &[3, 4]]).hadamard(&Matrix::identity(2, f)).unwrap();
        assert_eq!(h, q(&[&[1, 0], &[0, 4]]));
        assert_eq!(
            Matrix::unit(3, 0, 1, f).unwrap().transpose(),
            Matrix::unit(3, 1, 0, f).unwrap()
        );
        let sigma = Permutation::new(vec![2, 0, 1]).unwrap();
        let prod = Matrix::permutation(&sigma, f)
            .mul(&Matrix::permutation(&sigma.inverse(), f))
            .unwrap();
        assert_eq!(prod, Matrix::identity(3, f));
    }

    #[test]
    fn shape_and_field_errors() {
        let a = Matrix::identity(2, FieldSpec::Q);
        let b = Matrix::identity(3, FieldSpec::Q);
        assert!(matches!(a.add(&b), Err(Error::ShapeMismatch(_))));
        assert!(matches!(a.mul(&b), Err(Error::ShapeMismatch(_))));
        let c = Matrix::identity(2, FieldSpec::prime(3).unwrap());
        assert!(matches!(a.hadamard(&c), Err(Error::FieldMismatch { .. })));
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
    }

    #[test]
    fn permutation_group_laws() {
        let f = FieldSpec::prime(3).unwrap();
        for s in Permutation::all(3) {
            for t in Permutation::all(3) {
                let lhs = Matrix::permutation(&s, f)
                    .mul(&Matrix::permutation(&t, f))
                    .unwrap();
                assert_eq!(lhs, Matrix::permutation(&s.compose(&t).unwrap(), f));
            }
            assert!(s.compose(&s.inverse()).unwrap().is_identity());
        }
        assert_eq!(Permutation::all(4).count(), 24);
    }

    proptest::proptest! {
        #[test]
        fn hadamard_laws(vals in proptest::collection::vec(-5i64..5, 27), seed in 0u64..1000) {
            let f = FieldSpec::Q;
            let mk = |o: usize| Matrix::from_fn(3, 3, f, |i, j| f.from_i64(vals[o + 3 * i + j]));
            let (a, b, c) = (mk(0), mk(9), mk(18));
            proptest::prop_assert_eq!(a.hadamard(&b).unwrap(), b.hadamard(&a).unwrap());
            proptest::prop_assert_eq!(
                a.hadamard(&b).unwrap().hadamard(&c).unwrap(),
                a.hadamard(&b.hadamard(&c).unwrap()).unwrap()
            );
            proptest::prop_assert_eq!(a.hadamard(&Matrix::all_ones(3, 3, f)).unwrap(), a.clone());
            proptest::prop_assert_eq!(a.transpose().transpose(), a.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Permutation::random(5, &mut rng);
            let t = Permutation::random(5, &mut rng);
            let lhs = Matrix::permutation(&s, f).mul(&Matrix::permutation(&t, f)).unwrap();
            proptest::prop_assert_eq!(lhs, Matrix::permutation(&s.compose(&t).unwrap(), f));
        }
    }
}
