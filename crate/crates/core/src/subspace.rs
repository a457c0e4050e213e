//! Linear subspaces of `Mat_n(F)` and the maximal subspaces of matrices with
//! bounded permanental rank.
//!
//! Matrices are vectorized row-major; subspaces are compared through the
//! reduced row-echelon form of their vectorized bases.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::kernel::{self, ModRing};
use crate::linalg::{self, Echelon};
use crate::matrix::{check_index_set, Matrix};
use crate::permanent::{self, decode};

/// Default cap on `p^dim` for exhaustive span enumeration.
pub const DEFAULT_SPAN_BUDGET: u128 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Row,
    Col,
}

/// `V_S^row` (entries vanish outside rows `S`) or `V_S^col`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalSubspace {
    pub orientation: Orientation,
    support: Vec<usize>,
}

impl CanonicalSubspace {
    /// `support` is 0-based and strictly ascending, `1 <= |S| <= n`.
    pub fn new(orientation: Orientation, support: Vec<usize>, n: usize) -> Result<Self> {
        check_index_set(&support, n)?;
        if support.is_empty() {
            return Err(Error::InvalidRange("support must be nonempty".into()));
        }
        Ok(CanonicalSubspace {
            orientation,
            support,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Whether entry `(i, j)` may be nonzero in this subspace.
    pub fn allows(&self, i: usize, j: usize) -> bool {
        match self.orientation {
            Orientation::Row => self.support.binary_search(&i).is_ok(),
            Orientation::Col => self.support.binary_search(&j).is_ok(),
        }
    }
}

impl fmt::Display for CanonicalSubspace {
    /// `R{1,3}` / `C{2,4}` with 1-based indices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.orientation {
            Orientation::Row => 'R',
            Orientation::Col => 'C',
        };
        let s: Vec<String> = self.support.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{tag}{{{}}}", s.join(","))
    }
}

/// A subspace of `Mat_n(F)` given by linearly independent matrices.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    n: usize,
    field: FieldSpec,
    basis: Vec<Matrix>,
}

impl SubspaceBasis {
    /// Wraps an independent family; dependent input is an error.
    pub fn new(n: usize, field: FieldSpec, basis: Vec<Matrix>) -> Result<Self> {
        let v = SubspaceBasis { n, field, basis };
        v.check_members()?;
        if v.echelon().rank() != v.basis.len() {
            return Err(Error::LinearlyDependent);
        }
        Ok(v)
    }

    /// The span of arbitrary generators, stored as its echelon basis.
    pub fn span(n: usize, field: FieldSpec, generators: &[Matrix]) -> Result<Self> {
        let g = SubspaceBasis {
            n,
            field,
            basis: generators.to_vec(),
        };
        g.check_members()?;
        Ok(g.from_echelon(g.echelon()))
    }

    pub fn zero(n: usize, field: FieldSpec) -> Self {
        SubspaceBasis {
            n,
            field,
            basis: Vec::new(),
        }
    }

    fn check_members(&self) -> Result<()> {
        for m in &self.basis {
            if m.field() != self.field {
                return Err(Error::FieldMismatch {
                    left: self.field,
                    right: m.field(),
                });
            }
            if (m.rows(), m.cols()) != (self.n, self.n) {
                return Err(Error::ShapeMismatch(format!(
                    "{}x{} member in a subspace of {}x{} matrices",
                    m.rows(),
                    m.cols(),
                    self.n,
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn vectors(&self) -> Vec<Vec<Scalar>> {
        self.basis.iter().map(|m| m.entries().to_vec()).collect()
    }

    pub fn echelon(&self) -> Echelon {
        linalg::rref(self.vectors(), self.n * self.n)
    }

    fn from_echelon(&self, e: Echelon) -> SubspaceBasis {
        let n = self.n;
        let basis = e
            .rows
            .into_iter()
            .map(|r| Matrix::new(n, n, self.field, r).expect("echelon row has n^2 entries"))
            .collect();
        SubspaceBasis {
            n,
            field: self.field,
            basis,
        }
    }

    fn check_compatible(&self, other: &SubspaceBasis) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field,
                right: other.field,
            });
        }
        if self.n != other.n {
            return Err(Error::ShapeMismatch(format!(
                "subspaces of {}x{} and {}x{} matrices",
                self.n, self.n, other.n, other.n
            )));
        }
        Ok(())
    }

    /// `U ∩ V` by the Zassenhaus method: reduce `[u | u]` and `[v | 0]`;
    /// rows whose left half vanishes span the intersection.
    pub fn intersect(&self, other: &SubspaceBasis) -> Result<SubspaceBasis> {
        self.check_compatible(other)?;
        let m = self.n * self.n;
        let zero = self.field.zero();
        let mut rows = Vec::with_capacity(self.dim() + other.dim());
        for u in self.vectors() {
            let mut r = u.clone();
            r.extend(u);
            rows.push(r);
        }
        for v in other.vectors() {
            let mut r = v;
            r.extend(std::iter::repeat(zero.clone()).take(m));
            rows.push(r);
        }
        let e = linalg::rref(rows, 2 * m);
        let right: Vec<Vec<Scalar>> = e
            .rows
            .into_iter()
            .zip(e.pivots)
            .filter(|(_, pivot)| *pivot >= m)
            .map(|(r, _)| r[m..].to_vec())
            .collect();
        let ech = linalg::rref(right, m);
        Ok(self.from_echelon(ech))
    }

    pub fn sum(&self, other: &SubspaceBasis) -> Result<SubspaceBasis> {
        self.check_compatible(other)?;
        let mut gens = self.basis.clone();
        gens.extend(other.basis.iter().cloned());
        SubspaceBasis::span(self.n, self.field, &gens)
    }

    /// Equality as sets, via identical reduced echelon forms.
    pub fn equals(&self, other: &SubspaceBasis) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.dim() == other.dim() && self.echelon() == other.echelon())
    }

    pub fn contains(&self, a: &Matrix) -> Result<bool> {
        let single = SubspaceBasis::span(self.n, self.field, std::slice::from_ref(a))?;
        Ok(self.sum(&single)?.dim() == self.dim())
    }

    /// `Σ c_i B_i` for coefficients in basis order.
    pub fn combination(&self, coeffs: &[Scalar]) -> Matrix {
        let m = self.n * self.n;
        let v = linalg::combine(self.field, coeffs, &self.vectors(), m);
        Matrix::new(self.n, self.n, self.field, v).expect("combination shape")
    }
}

/// Basis `{E_ij : i ∈ S}` (Row) or `{E_ij : j ∈ S}` (Col), row-major order.
pub fn canonical_basis(cs: &CanonicalSubspace, n: usize, field: FieldSpec) -> Result<SubspaceBasis> {
    check_index_set(cs.support(), n)?;
    let mut basis = Vec::with_capacity(cs.support().len() * n);
    for i in 0..n {
        for j in 0..n {
            if cs.allows(i, j) {
                basis.push(Matrix::unit(n, i, j, field)?);
            }
        }
    }
    Ok(SubspaceBasis { n, field, basis })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Yes,
    No(Matrix),
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MembershipMode {
    /// Every member of the span; prime fields with `p^dim <= budget` only.
    Exhaustive { budget: u128 },
    /// Random coefficient vectors: uniform over `F_p`, or uniform in
    /// `{-3, .., 3}` over Q.
    Sample { count: usize, seed: u64 },
}

/// Whether every member of `V` has `prk <= k`. Exhaustive mode reports the
/// first offending member in lexicographic order of coefficient vectors.
pub fn is_subspace_in_lambda_leq_k(
    v: &SubspaceBasis,
    k: usize,
    mode: MembershipMode,
) -> Result<Membership> {
    let n = v.n;
    if k > n {
        return Err(Error::InvalidRange(format!("k = {k} exceeds n = {n}")));
    }
    if k == n {
        return Ok(Membership::Yes);
    }
    match mode {
        MembershipMode::Exhaustive { budget } => {
            let p = v.field.modulus().ok_or_else(|| {
                Error::InvalidField("exhaustive span enumeration needs a prime field".into())
            })?;
            let dim = v.dim();
            let total = (p as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
            if total > budget {
                return Err(Error::BudgetExceeded {
                    required: total,
                    budget,
                });
            }
            let ring = ModRing { p };
            let vectors: Vec<Vec<u64>> = v
                .basis
                .iter()
                .map(|m| m.entries().iter().filter_map(Scalar::residue).collect())
                .collect();
            let hit = (0..total as u64).into_par_iter().find_first(|&idx| {
                let coeffs = decode(idx, p, dim);
                let mut acc = vec![0u64; n * n];
                for (c, vec) in coeffs.iter().zip(&vectors) {
                    if *c == 0 {
                        continue;
                    }
                    for (a, x) in acc.iter_mut().zip(vec) {
                        *a = (*a + c * x) % p;
                    }
                }
                kernel::first_nonzero_minor(&ring, &acc, n, k + 1).is_some()
            });
            Ok(match hit {
                Some(idx) => {
                    let coeffs: Vec<Scalar> = decode(idx, p, dim)
                        .into_iter()
                        .map(|c| Scalar::Mod { value: c, p })
                        .collect();
                    Membership::No(v.combination(&coeffs))
                }
                None => Membership::Yes,
            })
        }
        MembershipMode::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let coeffs: Vec<Scalar> = (0..v.dim())
                    .map(|_| random_coefficient(v.field, &mut rng))
                    .collect();
                let a = v.combination(&coeffs);
                if !permanent::prk_decide_leq(&a, k)? {
                    return Ok(Membership::No(a));
                }
            }
            Ok(Membership::Unknown)
        }
    }
}

fn random_coefficient<R: Rng>(field: FieldSpec, rng: &mut R) -> Scalar {
    match field.modulus() {
        Some(p) => Scalar::Mod {
            value: rng.gen_range(0..p),
            p,
        },
        None => field.from_i64(rng.gen_range(-3..=3)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "classification", content = "S")]
pub enum Classification {
    /// 0-based support of the matching `V_S^row`.
    Row(Vec<usize>),
    Col(Vec<usize>),
    NotCanonical,
}

/// Recognizes `V_S^row` / `V_S^col` among subspaces of dimension `kn`.
/// Any other dimension is `NotCanonical` since maximal subspaces have
/// dimension exactly `kn`.
pub fn classify_maximal(v: &SubspaceBasis, k: usize) -> Classification {
    let n = v.n;
    if k == 0 || k > n || v.dim() != k * n {
        return Classification::NotCanonical;
    }
    let mut rows = vec![false; n];
    let mut cols = vec![false; n];
    for m in &v.basis {
        for (i, j) in m.support() {
            rows[i] = true;
            cols[j] = true;
        }
    }
    let pick = |flags: &[bool]| -> Vec<usize> {
        flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i)
            .collect()
    };
    for (orientation, support) in [(Orientation::Row, pick(&rows)), (Orientation::Col, pick(&cols))] {
        if support.len() != k {
            continue;
        }
        let cs = CanonicalSubspace::new(orientation, support.clone(), n).expect("valid support");
        let canon = canonical_basis(&cs, n, v.field).expect("valid support");
        if v.equals(&canon).unwrap_or(false) {
            return match orientation {
                Orientation::Row => Classification::Row(support),
                Orientation::Col => Classification::Col(support),
            };
        }
    }
    Classification::NotCanonical
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    fn f3() -> FieldSpec {
        FieldSpec::prime(3).unwrap()
    }

    fn canon(o: Orientation, s: &[usize], n: usize, f: FieldSpec) -> SubspaceBasis {
        canonical_basis(&CanonicalSubspace::new(o, s.to_vec(), n).unwrap(), n, f).unwrap()
    }

    #[test]
    fn canonical_basis_examples() {
        let f = FieldSpec::Q;
        let v = canon(Orientation::Row, &[0], 3, f);
        assert_eq!(v.dim(), 3);
        let want: Vec<Matrix> = (0..3).map(|j| Matrix::unit(3, 0, j, f).unwrap()).collect();
        assert_eq!(v.basis(), &want[..]);
        assert_eq!(canon(Orientation::Col, &[0, 1], 3, f).dim(), 6);
        assert_eq!(canon(Orientation::Row, &[0, 1, 2], 3, f).dim(), 9);
        assert!(CanonicalSubspace::new(Orientation::Row, vec![3], 3).is_err());
        assert!(CanonicalSubspace::new(Orientation::Row, vec![], 3).is_err());
        assert_eq!(
            CanonicalSubspace::new(Orientation::Col, vec![1, 3], 4).unwrap().to_string(),
            "C{2,4}"
        );
    }

    #[test]
    fn intersection_examples() {
        let f = FieldSpec::Q;
        let a = canon(Orientation::Row, &[0, 1], 4, f);
        let b = canon(Orientation::Row, &[1, 2], 4, f);
        assert_eq!(a.intersect(&b).unwrap().dim(), 4);
        let c = canon(Orientation::Col, &[2, 3], 4, f);
        assert_eq!(a.intersect(&c).unwrap().dim(), 4);
        let i = a.intersect(&a).unwrap();
        assert!(i.equals(&a).unwrap());
        assert!(a.intersect(&canon(Orientation::Row, &[0], 3, f)).is_err());
    }

    #[test]
    fn intersection_dimensions_follow_support_overlap() {
        let f = f3();
        for n in 2..=5 {
            for k in 1..n {
                let sets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
                for s in &sets {
                    for t in &sets {
                        let common = s.iter().filter(|x| t.contains(x)).count();
                        let rr = canon(Orientation::Row, s, n, f)
                            .intersect(&canon(Orientation::Row, t, n, f))
                            .unwrap();
                        assert_eq!(rr.dim(), n * common);
                        let cc = canon(Orientation::Col, s, n, f)
                            .intersect(&canon(Orientation::Col, t, n, f))
                            .unwrap();
                        assert_eq!(cc.dim(), n * common);
                        let rc = canon(Orientation::Row, s, n, f)
                            .intersect(&canon(Orientation::Col, t, n, f))
                            .unwrap();
                        assert_eq!(rc.dim(), k * k);
                    }
                }
            }
        }
    }

    #[test]
    fn dependent_basis_rejected() {
        let f = FieldSpec::Q;
        let e = Matrix::unit(2, 0, 0, f).unwrap();
        assert_eq!(
            SubspaceBasis::new(2, f, vec![e.clone(), e.scale(&f.from_i64(2)).unwrap()]).unwrap_err(),
            Error::LinearlyDependent
        );
        assert_eq!(SubspaceBasis::span(2, f, &[e.clone(), e]).unwrap().dim(), 1);
    }

    #[test]
    fn contains_matrix() {
        let f = FieldSpec::Q;
        let v = canon(Orientation::Row, &[1], 3, f);
        assert!(v.contains(&Matrix::unit(3, 1, 2, f).unwrap()).unwrap());
        assert!(!v.contains(&Matrix::unit(3, 0, 2, f).unwrap()).unwrap());
    }

    #[test]
    fn membership_examples() {
        let f = f3();
        let budget = DEFAULT_SPAN_BUDGET;
        for n in 3..=4 {
            for k in 1..n {
                let v = canon(Orientation::Row, &(0..k).collect::<Vec<_>>(), n, f);
                if (3u128).pow(v.dim() as u32) <= budget {
                    assert_eq!(
                        is_subspace_in_lambda_leq_k(&v, k, MembershipMode::Exhaustive { budget }).unwrap(),
                        Membership::Yes
                    );
                }
            }
        }
        let id = SubspaceBasis::new(3, f, vec![Matrix::identity(3, f)]).unwrap();
        assert_eq!(
            is_subspace_in_lambda_leq_k(&id, 2, MembershipMode::Exhaustive { budget }).unwrap(),
            Membership::No(Matrix::identity(3, f))
        );
        let e11_e22 = Matrix::unit(3, 0, 0, f)
            .unwrap()
            .add(&Matrix::unit(3, 1, 1, f).unwrap())
            .unwrap();
        let v = SubspaceBasis::new(3, f, vec![e11_e22.clone(), Matrix::unit(3, 0, 1, f).unwrap()]).unwrap();
        assert_eq!(
            is_subspace_in_lambda_leq_k(&v, 1, MembershipMode::Exhaustive { budget }).unwrap(),
            Membership::No(e11_e22)
        );
    }

    #[test]
    fn membership_modes_and_budget() {
        let q = FieldSpec::Q;
        let v = canon(Orientation::Col, &[0, 2], 3, q);
        assert!(is_subspace_in_lambda_leq_k(&v, 2, MembershipMode::Exhaustive { budget: 1 << 20 }).is_err());
        assert_eq!(
            is_subspace_in_lambda_leq_k(&v, 2, MembershipMode::Sample { count: 50, seed: 1 }).unwrap(),
            Membership::Unknown
        );
        let id = SubspaceBasis::new(3, q, vec![Matrix::identity(3, q)]).unwrap();
        assert!(matches!(
            is_subspace_in_lambda_leq_k(&id, 2, MembershipMode::Sample { count: 50, seed: 1 }).unwrap(),
            Membership::No(_)
        ));
        let big = canon(Orientation::Row, &[0, 1, 2], 4, f3());
        assert!(matches!(
            is_subspace_in_lambda_leq_k(&big, 3, MembershipMode::Exhaustive { budget: 1000 }),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn classify_round_trip() {
        let f = FieldSpec::Q;
        let v = canon(Orientation::Row, &[0, 2], 3, f);
        assert_eq!(classify_maximal(&v, 2), Classification::Row(vec![0, 2]));
        assert_eq!(classify_maximal(&v, 1), Classification::NotCanonical);
        let w = canon(Orientation::Col, &[1], 3, f);
        assert_eq!(classify_maximal(&w, 1), Classification::Col(vec![1]));
    }

    #[test]
    fn classify_after_change_of_basis() {
        // V_{2}^col with basis mixed by an invertible 3x3 change of coordinates
        let f = FieldSpec::Q;
        let e: Vec<Matrix> = (0..3).map(|i| Matrix::unit(3, i, 1, f).unwrap()).collect();
        let mix = |c: [i64; 3]| {
            e.iter()
                .zip(c)
                .map(|(m, c)| m.scale(&f.from_i64(c)).unwrap())
                .reduce(|a, b| a.add(&b).unwrap())
                .unwrap()
        };
        let basis = vec![mix([1, 2, 0]), mix([0, 1, -1]), mix([3, 0, 1])];
        let v = SubspaceBasis::new(3, f, basis).unwrap();
        assert_eq!(classify_maximal(&v, 1), Classification::Col(vec![1]));
    }
}
