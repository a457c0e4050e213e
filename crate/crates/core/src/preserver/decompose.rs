//! Recovering `(D1, σ1, flag, σ2, D2)` from the matrix of a linear map.

use serde::Serialize;

use super::{compose_canonical, CanonicalPreserver, LinearMap};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::json::MatrixDoc;
use crate::matrix::{Matrix, Permutation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    Canonical(CanonicalPreserver),
    Rejected(DecomposeFailure),
}

impl Decomposition {
    pub fn canonical(&self) -> Option<&CanonicalPreserver> {
        match self {
            Decomposition::Canonical(cp) => Some(cp),
            Decomposition::Rejected(_) => None,
        }
    }
}

/// Why a bijective map has no canonical form. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecomposeFailure {
    /// `T(E_ij)` is not a nonzero multiple of a single matrix unit.
    UnitImageNotMonomial { i: usize, j: usize, image: Matrix },
    /// Unit images are monomial, but the index map is neither
    /// `(i, j) ↦ (σ1(i), τ(j))` nor `(i, j) ↦ (σ1(j), τ(i))`.
    NotMonomialPattern,
    /// The coefficient matrix in target coordinates has a nonzero 2x2 minor
    /// on rows `a, c` and columns `b, d`.
    HadamardNotRankOne { a: usize, c: usize, b: usize, d: usize },
}

impl DecomposeFailure {
    pub fn reason(&self) -> &'static str {
        match self {
            DecomposeFailure::UnitImageNotMonomial { .. } => "UnitImageNotMonomial",
            DecomposeFailure::NotMonomialPattern => "NotMonomialPattern",
            DecomposeFailure::HadamardNotRankOne { .. } => "HadamardNotRankOne",
        }
    }

    pub fn to_doc(&self) -> FailureDoc {
        let mut doc = FailureDoc {
            reason: self.reason(),
            unit: None,
            image: None,
            minor: None,
        };
        match self {
            DecomposeFailure::UnitImageNotMonomial { i, j, image } => {
                doc.unit = Some([i + 1, j + 1]);
                doc.image = Some(MatrixDoc::from_matrix(image));
            }
            DecomposeFailure::NotMonomialPattern => {}
            DecomposeFailure::HadamardNotRankOne { a, c, b, d } => {
                doc.minor = Some([a + 1, c + 1, b + 1, d + 1]);
            }
        }
        doc
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FailureDoc {
    pub reason: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<MatrixDoc>,
    /// Rows `a, c` and columns `b, d` of the offending minor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minor: Option<[usize; 4]>,
}

pub(crate) fn validate_dims(n: usize, k: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidRange(format!("need 1 <= k <= n-1, got k = {k}, n = {n}")));
    }
    Ok(())
}

/// Canonical form of a bijective map, or the first structural obstruction.
///
/// The returned tuple is normalized (`d1[0] = 1`) and recomposes to `t`
/// exactly. `k` only selects the problem; the procedure is the same for
/// every `1 <= k <= n-1`.
pub fn decompose(t: &LinearMap, k: usize) -> Result<Decomposition> {
    let n = t.n();
    validate_dims(n, k)?;
    if !t.is_bijective() {
        return Err(Error::NotBijective);
    }
    let field = t.field();

    // (a, b, c) with T(E_ij) = c E_ab
    let mut targets = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let image = t.unit_image(i, j);
            let support = image.support();
            if support.len() != 1 {
                return Ok(Decomposition::Rejected(DecomposeFailure::UnitImageNotMonomial { i, j, image }));
            }
            let (a, b) = support[0];
            targets.push((a, b, image.get(a, b).clone()));
        }
    }
    let at = |i: usize, j: usize| &targets[i * n + j];

    let Some((transpose, row_map, col_map)) = [false, true]
        .into_iter()
        .find_map(|flag| index_pattern(n, flag, |i, j| (at(i, j).0, at(i, j).1)).map(|(r, c)| (flag, r, c)))
    else {
        return Ok(Decomposition::Rejected(DecomposeFailure::NotMonomialPattern));
    };

    let mut coeff = vec![field.zero(); n * n];
    for &(a, b, ref c) in &targets {
        coeff[a * n + b] = c.clone();
    }
    let c = |a: usize, b: usize| &coeff[a * n + b];
    for a in 0..n {
        for cc in a + 1..n {
            for b in 0..n {
                for d in b + 1..n {
                    if c(a, b) * c(cc, d) != c(a, d) * c(cc, b) {
                        return Ok(Decomposition::Rejected(DecomposeFailure::HadamardNotRankOne {
                            a,
                            c: cc,
                            b,
                            d,
                        }));
                    }
                }
            }
        }
    }

    let base_inv = c(0, 0).inv()?;
    let d1: Vec<Scalar> = (0..n).map(|a| c(a, 0) * &base_inv).collect();
    let d2: Vec<Scalar> = (0..n).map(|b| c(0, b).clone()).collect();
    // column targets are σ2⁻¹ of the source index
    let sigma1 = Permutation::new(row_map).map_err(|e| Error::AssertionFailure(e.to_string()))?;
    let sigma2 = Permutation::new(col_map)
        .map_err(|e| Error::AssertionFailure(e.to_string()))?
        .inverse();
    let cp = CanonicalPreserver::new(d1, sigma1, transpose, sigma2, d2)?;
    if &compose_canonical(&cp) != t {
        return Err(Error::AssertionFailure("decomposition does not recompose to the input".into()));
    }
    Ok(Decomposition::Canonical(cp))
}

/// For `flag = false`, checks that the target row depends only on `i` and
/// the target column only on `j`; for `flag = true`, the other way round.
/// Returns the two index maps when both are bijections.
fn index_pattern(
    n: usize,
    flag: bool,
    target: impl Fn(usize, usize) -> (usize, usize),
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut rows = vec![usize::MAX; n];
    let mut cols = vec![usize::MAX; n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = target(i, j);
            let (ri, ci) = if flag { (j, i) } else { (i, j) };
            for (slot, v) in [(&mut rows[ri], a), (&mut cols[ci], b)] {
                if *slot == usize::MAX {
                    *slot = v;
                } else if *slot != v {
                    return None;
                }
            }
        }
    }
    let is_perm = |m: &[usize]| {
        let mut seen = vec![false; n];
        m.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
    };
    (is_perm(&rows) && is_perm(&cols)).then_some((rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_transposition() {
        let f = FieldSpec::Q;
        let id = decompose(&LinearMap::identity(3, f), 1).unwrap();
        assert_eq!(id, Decomposition::Canonical(CanonicalPreserver::identity(3, f)));
        let tr = decompose(&LinearMap::transposition(3, f), 2).unwrap();
        let cp = tr.canonical().unwrap();
        assert!(cp.transpose());
        assert!(cp.sigma1().is_identity() && cp.sigma2().is_identity());
        assert!(cp.d1().iter().chain(cp.d2()).all(Scalar::is_one));
    }

    #[test]
    fn non_monomial_unit_image() {
        let f = FieldSpec::Q;
        let bad = Matrix::from_i64_rows(f, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]).unwrap();
        let t = LinearMap::identity(3, f).with_unit_image(0, 0, &bad).unwrap();
        assert!(t.is_bijective());
        match decompose(&t, 1).unwrap() {
            Decomposition::Rejected(DecomposeFailure::UnitImageNotMonomial { i: 0, j: 0, image }) => {
                assert_eq!(image, bad)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn swapped_units_break_the_pattern() {
        let f = FieldSpec::prime(3).unwrap();
        let t = LinearMap::identity(3, f)
            .with_unit_image(0, 0, &Matrix::unit(3, 0, 1, f).unwrap())
            .unwrap()
            .with_unit_image(0, 1, &Matrix::unit(3, 0, 0, f).unwrap())
            .unwrap();
        assert_eq!(
            decompose(&t, 1).unwrap(),
            Decomposition::Rejected(DecomposeFailure::NotMonomialPattern)
        );
    }

    #[test]
    fn coefficients_not_rank_one() {
        let f = FieldSpec::Q;
        let twice = Matrix::unit(3, 1, 1, f).unwrap().scale(&f.from_i64(2)).unwrap();
        let t = LinearMap::identity(3, f).with_unit_image(1, 1, &twice).unwrap();
        assert_eq!(
            decompose(&t, 2).unwrap(),
            Decomposition::Rejected(DecomposeFailure::HadamardNotRankOne { a: 0, c: 1, b: 0, d: 1 })
        );
    }

    #[test]
    fn refuses_small_or_singular_inputs() {
        let f = FieldSpec::Q;
        assert_eq!(decompose(&LinearMap::identity(2, f), 1), Err(Error::DimensionTooSmall(2)));
        assert!(matches!(decompose(&LinearMap::identity(3, f), 3), Err(Error::InvalidRange(_))));
        assert!(matches!(decompose(&LinearMap::identity(3, f), 0), Err(Error::InvalidRange(_))));
        assert_eq!(decompose(&LinearMap::zero(3, f), 1), Err(Error::NotBijective));
    }

    #[test]
    fn round_trip_with_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for field in [FieldSpec::prime(5).unwrap(), FieldSpec::Q] {
            for n in 3..=5 {
                for _ in 0..10 {
                    let cp = CanonicalPreserver::random(n, field, &mut rng);
                    let got = decompose(&compose_canonical(&cp), 1).unwrap();
                    assert_eq!(got.canonical(), Some(&cp.normalized()));
                }
            }
        }
    }
}
