//! Deciding whether a bijective map sends `Λ^{≤k}` into itself.

use rand::Rng;
use rayon::prelude::*;

use super::decompose::validate_dims;
use super::{decompose, CanonicalPreserver, Decomposition, LinearMap};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::linalg;
use crate::matrix::Matrix;
use crate::permanent::{self, decode, increment, PrkTable, DEFAULT_TABLE_BUDGET};
use crate::sampling::{self, trial_rng};
use crate::subspace::{CanonicalSubspace, Orientation};
use crate::theta::theta_vertices;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Decompose; on failure search units, the vanishing-minor family, and
    /// `samples` random members per source.
    Structural { seed: u64, samples: usize },
    /// Every matrix over `F_p`; `budget` caps `p^(n²)`.
    Exhaustive { budget: u128 },
    /// `count` random members of `Λ^{≤k}`.
    Sample { count: usize, seed: u64 },
}

impl CheckMode {
    pub fn structural(seed: u64) -> Self {
        CheckMode::Structural { seed, samples: 200 }
    }

    pub fn exhaustive() -> Self {
        CheckMode::Exhaustive {
            budget: DEFAULT_TABLE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreserverVerdict {
    Preserver(CanonicalPreserver),
    /// `prk(counterexample) <= k < prk(image)`, with `image = T(counterexample)`.
    NotPreserver { counterexample: Matrix, image: Matrix },
    NotBijective,
    Unknown,
}

impl PreserverVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            PreserverVerdict::Preserver(_) => "Preserver",
            PreserverVerdict::NotPreserver { .. } => "NotPreserver",
            PreserverVerdict::NotBijective => "NotBijective",
            PreserverVerdict::Unknown => "Unknown",
        }
    }

    pub fn is_preserver(&self) -> bool {
        matches!(self, PreserverVerdict::Preserver(_))
    }
}

/// Which source of the structural search produced a counterexample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructuralSearch {
    Units,
    VanishingMinors,
    CanonicalMembers,
    Rejection,
}

pub fn check_preserves(t: &LinearMap, k: usize, mode: CheckMode) -> Result<PreserverVerdict> {
    validate_dims(t.n(), k)?;
    if let CheckMode::Exhaustive { budget } = mode {
        // the table size is the budget check; refuse before inverting anything
        let p = t
            .field()
            .modulus()
            .ok_or_else(|| Error::InvalidField("exhaustive checking needs a prime field".into()))?;
        permanent::table_size(p, t.n(), budget)?;
    }
    if !t.is_bijective() {
        return Ok(PreserverVerdict::NotBijective);
    }
    match mode {
        CheckMode::Structural { seed, samples } => Ok(structural(t, k, seed, samples)?.0),
        CheckMode::Exhaustive { budget } => {
            let table = PrkTable::build(t.field(), t.n(), budget)?;
            check_preserves_with_table(t, k, &table)
        }
        CheckMode::Sample { count, seed } => {
            let mut rng = trial_rng(seed, 0);
            for a in sampling::bounded_prk_members(t.n(), k, t.field(), count, &mut rng) {
                if let Some(v) = counterexample(t, k, &a)? {
                    return Ok(v);
                }
            }
            Ok(PreserverVerdict::Unknown)
        }
    }
}

/// Structural check, also reporting which search stage found the
/// counterexample.
pub fn check_structural(
    t: &LinearMap,
    k: usize,
    seed: u64,
    samples: usize,
) -> Result<(PreserverVerdict, Option<StructuralSearch>)> {
    validate_dims(t.n(), k)?;
    if !t.is_bijective() {
        return Ok((PreserverVerdict::NotBijective, None));
    }
    structural(t, k, seed, samples)
}

fn structural(
    t: &LinearMap,
    k: usize,
    seed: u64,
    samples: usize,
) -> Result<(PreserverVerdict, Option<StructuralSearch>)> {
    if let Decomposition::Canonical(cp) = decompose(t, k)? {
        return Ok((PreserverVerdict::Preserver(cp), None));
    }
    let n = t.n();
    let field = t.field();

    for i in 0..n {
        for j in 0..n {
            if let Some(v) = counterexample(t, k, &Matrix::unit(n, i, j, field)?)? {
                return Ok((v, Some(StructuralSearch::Units)));
            }
        }
    }
    for x in sampling::vanishing_minor_family(n, k, field) {
        if let Some(v) = counterexample(t, k, &x)? {
            return Ok((v, Some(StructuralSearch::VanishingMinors)));
        }
    }
    let mut rng = trial_rng(seed, 0);
    for cs in theta_vertices(n, k) {
        for _ in 0..samples {
            let a = sampling::random_member_of(&cs, n, field, &mut rng);
            let a = if rng.gen_bool(0.5) {
                sampling::random_invariance_transform(&a, &mut rng)
            } else {
                a
            };
            if let Some(v) = counterexample(t, k, &a)? {
                return Ok((v, Some(StructuralSearch::CanonicalMembers)));
            }
        }
    }
    for _ in 0..samples {
        if let Some(a) = sampling::random_bounded_prk(n, k, field, &mut rng, 64) {
            if let Some(v) = counterexample(t, k, &a)? {
                return Ok((v, Some(StructuralSearch::Rejection)));
            }
        }
    }
    Ok((PreserverVerdict::Unknown, None))
}

/// A verified counterexample if `prk(a) <= k < prk(T(a))`.
fn counterexample(t: &LinearMap, k: usize, a: &Matrix) -> Result<Option<PreserverVerdict>> {
    if !permanent::prk_decide_leq(a, k)? {
        return Ok(None);
    }
    let image = t.apply(a)?;
    if permanent::prk_decide_leq(&image, k)? {
        return Ok(None);
    }
    Ok(Some(PreserverVerdict::NotPreserver {
        counterexample: a.clone(),
        image,
    }))
}

const CHUNK: usize = 2048;

/// Exhaustive check against a prebuilt table. Reports the lexicographically
/// least counterexample; when there is none the map must decompose, and the
/// canonical form is returned.
pub fn check_preserves_with_table(t: &LinearMap, k: usize, table: &PrkTable) -> Result<PreserverVerdict> {
    let n = t.n();
    validate_dims(n, k)?;
    let p = table.modulus();
    if t.field().modulus() != Some(p) || table.order() != n {
        return Err(Error::ShapeMismatch(format!(
            "table covers {}x{} over Fp:{p}, map acts over {}",
            table.order(),
            table.order(),
            t.field()
        )));
    }
    if !t.is_bijective() {
        return Ok(PreserverVerdict::NotBijective);
    }
    let nn = n * n;
    // columns[c] = vec(T(E_c)) as residues
    let columns: Vec<Vec<u64>> = (0..nn)
        .map(|c| {
            (0..nn)
                .map(|r| t.matrix().get(r, c).residue().expect("prime field"))
                .collect()
        })
        .collect();
    let total = table.len();
    let chunks = total.div_ceil(CHUNK);
    let hit = (0..chunks).into_par_iter().find_map_first(|chunk| {
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut digits = decode(start as u64, p, nn);
        let mut image = vec![0u64; nn];
        for (d, col) in digits.iter().zip(&columns) {
            for (x, v) in image.iter_mut().zip(col) {
                *x = (*x + d * v) % p;
            }
        }
        for idx in start..end {
            if table.rank_at(idx) <= k && table.rank_at(table.index_of(&image)) > k {
                return Some(idx);
            }
            let changed = increment(&mut digits, p);
            for col in &columns[nn - changed..] {
                for (x, v) in image.iter_mut().zip(col) {
                    *x += v;
                    if *x >= p {
                        *x -= p;
                    }
                }
            }
        }
        None
    });
    match hit {
        Some(idx) => {
            let a = table.matrix_at(idx);
            let verdict = counterexample(t, k, &a)?.ok_or_else(|| {
                Error::AssertionFailure(format!("table counterexample failed re-verification: {a}"))
            })?;
            Ok(verdict)
        }
        None => match decompose(t, k)? {
            Decomposition::Canonical(cp) => Ok(PreserverVerdict::Preserver(cp)),
            Decomposition::Rejected(why) => Err(Error::AssertionFailure(format!(
                "no counterexample exists but decomposition failed: {}",
                why.reason()
            ))),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqualityVerdict {
    /// `E_ij` is not in the image of `T`.
    Unreachable { i: usize, j: usize },
    /// `E_ij` has preimages, but none found in `Λ^{≤k}`.
    NoBoundedPreimage { i: usize, j: usize },
    /// Every unit has a bounded preimage, so `T` is surjective and hence
    /// bijective; the verdict of the bijective check follows.
    Derived(PreserverVerdict),
}

/// Test of `T(Λ^{≤k}) = Λ^{≤k}` without assuming bijectivity: each matrix
/// unit lies in `Λ^{≤k}` and must have a preimage there. Over `F_p` the
/// preimage space is searched up to `budget` elements; over Q the particular
/// solution and small kernel combinations are tried.
pub fn check_equality_variant(t: &LinearMap, k: usize, mode: CheckMode, budget: u128) -> Result<EqualityVerdict> {
    let n = t.n();
    validate_dims(n, k)?;
    let field = t.field();
    for i in 0..n {
        for j in 0..n {
            let target = Matrix::unit(n, i, j, field)?;
            let Some((particular, kernel)) = linalg::solve(t.matrix(), target.entries())? else {
                return Ok(EqualityVerdict::Unreachable { i, j });
            };
            if !has_bounded_preimage(n, k, &particular, &kernel, budget)? {
                return Ok(EqualityVerdict::NoBoundedPreimage { i, j });
            }
        }
    }
    if !t.is_bijective() {
        return Err(Error::AssertionFailure("all units reached but map is not surjective".into()));
    }
    Ok(EqualityVerdict::Derived(check_preserves(t, k, mode)?))
}

fn has_bounded_preimage(
    n: usize,
    k: usize,
    particular: &[Scalar],
    kernel: &[Vec<Scalar>],
    budget: u128,
) -> Result<bool> {
    let field = particular[0].field();
    let nn = n * n;
    let candidate = |coeffs: &[Scalar]| -> Result<bool> {
        let shift = linalg::combine(field, coeffs, kernel, nn);
        let x: Vec<Scalar> = particular.iter().zip(&shift).map(|(a, b)| a + b).collect();
        permanent::prk_decide_leq(&Matrix::new(n, n, field, x)?, k)
    };
    let dim = kernel.len();
    let coefficient_range: Vec<Scalar> = match field.modulus() {
        Some(p) => (0..p).map(|v| Scalar::Mod { value: v, p }).collect(),
        None => (-2..=2).map(|v| field.from_i64(v)).collect(),
    };
    let r = coefficient_range.len() as u128;
    let total = r.checked_pow(dim as u32).unwrap_or(u128::MAX).min(budget);
    for idx in 0..total {
        let coeffs: Vec<Scalar> = decode(idx as u64, r as u64, dim)
            .into_iter()
            .map(|d| coefficient_range[d as usize].clone())
            .collect();
        if candidate(&coeffs)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A map whose image lies in `V_S^row`: `A ↦` the matrix keeping rows of `S`
/// after folding every other row into the first row of `S`. Used to show the
/// equality test is stronger than the inclusion.
pub fn folding_map(n: usize, support: &[usize], field: crate::field::FieldSpec) -> Result<LinearMap> {
    let cs = CanonicalSubspace::new(Orientation::Row, support.to_vec(), n)?;
    let first = support[0];
    LinearMap::from_unit_images(n, field, |i, j| {
        let row = if cs.allows(i, 0) { i } else { first };
        Matrix::unit(n, row, j, field)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::preserver::compose_canonical;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f3() -> FieldSpec {
        FieldSpec::prime(3).unwrap()
    }

    fn diagonal_pair_map(f: FieldSpec) -> LinearMap {
        let bad = Matrix::from_i64_rows(f, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]]).unwrap();
        LinearMap::identity(3, f).with_unit_image(0, 0, &bad).unwrap()
    }

    #[test]
    fn canonical_maps_pass_exhaustively() {
        let table = PrkTable::build(f3(), 3, DEFAULT_TABLE_BUDGET).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=2 {
            for _ in 0..3 {
                let cp = CanonicalPreserver::random(3, f3(), &mut rng);
                let v = check_preserves_with_table(&compose_canonical(&cp), k, &table).unwrap();
                assert_eq!(v, PreserverVerdict::Preserver(cp.normalized()));
            }
        }
    }

    #[test]
    fn non_monomial_unit_is_its_own_counterexample() {
        let t = diagonal_pair_map(f3());
        let e11 = Matrix::unit(3, 0, 0, f3()).unwrap();
        let (v, stage) = check_structural(&t, 1, 0, 10).unwrap();
        assert_eq!(stage, Some(StructuralSearch::Units));
        match v {
            PreserverVerdict::NotPreserver { counterexample, .. } => assert_eq!(counterexample, e11),
            other => panic!("{other:?}"),
        }
        // exhaustive finds the lexicographically least one
        match check_preserves(&t, 1, CheckMode::exhaustive()).unwrap() {
            PreserverVerdict::NotPreserver { counterexample, image } => {
                assert!(permanent::prk_decide_leq(&counterexample, 1).unwrap());
                assert_eq!(permanent::prk(&image).unwrap().rank, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rank_one_coefficients_needed() {
        // monomial with pattern intact but coefficients not a rank-one product
        let f = f3();
        let twice = Matrix::unit(3, 1, 1, f).unwrap().scale(&f.from_i64(2)).unwrap();
        let t = LinearMap::identity(3, f).with_unit_image(1, 1, &twice).unwrap();
        for k in 1..=2 {
            let ex = check_preserves(&t, k, CheckMode::exhaustive()).unwrap();
            let st = check_preserves(&t, k, CheckMode::structural(4)).unwrap();
            assert_eq!(ex.label(), "NotPreserver");
            assert_eq!(st.label(), "NotPreserver");
        }
    }

    #[test]
    fn singular_and_budget() {
        let z = LinearMap::zero(3, f3());
        assert_eq!(check_preserves(&z, 1, CheckMode::structural(0)).unwrap(), PreserverVerdict::NotBijective);
        let id = LinearMap::identity(3, FieldSpec::prime(5).unwrap());
        assert!(matches!(
            check_preserves(&id, 1, CheckMode::Exhaustive { budget: 1000 }),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            check_preserves(&LinearMap::identity(3, FieldSpec::Q), 1, CheckMode::exhaustive()),
            Err(Error::InvalidField(_))
        ));
    }

    #[test]
    fn sample_mode() {
        let t = diagonal_pair_map(FieldSpec::Q);
        let v = check_preserves(&t, 1, CheckMode::Sample { count: 200, seed: 3 }).unwrap();
        assert_eq!(v.label(), "NotPreserver");
        let id = LinearMap::identity(3, FieldSpec::Q);
        let v = check_preserves(&id, 1, CheckMode::Sample { count: 50, seed: 3 }).unwrap();
        assert_eq!(v, PreserverVerdict::Unknown);
    }

    #[test]
    fn equality_variant() {
        let f = f3();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cp = CanonicalPreserver::random(3, f, &mut rng);
        let got = check_equality_variant(&compose_canonical(&cp), 1, CheckMode::structural(0), 1 << 16).unwrap();
        assert_eq!(got, EqualityVerdict::Derived(PreserverVerdict::Preserver(cp.normalized())));

        let fold = folding_map(3, &[0, 2], f).unwrap();
        assert!(matches!(
            check_equality_variant(&fold, 2, CheckMode::structural(0), 1 << 16).unwrap(),
            EqualityVerdict::Unreachable { i: 1, .. }
        ));
        assert_eq!(
            check_equality_variant(&LinearMap::zero(3, f), 1, CheckMode::structural(0), 1 << 16).unwrap(),
            EqualityVerdict::Unreachable { i: 0, j: 0 }
        );
    }
}
