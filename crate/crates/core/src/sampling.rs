//! Seeded random generators for matrices, permutations and members of
//! `Λ^{≤k}`.
//!
//! Members of canonical subspaces pushed through rank-invariant operations do
//! not cover all of `Λ^{≤k}` (the rank-`k` matrices built from a vanishing
//! 2x2 permanent lie in no `V_S^row` or `V_S^col`), so [`bounded_prk_members`]
//! mixes three sources: transformed canonical-subspace members, the
//! vanishing-minor family of [`vanishing_minor_family`], and rejection-sampled
//! sparse random matrices.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{FieldSpec, Scalar};
use crate::matrix::{Matrix, Permutation};
use crate::permanent;
use crate::subspace::{CanonicalSubspace, Orientation};

/// Cap on the size of [`vanishing_minor_family`].
pub const FAMILY_CAP: usize = 20_000;

/// Independent generator for trial `index` under a run seed, so results do
/// not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform over `F_p`; over Q a fraction `a/b` with `|a| <= 5`, `1 <= b <= 3`.
pub fn random_scalar<R: Rng + ?Sized>(field: FieldSpec, rng: &mut R) -> Scalar {
    match field.modulus() {
        Some(p) => Scalar::Mod {
            value: rng.gen_range(0..p),
            p,
        },
        None => {
            let num = rng.gen_range(-5i64..=5);
            let den = rng.gen_range(1i64..=3);
            field
                .parse_scalar(&format!("{num}/{den}"))
                .expect("nonzero denominator")
        }
    }
}

pub fn random_nonzero_scalar<R: Rng + ?Sized>(field: FieldSpec, rng: &mut R) -> Scalar {
    loop {
        let s = random_scalar(field, rng);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(n: usize, field: FieldSpec, rng: &mut R) -> Matrix {
    Matrix::from_fn(n, n, field, |_, _| random_scalar(field, rng))
}

/// Each entry is nonzero with probability `density`.
pub fn random_sparse_matrix<R: Rng + ?Sized>(
    n: usize,
    field: FieldSpec,
    density: f64,
    rng: &mut R,
) -> Matrix {
    Matrix::from_fn(n, n, field, |_, _| {
        if rng.gen_bool(density) {
            random_nonzero_scalar(field, rng)
        } else {
            field.zero()
        }
    })
}

pub fn random_diagonal<R: Rng + ?Sized>(n: usize, field: FieldSpec, rng: &mut R) -> Vec<Scalar> {
    (0..n).map(|_| random_nonzero_scalar(field, rng)).collect()
}

/// A random composition of transposition, row and column permutations and
/// nonsingular row and column rescalings.
pub fn random_invariance_transform<R: Rng + ?Sized>(a: &Matrix, rng: &mut R) -> Matrix {
    let n = a.rows();
    let field = a.field();
    let mut m = if rng.gen_bool(0.5) { a.transpose() } else { a.clone() };
    let p1 = Matrix::permutation(&Permutation::random(n, rng), field);
    let p2 = Matrix::permutation(&Permutation::random(n, rng), field);
    let d1 = Matrix::diagonal(&random_diagonal(n, field, rng), field).expect("field");
    let d2 = Matrix::diagonal(&random_diagonal(n, field, rng), field).expect("field");
    for left in [&p1, &d1] {
        m = left.mul(&m).expect("square");
    }
    for right in [&p2, &d2] {
        m = m.mul(right).expect("square");
    }
    m
}

/// A random `k`-subset of `0..n`, ascending.
pub fn random_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let mut s = all[..k].to_vec();
    s.sort_unstable();
    s
}

/// A random member of a random `V_S^row` / `V_S^col` with `|S| = k`.
pub fn random_canonical_member<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    field: FieldSpec,
    rng: &mut R,
) -> Matrix {
    let orientation = if rng.gen_bool(0.5) {
        Orientation::Row
    } else {
        Orientation::Col
    };
    let cs = CanonicalSubspace::new(orientation, random_subset(n, k, rng), n).expect("subset");
    random_member_of(&cs, n, field, rng)
}

pub fn random_member_of<R: Rng + ?Sized>(
    cs: &CanonicalSubspace,
    n: usize,
    field: FieldSpec,
    rng: &mut R,
) -> Matrix {
    Matrix::from_fn(n, n, field, |i, j| {
        if cs.allows(i, j) {
            random_scalar(field, rng)
        } else {
            field.zero()
        }
    })
}

/// A matrix of permanental rank exactly `rank`, built as a transformed
/// member of a canonical subspace with support size `rank`.
pub fn random_exact_prk<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    field: FieldSpec,
    rng: &mut R,
) -> Matrix {
    if rank == 0 {
        return Matrix::zero(n, n, field);
    }
    loop {
        let a = random_invariance_transform(&random_canonical_member(n, rank, field, rng), rng);
        if permanent::prk(&a).expect("square").rank == rank {
            return a;
        }
    }
}

/// `X = E_ij + E_il - E_mj + E_ml + Σ_t E_{r_t s_t}` for all `i < m`, `j < l`
/// and all `(k-1)`-subsets `R` of the remaining rows and `S` of the remaining
/// columns, pairing them in ascending order. Each member has prk exactly `k`
/// while its `(k+1)`-block has zero permanent. Truncated at [`FAMILY_CAP`].
pub fn vanishing_minor_family(n: usize, k: usize, field: FieldSpec) -> Vec<Matrix> {
    let mut out = Vec::new();
    if k == 0 || k + 1 > n {
        return out;
    }
    let one = field.one();
    let minus = one.neg();
    for (i, m) in (0..n).tuple_combinations() {
        for (j, l) in (0..n).tuple_combinations() {
            let rest_rows: Vec<usize> = (0..n).filter(|&r| r != i && r != m).collect();
            let rest_cols: Vec<usize> = (0..n).filter(|&c| c != j && c != l).collect();
            for rs in rest_rows.iter().copied().combinations(k - 1) {
                for ss in rest_cols.iter().copied().combinations(k - 1) {
                    if out.len() == FAMILY_CAP {
                        return out;
                    }
                    let mut x = Matrix::zero(n, n, field);
                    for (r, c, v) in [(i, j, &one), (i, l, &one), (m, j, &minus), (m, l, &one)] {
                        x.set(r, c, v.clone()).expect("in range");
                    }
                    for (&r, &c) in rs.iter().zip(&ss) {
                        x.set(r, c, one.clone()).expect("in range");
                    }
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Rejection-sampled sparse random matrix with `prk <= k`.
pub fn random_bounded_prk<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    field: FieldSpec,
    rng: &mut R,
    attempts: usize,
) -> Option<Matrix> {
    for _ in 0..attempts {
        let density = rng.gen_range(1..=n) as f64 / n as f64;
        let a = random_sparse_matrix(n, field, density.min(1.0), rng);
        if permanent::prk_decide_leq(&a, k).expect("square") {
            return Some(a);
        }
    }
    None
}

/// `count` members of `Λ^{≤k}` drawn from the three sources in rotation.
pub fn bounded_prk_members<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    field: FieldSpec,
    count: usize,
    rng: &mut R,
) -> Vec<Matrix> {
    let family = vanishing_minor_family(n, k, field);
    let mut out = Vec::with_capacity(count);
    let mut turn = 0usize;
    while out.len() < count {
        let m = match turn % 3 {
            0 => Some(random_invariance_transform(
                &random_canonical_member(n, k, field, rng),
                rng,
            )),
            1 => family
                .choose(rng)
                .map(|x| random_invariance_transform(x, rng)),
            _ => random_bounded_prk(n, k, field, rng, 64),
        };
        if let Some(m) = m {
            out.push(m);
        }
        turn += 1;
    }
    out
}
