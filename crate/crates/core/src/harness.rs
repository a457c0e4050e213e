//! Reproducible verification suites over the rest of the library.
//!
//! Every trial draws from its own stream `trial_rng(seed, index)`, so reports
//! do not depend on the number of worker threads. Wall time is kept out of the
//! serialized report so that equal inputs give byte-identical JSON.

use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::density::{lift_chain, lift_rank, BuiltinConstraint, PolyConstraint};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::json::MatrixDoc;
use crate::matrix::{Matrix, Permutation};
use crate::permanent::{per_fast, prk, PrkTable, DEFAULT_TABLE_BUDGET};
use crate::preserver::{
    check_preserves, check_preserves_with_table, check_structural, compose_canonical, decompose,
    CanonicalPreserver, CheckMode, LinearMap, PreserverVerdict,
};
use crate::sampling::{self, trial_rng};
use crate::theta::{build_theta, verify_components, MAX_THETA_N};

/// Failures beyond this many are counted but not stored.
pub const MAX_STORED_FAILURES: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub description: String,
    /// Matrices or maps reproducing the failure.
    pub reproducer: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub field: FieldSpec,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub cases: u64,
    pub failure_count: u64,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    fn new(suite: &str, n: usize, k: Option<usize>, field: FieldSpec, mode: &str, seed: Option<u64>) -> Self {
        VerificationReport {
            suite: suite.into(),
            n,
            k,
            field,
            mode: mode.into(),
            seed,
            cases: 0,
            failure_count: 0,
            failures: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn absorb(&mut self, outcomes: impl IntoIterator<Item = Option<Failure>>) {
        for o in outcomes {
            self.cases += 1;
            if let Some(f) = o {
                self.failure_count += 1;
                if self.failures.len() < MAX_STORED_FAILURES {
                    self.failures.push(f);
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let k = self.k.map(|k| format!(" k={k}")).unwrap_or_default();
        format!(
            "{} n={}{k} field={} mode={}: {} cases, {} failures",
            self.suite, self.n, self.field, self.mode, self.cases, self.failure_count
        )
    }
}

fn failure(description: impl Into<String>, reproducer: Value) -> Option<Failure> {
    Some(Failure {
        description: description.into(),
        reproducer,
    })
}

fn mdoc(a: &Matrix) -> Value {
    serde_json::to_value(MatrixDoc::from_matrix(a)).expect("matrix serializes")
}

fn map_doc(t: &LinearMap) -> Value {
    serde_json::to_value(t.to_doc()).expect("map serializes")
}

fn timed(mut report: VerificationReport, start: Instant) -> VerificationReport {
    report.elapsed = start.elapsed();
    report
}

/// The transformations under which prk is invariant, each applied alone,
/// then all composed. Returns a failure naming the first that changed prk.
pub fn invariance_case<R: Rng + ?Sized>(a: &Matrix, rng: &mut R) -> Result<Option<Failure>> {
    let n = a.order()?;
    let field = a.field();
    let base = prk(a)?.rank;
    let p1 = Matrix::permutation(&Permutation::random(n, rng), field);
    let p2 = Matrix::permutation(&Permutation::random(n, rng), field);
    let d1 = Matrix::diagonal(&sampling::random_diagonal(n, field, rng), field)?;
    let d2 = Matrix::diagonal(&sampling::random_diagonal(n, field, rng), field)?;
    let images = [
        ("transpose", a.transpose()),
        ("row permutation", p1.mul(a)?),
        ("column permutation", a.mul(&p2)?),
        ("row rescaling", d1.mul(a)?),
        ("column rescaling", a.mul(&d2)?),
        ("composite", d1.mul(&p1)?.mul(&a.transpose())?.mul(&p2)?.mul(&d2)?),
    ];
    for (name, b) in images {
        let r = prk(&b)?.rank;
        if r != base {
            return Ok(failure(
                format!("{name} changed prk from {base} to {r}"),
                json!({"A": mdoc(a), "image": mdoc(&b)}),
            ));
        }
    }
    Ok(None)
}

/// prk is unchanged by transposition, row and column permutations and
/// nonzero row and column rescalings. Trials alternate between uniform
/// matrices and matrices of a random prescribed prk.
pub fn verify_invariance(n: usize, field: FieldSpec, trials: usize, seed: u64) -> Result<VerificationReport> {
    if n == 0 || n > 6 {
        return Err(Error::InvalidRange(format!("invariance suite needs 1 <= n <= 6, got {n}")));
    }
    let start = Instant::now();
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let a = if t % 2 == 0 {
                sampling::random_matrix(n, field, &mut rng)
            } else {
                let r = rng.gen_range(0..=n);
                sampling::random_exact_prk(n, r, field, &mut rng)
            };
            invariance_case(&a, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new("invariance", n, None, field, "sample", Some(seed));
    report.absorb(outcomes);
    Ok(timed(report, start))
}

/// The `t`-th canonical preserver in a fixed enumeration of all tuples with
/// diagonal entries in `F_p^×`: flag, σ1, σ2 (lexicographic), then d1, d2.
fn canonical_at(index: usize, n: usize, field: FieldSpec, perms: &[Permutation]) -> CanonicalPreserver {
    let p = field.modulus().expect("prime field");
    let units = (p - 1) as usize;
    let mut rest = index;
    let mut take = |m: usize| {
        let v = rest % m;
        rest /= m;
        v
    };
    let diag = |take: &mut dyn FnMut(usize) -> usize| -> Vec<Scalar> {
        (0..n)
            .map(|_| Scalar::Mod {
                value: take(units) as u64 + 1,
                p,
            })
            .collect()
    };
    let d2 = diag(&mut take);
    let d1 = diag(&mut take);
    let sigma2 = perms[take(perms.len())].clone();
    let sigma1 = perms[take(perms.len())].clone();
    let transpose = take(2) == 1;
    CanonicalPreserver::new(d1, sigma1, transpose, sigma2, d2).expect("nonzero diagonals")
}

/// Number of canonical tuples with diagonals over `F_p^×`.
pub fn canonical_count(n: usize, p: u64) -> u128 {
    let fact: u128 = (1..=n as u128).product();
    2 * fact * fact * ((p - 1) as u128).pow(2 * n as u32)
}

/// Every canonical preserver over `F_p` with diagonals in `F_p^×` sends
/// `Λ^{≤k}` into itself, checked against all `p^(n²)` matrices.
pub fn verify_forward(n: usize, k: usize, p: u64, budget: u128) -> Result<VerificationReport> {
    let field = FieldSpec::prime(p)?;
    let start = Instant::now();
    let table = PrkTable::build(field, n, budget)?;
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let count = canonical_count(n, p);
    let count = usize::try_from(count).map_err(|_| Error::BudgetExceeded {
        required: count,
        budget: usize::MAX as u128,
    })?;
    let outcomes = (0..count)
        .into_par_iter()
        .map(|idx| {
            let cp = canonical_at(idx, n, field, &perms);
            let t = compose_canonical(&cp);
            Ok(match check_preserves_with_table(&t, k, &table)? {
                PreserverVerdict::Preserver(got) if got == cp.normalized() => None,
                other => failure(
                    format!("canonical map #{idx} gave {}", other.label()),
                    json!({"preserver": cp.to_doc(), "map": map_doc(&t)}),
                ),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new("thm12-forward", n, Some(k), field, "exhaustive", None);
    report.absorb(outcomes);
    Ok(timed(report, start))
}

/// Kinds of maps fed to the converse suite, chosen by trial index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConverseSample {
    Uniform,
    Canonical,
    /// A canonical map with one unit image replaced by a random matrix.
    Perturbed,
    /// A canonical tuple with `D1` scaled by `c` and `D2` by `c⁻¹`.
    Regauged,
}

impl ConverseSample {
    pub fn for_trial(t: usize) -> Self {
        [
            ConverseSample::Uniform,
            ConverseSample::Canonical,
            ConverseSample::Perturbed,
            ConverseSample::Regauged,
        ][t % 4]
    }

    pub fn draw<R: Rng + ?Sized>(self, n: usize, field: FieldSpec, rng: &mut R) -> (LinearMap, Option<CanonicalPreserver>) {
        match self {
            ConverseSample::Uniform => (LinearMap::random_bijective(n, field, rng), None),
            ConverseSample::Canonical => {
                let cp = CanonicalPreserver::random(n, field, rng);
                (compose_canonical(&cp), Some(cp))
            }
            ConverseSample::Perturbed => loop {
                let t = compose_canonical(&CanonicalPreserver::random(n, field, rng));
                let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let t = t
                    .with_unit_image(i, j, &sampling::random_matrix(n, field, rng))
                    .expect("shape");
                if t.is_bijective() {
                    return (t, None);
                }
            },
            ConverseSample::Regauged => {
                let cp = CanonicalPreserver::random(n, field, rng);
                let c = sampling::random_nonzero_scalar(field, rng);
                let moved = cp.regauged(&c).expect("nonzero");
                (compose_canonical(&moved), Some(cp))
            }
        }
    }
}

fn verified_counterexample(t: &LinearMap, k: usize, a: &Matrix, image: &Matrix) -> Result<bool> {
    Ok(&t.apply(a)? == image && prk(a)?.rank <= k && prk(image)?.rank > k)
}

/// Structural verdicts agree with an independent oracle: the exhaustive check
/// when `p^(n²)` fits the budget, otherwise sampling.
pub fn verify_converse(n: usize, k: usize, p: u64, trials: usize, seed: u64, budget: u128) -> Result<VerificationReport> {
    let field = FieldSpec::prime(p)?;
    let start = Instant::now();
    let table = match PrkTable::build(field, n, budget) {
        Ok(t) => Some(t),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let mode = if table.is_some() { "exhaustive" } else { "sample" };
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Option<Failure>> {
            let mut rng = trial_rng(seed, trial as u64);
            let kind = ConverseSample::for_trial(trial);
            let (t, origin) = kind.draw(n, field, &mut rng);
            let (structural, _) = check_structural(&t, k, rng.gen(), 100)?;
            let oracle = match &table {
                Some(table) => check_preserves_with_table(&t, k, table)?,
                None => check_preserves(&t, k, CheckMode::Sample { count: 2000, seed: rng.gen() })?,
            };
            let repro = || json!({"trial": trial, "kind": format!("{kind:?}"), "map": map_doc(&t)});
            for v in [&structural, &oracle] {
                if let PreserverVerdict::NotPreserver { counterexample, image } = v {
                    if !verified_counterexample(&t, k, counterexample, image)? {
                        return Ok(failure("counterexample did not verify", repro()));
                    }
                }
            }
            let agree = match (&structural, &oracle) {
                (PreserverVerdict::Preserver(a), PreserverVerdict::Preserver(b)) => {
                    a == b && compose_canonical(a) == t
                }
                (PreserverVerdict::NotPreserver { .. }, PreserverVerdict::NotPreserver { .. }) => true,
                (PreserverVerdict::Preserver(_), PreserverVerdict::Unknown) => table.is_none(),
                (PreserverVerdict::NotPreserver { .. }, PreserverVerdict::Unknown) => table.is_none(),
                _ => false,
            };
            if !agree {
                return Ok(failure(
                    format!("structural {} vs {mode} {}", structural.label(), oracle.label()),
                    repro(),
                ));
            }
            if let (Some(cp), PreserverVerdict::Preserver(got)) = (&origin, &structural) {
                if got != &cp.normalized() {
                    return Ok(failure("recovered tuple differs from the normalized input", repro()));
                }
            }
            if origin.is_some() && !structural.is_preserver() {
                return Ok(failure("canonical map was not recognized", repro()));
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new("thm12-converse", n, Some(k), field, mode, Some(seed));
    report.absorb(outcomes);
    Ok(timed(report, start))
}

/// `decompose(compose_canonical(cp))` returns the normalized tuple and
/// recomposes to the same map.
pub fn verify_round_trip(n: usize, k: usize, field: FieldSpec, trials: usize, seed: u64) -> Result<VerificationReport> {
    let start = Instant::now();
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Option<Failure>> {
            let mut rng = trial_rng(seed, trial as u64);
            let cp = CanonicalPreserver::random(n, field, &mut rng);
            let t = compose_canonical(&cp);
            let got = decompose(&t, k)?;
            Ok(match got.canonical() {
                Some(d) if d == &cp.normalized() && compose_canonical(d) == t => None,
                _ => failure("round trip failed", json!({"preserver": cp.to_doc(), "map": map_doc(&t)})),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new("round-trip", n, Some(k), field, "sample", Some(seed));
    report.absorb(outcomes);
    Ok(timed(report, start))
}

/// Closed-form Θ weights against subspace intersections, plus the component
/// structure of the threshold graph, for each `k` in `ks`.
pub fn verify_theta(n: usize, ks: &[usize], field: FieldSpec) -> Result<VerificationReport> {
    if !(2..=MAX_THETA_N).contains(&n) {
        return Err(Error::InvalidRange(format!("theta suite needs 2 <= n <= {MAX_THETA_N}, got {n}")));
    }
    let start = Instant::now();
    let k = (ks.len() == 1).then(|| ks[0]);
    let mut report = VerificationReport::new("theta", n, k, field, "exhaustive", None);
    for &k in ks {
        let g = build_theta(n, k)?;
        let mismatches = g.weight_mismatches(field)?;
        let pairs = g.vertex_count() * (g.vertex_count() - 1) / 2;
        let mut outcomes: Vec<Option<Failure>> = vec![None; pairs - mismatches.len()];
        outcomes.extend(mismatches.into_iter().map(|(a, b, closed, actual)| {
            failure(
                format!("weight of ({}, {}) is {closed} in closed form, {actual} by elimination", g.vertices()[a], g.vertices()[b]),
                json!({"n": n, "k": k}),
            )
        }));
        outcomes.push(match verify_components(n, k) {
            Ok(_) => None,
            Err(e) => failure(e.to_string(), json!({"n": n, "k": k})),
        });
        report.absorb(outcomes);
    }
    Ok(timed(report, start))
}

/// A constraint that is nonzero at `a`: the constant, an entry, or the
/// permanent of the witness block, chosen at random.
fn constraint_for<R: Rng + ?Sized>(a: &Matrix, rng: &mut R) -> Result<BuiltinConstraint> {
    let w = prk(a)?;
    let support = a.support();
    Ok(match rng.gen_range(0..3) {
        1 if !support.is_empty() => {
            let (i, j) = support[rng.gen_range(0..support.len())];
            BuiltinConstraint::Entry(i, j)
        }
        2 if w.rank > 0 => BuiltinConstraint::PerMinor(w.rows, w.cols),
        _ => BuiltinConstraint::One,
    })
}

/// Checks one lift independently of `lift_rank`'s own assertions.
fn lift_case(a: &Matrix, k: usize, f: &BuiltinConstraint) -> Result<Option<Failure>> {
    let repro = || json!({"A": mdoc(a), "constraint": f.to_string()});
    let out = match lift_rank(a, f, None) {
        Ok(out) => out,
        Err(e) => return Ok(failure(format!("lift failed: {e}"), repro())),
    };
    let w = prk(a)?;
    let slope = if w.rank == 0 {
        a.field().one()
    } else {
        per_fast(&a.submatrix(&w.rows, &w.cols)?)?
    };
    let ok = prk(&out.x)?.rank == k
        && !f.evaluate(&out.x)?.is_zero()
        && out.slope == slope
        && out.q0.is_zero()
        && out.candidates_tried <= f.degree() + 2
        && out.x.sub(a)?.support() == vec![out.position];
    Ok(if ok { None } else { failure("lift did not verify", repro()) })
}

/// Lifts random `A` of prk `k-1` to prk `k` over Q, then runs the chain
/// from the zero matrix up to prk `k` with the constant constraint.
pub fn verify_density(n: usize, k: usize, trials: usize, seed: u64) -> Result<VerificationReport> {
    if k == 0 || k > n {
        return Err(Error::InvalidRange(format!("density suite needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let field = FieldSpec::Q;
    let start = Instant::now();
    let mut outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let a = sampling::random_exact_prk(n, k - 1, field, &mut rng);
            let f = constraint_for(&a, &mut rng)?;
            lift_case(&a, k, &f)
        })
        .collect::<Result<Vec<_>>>()?;
    let zero = Matrix::zero(n, n, field);
    outcomes.push(match lift_chain(&zero, &BuiltinConstraint::One, k) {
        Ok(steps) if steps.iter().map(|s| s.rank).eq(1..=k) => {
            let mut bad = None;
            for (prev, s) in std::iter::once(&zero).chain(steps.iter().map(|s| &s.x)).tuple_windows() {
                if lift_case(prev, prk(s)?.rank, &BuiltinConstraint::One)?.is_some() {
                    bad = failure("chain step did not verify", json!({"A": mdoc(prev)}));
                    break;
                }
            }
            bad
        }
        Ok(_) => failure("chain skipped a rank", json!({"n": n, "k": k})),
        Err(e) => failure(format!("chain failed: {e}"), json!({"n": n, "k": k})),
    });
    let mut report = VerificationReport::new("density", n, Some(k), field, "sample", Some(seed));
    report.absorb(outcomes);
    Ok(timed(report, start))
}

/// Default budget for the suites' exhaustive tables.
pub const SUITE_BUDGET: u128 = DEFAULT_TABLE_BUDGET;
