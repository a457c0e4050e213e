//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p permrank-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::Rng;

use permrank::density::{lift_chain, BuiltinConstraint};
use permrank::harness::{verify_converse, verify_density, verify_forward, verify_invariance, verify_round_trip, SUITE_BUDGET};
use permrank::matrix::Matrix;
use permrank::permanent::{per_fast, per_naive, prk, PrkTable};
use permrank::preserver::{check_structural, compose_canonical, decompose, induced_vertex_map, CanonicalPreserver, PreserverVerdict};
use permrank::sampling::{random_exact_prk, random_matrix, trial_rng};
use permrank::theta::{binomial, build_theta, build_theta_hat, components, verify_components};
use permrank::FieldSpec;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn f3() -> FieldSpec {
    FieldSpec::prime(3).unwrap()
}

fn permanent_oracle() -> Outcome {
    let start = Instant::now();
    let table = PrkTable::build(f3(), 3, SUITE_BUDGET).unwrap();
    let mut cases = 0;
    let mut mismatches = 0;
    for idx in 0..table.len() {
        let a = table.matrix_at(idx);
        cases += 1;
        if per_fast(&a).unwrap() != per_naive(&a).unwrap() {
            mismatches += 1;
        }
    }
    for n in 2..=6 {
        for t in 0..1000 {
            let a = random_matrix(n, FieldSpec::Q, &mut trial_rng(1, (n * 1000 + t) as u64));
            cases += 1;
            if per_fast(&a).unwrap() != per_naive(&a).unwrap() {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed <= Duration::from_secs(60),
        format!("{cases} cases, {mismatches} mismatches, {} (limit 60s)", secs(elapsed)),
    )
}

/// Largest nonzero-permanent square submatrix by full enumeration, first in
/// lexicographic order of (rows, cols).
fn witness_by_enumeration(a: &Matrix) -> (usize, Vec<usize>, Vec<usize>) {
    let n = a.rows();
    for size in (1..=n).rev() {
        for rows in (0..n).combinations(size) {
            for cols in (0..n).combinations(size) {
                if !per_naive(&a.submatrix(&rows, &cols).unwrap()).unwrap().is_zero() {
                    return (size, rows, cols);
                }
            }
        }
    }
    (0, vec![], vec![])
}

fn witness_validity() -> Outcome {
    let mut mismatches = 0;
    for t in 0..1000u64 {
        let mut rng = trial_rng(2, t);
        let field = if t % 2 == 0 { f3() } else { FieldSpec::Q };
        let n = rng.gen_range(1..=5);
        let a = if t % 3 == 0 {
            random_matrix(n, field, &mut rng)
        } else {
            let r = rng.gen_range(0..=n);
            random_exact_prk(n, r, field, &mut rng)
        };
        let w = prk(&a).unwrap();
        let sized = w.rows.len() == w.rank && w.cols.len() == w.rank;
        let value = if w.rank == 0 {
            w.per_value.is_one()
        } else {
            let v = per_naive(&a.submatrix(&w.rows, &w.cols).unwrap()).unwrap();
            !v.is_zero() && v == w.per_value
        };
        let maximal = w.rank == n
            || (0..n).combinations(w.rank + 1).all(|rows| {
                (0..n)
                    .combinations(w.rank + 1)
                    .all(|cols| per_naive(&a.submatrix(&rows, &cols).unwrap()).unwrap().is_zero())
            });
        let same = witness_by_enumeration(&a) == (w.rank, w.rows.clone(), w.cols.clone());
        if !(sized && value && maximal && same) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("1000 matrices, {mismatches} mismatches"))
}

fn invariance() -> Outcome {
    let mut cases = 0;
    let mut failures = 0;
    for n in [3, 4] {
        for (field, trials) in [(f3(), 500), (FieldSpec::Q, 200)] {
            let r = verify_invariance(n, field, trials, 3).unwrap();
            cases += r.cases;
            failures += r.failure_count;
        }
    }
    outcome(failures == 0, format!("{cases} trials at n in {{3,4}}, {failures} failures"))
}

fn theta_weights() -> Outcome {
    let mut pairs = 0;
    let mut bad = 0;
    let mut bad_counts = 0;
    for n in 2..=6 {
        for k in 1..n {
            let g = build_theta(n, k).unwrap();
            if g.vertex_count() != 2 * binomial(n, k) {
                bad_counts += 1;
            }
            pairs += g.edges().count();
            bad += g.weight_mismatches(FieldSpec::Q).unwrap().len();
        }
    }
    outcome(
        bad == 0 && bad_counts == 0,
        format!("{pairs} vertex pairs, {bad} weight mismatches, {bad_counts} wrong vertex counts"),
    )
}

fn theta_components() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut bad = Vec::new();
    for n in 2..=7 {
        for k in 1..n {
            checked += 1;
            match verify_components(n, k) {
                Ok(r) if r.component_count == if (k, n) == (2, 4) { 1 } else { 2 } => {}
                Ok(r) => bad.push(format!("({n},{k}): {} components", r.component_count)),
                Err(e) => bad.push(format!("({n},{k}): {e}")),
            }
        }
    }
    let g = build_theta(4, 2).unwrap();
    let zero_edges = g.edges().filter(|e| e.2 == 0).count();
    let hat_components = components(&build_theta_hat(&g)).len();
    let elapsed = start.elapsed();
    outcome(
        bad.is_empty() && zero_edges == 6 && hat_components == 1 && elapsed <= Duration::from_secs(10),
        format!(
            "{checked} (n,k) pairs, failures {bad:?}; (4,2): {hat_components} component, {zero_edges} zero-weight edges; {} (limit 10s)",
            secs(elapsed)
        ),
    )
}

fn forward() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for k in [1, 2] {
        let r = verify_forward(3, k, 3, SUITE_BUDGET).unwrap();
        pass &= r.passed() && r.cases == 4608;
        parts.push(format!("k={k}: {} maps, {} failures", r.cases, r.failure_count));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(600);
    outcome(pass, format!("{}; {} (limit 600s)", parts.join("; "), secs(elapsed)))
}

fn round_trip() -> Outcome {
    let mut cases = 0;
    let mut failures = 0;
    for field in [FieldSpec::prime(5).unwrap(), FieldSpec::Q] {
        for (n, trials) in [(3, 167), (4, 167), (5, 166)] {
            let r = verify_round_trip(n, n - 1, field, trials, 7).unwrap();
            cases += r.cases;
            failures += r.failure_count;
        }
    }
    outcome(failures == 0 && cases == 1000, format!("{cases} preservers over Fp:5 and Q, {failures} failures"))
}

fn converse() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for k in [1, 2] {
        let r = verify_converse(3, k, 3, 200, 11, SUITE_BUDGET).unwrap();
        pass &= r.passed() && r.cases == 200;
        parts.push(format!("k={k}: {} maps, {} disagreements", r.cases, r.failure_count));
    }
    outcome(pass, parts.join("; "))
}

fn density() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (n, k) in [(3, 2), (4, 3)] {
        let r = verify_density(n, k, 100, 13).unwrap();
        pass &= r.passed() && r.cases == 101;
        parts.push(format!("({n},{k}): {} lifts, {} failures", r.cases, r.failure_count));
    }
    let chain = verify_density(3, 3, 0, 0).unwrap();
    let ranks: Vec<usize> = lift_chain(&Matrix::zero(3, 3, FieldSpec::Q), &BuiltinConstraint::One, 3)
        .map(|steps| steps.iter().map(|s| s.rank).collect())
        .unwrap_or_default();
    pass &= chain.passed() && ranks == [1, 2, 3];
    parts.push(format!("chain 0->3 ranks {ranks:?}"));
    outcome(pass, parts.join("; "))
}

fn special_case() -> Outcome {
    let g = build_theta(4, 2).unwrap();
    let connected = components(&build_theta_hat(&g)).len() == 1;
    let mut failures = 0;
    for t in 0..50u64 {
        let mut rng = trial_rng(17, t);
        let field = if t % 2 == 0 { FieldSpec::Q } else { FieldSpec::prime(5).unwrap() };
        let cp = CanonicalPreserver::random(4, field, &mut rng);
        let map = compose_canonical(&cp);
        let decomposed = decompose(&map, 2).unwrap();
        let recovered = decomposed.canonical() == Some(&cp.normalized());
        let structural = matches!(
            check_structural(&map, 2, t, 10).unwrap().0,
            PreserverVerdict::Preserver(ref got) if got == &cp.normalized()
        );
        let weights = induced_vertex_map(&map, &g)
            .map(|phi| g.edges().all(|(a, b, w)| g.weight(phi[a], phi[b]) == Some(w)))
            .unwrap_or(false);
        if !(recovered && structural && weights) {
            failures += 1;
        }
    }
    outcome(
        connected && failures == 0,
        format!("threshold graph connected: {connected}; 50 preservers at n=4, k=2, {failures} failures"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("permanent oracle equivalence", permanent_oracle),
        ("prk witness validity", witness_validity),
        ("prk invariance suite", invariance),
        ("theta closed-form weights", theta_weights),
        ("threshold graph components", theta_components),
        ("canonical maps preserve, exhaustive", forward),
        ("decompose round trip", round_trip),
        ("structural vs exhaustive verdicts", converse),
        ("density lift", density),
        ("(k,n) = (2,4) decomposition", special_case),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        all &= o.pass;
        println!(
            "{} [{}] {name}: {} [{}]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            secs(start.elapsed())
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
