use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use permrank::density::{lift_rank, BuiltinConstraint};
use permrank::harness::{self, VerificationReport};
use permrank::json::{matrices_from_json, matrix_from_json, MatrixDoc};
use permrank::permanent::{per_fast, prk, DEFAULT_TABLE_BUDGET};
use permrank::preserver::{
    check_preserves, compose_canonical, decompose, permutation_from_one_based, CanonicalPreserver, CheckMode,
    Decomposition, LinearMap, PreserverVerdict,
};
use permrank::subspace::{classify_maximal, Classification, SubspaceBasis};
use permrank::theta::{build_theta, build_theta_hat};
use permrank::{FieldSpec, Scalar};

#[derive(Parser)]
#[command(name = "permrank", version, about = "Permanents, permanental rank and its linear preservers")]
struct Cli {
    /// Emit exactly one JSON document on standard output.
    #[arg(long, global = true)]
    json: bool,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Largest exhaustive enumeration allowed.
    #[arg(long, global = true, default_value_t = DEFAULT_TABLE_BUDGET)]
    budget: u128,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Structural,
    Exhaustive,
    Sample,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Invariance,
    #[value(name = "thm12-forward")]
    Forward,
    #[value(name = "thm12-converse")]
    Converse,
    Theta,
    Density,
}

#[derive(Subcommand)]
enum Command {
    /// Permanent of a square matrix.
    Per { matrix: PathBuf },
    /// Permanental rank, optionally with its witness.
    Prk {
        matrix: PathBuf,
        #[arg(long)]
        witness: bool,
    },
    /// Recognize a maximal subspace of bounded permanental rank.
    ClassifySubspace {
        basis: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// The maximal subspace graph or its threshold subgraph.
    Theta {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        hat: bool,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Build the map of a canonical preserver.
    Compose {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        d1: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        sigma1: Vec<usize>,
        #[arg(long)]
        transpose: bool,
        #[arg(long, value_delimiter = ',')]
        sigma2: Vec<usize>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        d2: Vec<String>,
        #[arg(long, default_value = "Q")]
        field: String,
    },
    /// Canonical form of a bijective map.
    Decompose {
        map: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Whether a map sends matrices of prk at most k to such matrices.
    CheckPreserver {
        map: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "structural")]
        mode: Mode,
        #[arg(long)]
        seed: Option<u64>,
        /// Samples per source (structural) or in total (sample).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Raise prk by one keeping a constraint nonzero.
    Lift {
        matrix: PathBuf,
        #[arg(long, requires = "j")]
        i: Option<usize>,
        #[arg(long, requires = "i")]
        j: Option<usize>,
        #[arg(long, default_value = "one")]
        constraint: String,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

enum Failure {
    Usage(String),
    Other(String),
}

impl From<permrank::Error> for Failure {
    fn from(e: permrank::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("permrank: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("permrank: usage: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("permrank: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string(v).expect("json value serializes"));
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

/// In JSON mode randomized commands must name their seed.
fn seed_for(cli: &Cli, seed: Option<u64>, what: &str) -> Result<u64, Failure> {
    match seed {
        Some(s) => Ok(s),
        None if cli.json => Err(Failure::Usage(format!("{what} is randomized; pass --seed in --json mode"))),
        None => Ok(0),
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Per { matrix } => {
            let a = matrix_from_json(&read(matrix)?)?;
            let v = per_fast(&a)?;
            if cli.json {
                print_json(&json!({ "per": v.to_string() }));
            } else {
                println!("{v}");
            }
            Ok(0)
        }
        Command::Prk { matrix, witness } => {
            let a = matrix_from_json(&read(matrix)?)?;
            let w = prk(&a)?;
            if cli.json || *witness {
                print_json(&serde_json::to_value(w.to_doc()).expect("witness serializes"));
            } else {
                println!("{}", w.rank);
            }
            Ok(0)
        }
        Command::ClassifySubspace { basis, k } => classify(cli, basis, *k),
        Command::Theta { n, k, hat, format } => theta(cli, *n, *k, *hat, *format),
        Command::Compose {
            d1,
            sigma1,
            transpose,
            sigma2,
            d2,
            field,
        } => {
            let field: FieldSpec = field.parse()?;
            let diag = |v: &[String]| -> Result<Vec<Scalar>, Failure> {
                v.iter().map(|s| field.parse_scalar(s).map_err(Failure::from)).collect()
            };
            let cp = CanonicalPreserver::new(
                diag(d1)?,
                permutation_from_one_based(sigma1)?,
                *transpose,
                permutation_from_one_based(sigma2)?,
                diag(d2)?,
            )?;
            print_json(&serde_json::to_value(compose_canonical(&cp).to_doc()).expect("map serializes"));
            Ok(0)
        }
        Command::Decompose { map, k } => {
            let t = LinearMap::from_json(&read(map)?)?;
            match decompose(&t, *k)? {
                Decomposition::Canonical(cp) => {
                    print_json(&json!({ "result": "Canonical", "preserver": cp.to_doc() }));
                    Ok(0)
                }
                Decomposition::Rejected(why) => {
                    print_json(&json!({ "result": "Rejected", "failure": why.to_doc() }));
                    Ok(1)
                }
            }
        }
        Command::CheckPreserver {
            map,
            k,
            mode,
            seed,
            count,
        } => {
            let t = LinearMap::from_json(&read(map)?)?;
            let mode = match mode {
                Mode::Structural => CheckMode::Structural {
                    seed: seed_for(cli, *seed, "structural mode")?,
                    samples: count.unwrap_or(200),
                },
                Mode::Exhaustive => CheckMode::Exhaustive { budget: cli.budget },
                Mode::Sample => CheckMode::Sample {
                    count: count.unwrap_or(2000),
                    seed: seed_for(cli, *seed, "sample mode")?,
                },
            };
            let verdict = check_preserves(&t, *k, mode)?;
            print_json(&verdict_doc(&verdict)?);
            Ok(match verdict {
                PreserverVerdict::Preserver(_) | PreserverVerdict::Unknown => 0,
                PreserverVerdict::NotPreserver { .. } | PreserverVerdict::NotBijective => 1,
            })
        }
        Command::Lift {
            matrix,
            i,
            j,
            constraint,
        } => {
            let a = matrix_from_json(&read(matrix)?)?;
            let f: BuiltinConstraint = constraint.parse().map_err(|e: permrank::Error| Failure::Usage(e.to_string()))?;
            let position = match (i, j) {
                (Some(i), Some(j)) if *i >= 1 && *j >= 1 => Some((i - 1, j - 1)),
                (Some(_), Some(_)) => return Err(Failure::Usage("--i and --j are 1-based".into())),
                _ => None,
            };
            let out = lift_rank(&a, &f, position)?;
            print_json(&serde_json::to_value(out.to_doc()).expect("lift serializes"));
            Ok(0)
        }
        Command::Verify {
            suite,
            n,
            k,
            p,
            trials,
            seed,
        } => verify(cli, *suite, *n, *k, *p, *trials, *seed),
    }
}

fn classify(cli: &Cli, basis: &Path, k: usize) -> Outcome {
    let ms = matrices_from_json(&read(basis)?)?;
    let first = ms.first().ok_or_else(|| Failure::Other("basis file lists no matrices".into()))?;
    let n = first.order()?;
    let v = SubspaceBasis::new(n, first.field(), ms)?;
    let c = classify_maximal(&v, k);
    let (label, support) = match &c {
        Classification::Row(s) => ("Row", Some(one_based(s))),
        Classification::Col(s) => ("Col", Some(one_based(s))),
        Classification::NotCanonical => ("NotCanonical", None),
    };
    if cli.json {
        let mut doc = json!({ "classification": label });
        if let Some(s) = &support {
            doc["S"] = json!(s);
        }
        print_json(&doc);
    } else {
        match &support {
            Some(s) => {
                let s: Vec<String> = s.iter().map(usize::to_string).collect();
                println!("{label} {{{}}}", s.join(","));
            }
            None => println!("{label}"),
        }
    }
    Ok(if support.is_some() { 0 } else { 1 })
}

fn theta(cli: &Cli, n: usize, k: usize, hat: bool, format: Option<Format>) -> Outcome {
    let format = match (cli.json, format) {
        (true, Some(Format::Dot)) => return Err(Failure::Usage("--json conflicts with --format dot".into())),
        (true, _) => Format::Json,
        (false, f) => f.unwrap_or(Format::Dot),
    };
    let g = build_theta(n, k)?;
    if hat {
        let h = build_theta_hat(&g);
        match format {
            Format::Dot => print!("{}", h.to_dot()),
            Format::Json => print_json(&serde_json::to_value(h.to_doc()).expect("graph serializes")),
        }
    } else {
        match format {
            Format::Dot => print!("{}", g.to_dot()),
            Format::Json => print_json(&serde_json::to_value(g.to_doc()).expect("graph serializes")),
        }
    }
    Ok(0)
}

fn verdict_doc(v: &PreserverVerdict) -> Result<Value, Failure> {
    Ok(match v {
        PreserverVerdict::Preserver(cp) => json!({ "verdict": "Preserver", "preserver": cp.to_doc() }),
        PreserverVerdict::NotPreserver { counterexample, image } => json!({
            "verdict": "NotPreserver",
            "counterexample": MatrixDoc::from_matrix(counterexample),
            "image": MatrixDoc::from_matrix(image),
            "prk_counterexample": prk(counterexample)?.rank,
            "prk_image": prk(image)?.rank,
        }),
        PreserverVerdict::NotBijective => json!({ "verdict": "NotBijective" }),
        PreserverVerdict::Unknown => json!({ "verdict": "Unknown" }),
    })
}

fn verify(
    cli: &Cli,
    suite: Suite,
    n: usize,
    k: Option<usize>,
    p: Option<u64>,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Outcome {
    let need_k = || k.ok_or_else(|| Failure::Usage("this suite needs --k".into()));
    let report: VerificationReport = match suite {
        Suite::Invariance => {
            let field = p.map(FieldSpec::prime).transpose()?.unwrap_or(FieldSpec::Q);
            let seed = seed_for(cli, seed, "the invariance suite")?;
            harness::verify_invariance(n, field, trials.unwrap_or(500), seed)?
        }
        Suite::Forward => harness::verify_forward(n, need_k()?, p.unwrap_or(3), cli.budget)?,
        Suite::Converse => {
            let seed = seed_for(cli, seed, "the converse suite")?;
            harness::verify_converse(n, need_k()?, p.unwrap_or(3), trials.unwrap_or(200), seed, cli.budget)?
        }
        Suite::Theta => {
            let field = p.map(FieldSpec::prime).transpose()?.unwrap_or(FieldSpec::Q);
            let ks: Vec<usize> = match k {
                Some(k) => vec![k],
                None => (1..n).collect(),
            };
            harness::verify_theta(n, &ks, field)?
        }
        Suite::Density => {
            if p.is_some() {
                return Err(Failure::Usage("the density suite runs over Q only".into()));
            }
            let seed = seed_for(cli, seed, "the density suite")?;
            harness::verify_density(n, need_k()?, trials.unwrap_or(100), seed)?
        }
    };
    if cli.json {
        println!("{}", report.to_json());
    } else {
        println!("{}", report.summary());
        for f in &report.failures {
            println!("  {}: {}", f.description, f.reproducer);
        }
    }
    Ok(if report.passed() { 0 } else { 1 })
}
