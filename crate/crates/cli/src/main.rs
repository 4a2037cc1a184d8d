mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pliable_core::chain::{enumeration_cost, l_star, DEFAULT_BUDGET};
use pliable_core::classify::classify;
use pliable_core::codes::{construct_for, verify_code, CodeError, DEFAULT_FIELD_CAP};
use pliable_core::field::PrimeField;
use pliable_core::io::{
    parse_code, parse_instance, serialize_code, serialize_instance, DocumentError,
};
use pliable_core::oracle::{exact_linear_rate, OracleError};
use pliable_core::set::proper_subsets;
use pliable_core::structure::structural_analysis;
use pliable_core::PicInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

pub const SCHEMA: &str = "pliable-bound/1";

#[derive(Parser)]
#[command(
    name = "pliable-bound",
    version,
    about = "Bounds, optimal rates and codes for pliable index coding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// Compact JSON (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON.
    #[arg(long)]
    pretty: bool,
    /// Leave the timing section out of reports.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Clone)]
struct Search {
    /// State evaluations allowed for the decoding-choice search.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    /// Prime field size for codes and the oracle.
    #[arg(long, default_value_t = 2)]
    q: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Structure, chain bound, classification, code and oracle for one instance.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        search: Search,
        /// Skip the brute-force oracle.
        #[arg(long, conflicts_with = "oracle")]
        no_oracle: bool,
        /// Require the chain search and the oracle; fail with exit 2 when either is over budget.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Build and verify an optimal (or best known) code.
    Construct {
        path: PathBuf,
        /// Write the code document here instead of standard output.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        q: u32,
        /// Largest prime tried by the truncated-nested construction.
        #[arg(long, default_value_t = DEFAULT_FIELD_CAP)]
        field_cap: u32,
    },
    /// Check a code document against an instance.
    Verify {
        instance: PathBuf,
        code: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Cross-check every absent family of one size at small m.
    Sweep {
        #[arg(long)]
        m: usize,
        /// Number of absent receivers.
        #[arg(long)]
        k: usize,
        /// Also allow the empty receiver to be absent.
        #[arg(long)]
        include_empty: bool,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        output: Output,
    },
    /// Print a random instance.
    Random {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        /// Probability that each proper subset is absent.
        #[arg(long, default_value_t = 0.3)]
        density: f64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Document { path: String, source: DocumentError },
    #[error("{0}")]
    Budget(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("verification failed for {0} receivers")]
    Verification(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Document { .. } => 1,
            CliError::Budget(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<CodeError> for CliError {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::FieldSearchExhausted { .. } => CliError::Budget(e.to_string()),
            CodeError::VerificationFailed(_) => CliError::Invariant(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::SearchSpaceTooLarge { .. } => CliError::Budget(e.to_string()),
            OracleError::TheoremViolation { .. } => CliError::Invariant(e.to_string()),
            OracleError::Field(_) => CliError::Usage(e.to_string()),
            OracleError::Code(c) => c.into(),
            OracleError::Chain(c) => CliError::Budget(c.to_string()),
        }
    }
}

/// A report plus the error that ended the command early, if any.
struct Outcome {
    report: Value,
    error: Option<CliError>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn load_instance(path: &Path) -> Result<PicInstance, CliError> {
    parse_instance(&read(path)?).map_err(|source| CliError::Document {
        path: path.display().to_string(),
        source,
    })
}

fn field(q: u32) -> Result<PrimeField, CliError> {
    PrimeField::new(q).map_err(|e| CliError::Usage(e.to_string()))
}

fn emit(value: &Value, output: &Output) {
    let text = if output.pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("plain data");
    println!("{text}");
}

fn finish(mut report: Value, output: &Output, start: Instant) -> Value {
    if !output.no_timing {
        report["timing"] = json!({ "elapsed_ms": start.elapsed().as_secs_f64() * 1e3 });
    }
    report
}

fn analyze(
    path: &Path,
    search: &Search,
    no_oracle: bool,
    force: bool,
) -> Result<Outcome, CliError> {
    let inst = load_instance(path)?;
    let base_field = field(search.q)?;
    let m = inst.m();

    let structure = structural_analysis(&inst);
    let classification = classify(&inst);
    let construction = construct_for(&inst, &classification, base_field, DEFAULT_FIELD_CAP)?;
    if construction.code.len() != classification.upper {
        return Err(CliError::Invariant(format!(
            "code length {} differs from upper bound {}",
            construction.code.len(),
            classification.upper
        )));
    }

    let mut report = json!({
        "schema": SCHEMA,
        "tool": { "name": "pliable-bound", "version": env!("CARGO_PKG_VERSION") },
        "instance": pliable_core::io::instance_value(&inst),
        "structure": report::structure(&inst, &structure),
        "classify": report::classification(&classification),
        "code": report::construction(&construction),
    });

    let mut pending: Option<CliError> = None;
    let (_, required) = enumeration_cost(&inst);
    report["chain"] = if required <= search.budget {
        let ls = l_star(&inst, search.budget).map_err(|e| CliError::Budget(e.to_string()))?;
        if m - ls.value > classification.upper {
            return Err(CliError::Invariant(format!(
                "chain bound {} above achievable {}",
                m - ls.value,
                classification.upper
            )));
        }
        json!({
            "status": "computed",
            "l_star": ls.value,
            "bound": m - ls.value,
            "choices": ls.choices.to_string(),
        })
    } else {
        if force {
            pending = Some(CliError::Budget(format!(
                "decoding-choice search needs {required} state evaluations, budget is {}",
                search.budget
            )));
        }
        json!({ "status": "skipped", "required": required.to_string(), "budget": search.budget.to_string() })
    };

    report["oracle"] = if no_oracle {
        json!({ "status": "disabled" })
    } else {
        match exact_linear_rate(&inst, search.q) {
            Ok(r) => {
                let c = &classification;
                let certified = construction.code.field().modulus() == search.q;
                if r.rate < c.lower || (certified && r.rate > c.upper) {
                    return Err(CliError::Invariant(format!(
                        "oracle rate {} outside [{}, {}]",
                        r.rate, c.lower, c.upper
                    )));
                }
                json!({
                    "status": "computed",
                    "q": search.q,
                    "linear_rate": r.rate,
                    "search_space": r.search_space.to_string(),
                })
            }
            Err(OracleError::SearchSpaceTooLarge { required, limit }) => {
                if force && pending.is_none() {
                    pending = Some(CliError::Budget(format!(
                        "oracle search space {required} exceeds the limit {limit}"
                    )));
                }
                json!({ "status": "skipped", "required": required.to_string(), "limit": limit.to_string() })
            }
            Err(e) => return Err(e.into()),
        }
    };
    Ok(Outcome {
        report,
        error: pending,
    })
}

fn construct(path: &Path, out: Option<&Path>, q: u32, cap: u32) -> Result<(), CliError> {
    let inst = load_instance(path)?;
    let classification = classify(&inst);
    let built = construct_for(&inst, &classification, field(q)?, cap)?;
    let doc = serialize_code(&built.code);
    let summary = json!({
        "length": built.code.len(),
        "q": built.code.field().modulus(),
        "scheme": report::scheme_name(built.scheme),
    });
    match out {
        Some(p) => {
            fs::write(p, format!("{doc}\n")).map_err(|source| CliError::Read {
                path: p.display().to_string(),
                source,
            })?;
            println!("{summary}");
        }
        None => {
            println!("{doc}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn verify(inst_path: &Path, code_path: &Path) -> Result<Outcome, CliError> {
    let inst = load_instance(inst_path)?;
    let code = parse_code(&read(code_path)?, inst.m()).map_err(|source| CliError::Document {
        path: code_path.display().to_string(),
        source,
    })?;
    let result = verify_code(&inst, &code).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut report = report::verification(&result);
    report["schema"] = json!(SCHEMA);
    let error = (!result.passed()).then_some(CliError::Verification(result.unsatisfied.len()));
    Ok(Outcome { report, error })
}

fn sweep(m: usize, k: usize, include_empty: bool, search: &Search) -> Result<Outcome, CliError> {
    if !(2..=4).contains(&m) {
        return Err(CliError::Budget(format!(
            "sweeps run the oracle and need 2 <= m <= 4, got {m}"
        )));
    }
    field(search.q)?;
    let universe: Vec<_> = proper_subsets(m)
        .filter(|h| include_empty || !h.is_empty())
        .collect();
    if k > universe.len() {
        return Err(CliError::Usage(format!(
            "k = {k} exceeds the {} candidate receivers",
            universe.len()
        )));
    }
    let summary = report::sweep(m, k, &universe, search.q, search.budget)?;
    let failed = summary["failed"].as_array().map_or(0, Vec::len);
    let error = (failed > 0)
        .then(|| CliError::Invariant(format!("{failed} instances failed the cross-check")));
    Ok(Outcome {
        report: summary,
        error,
    })
}

fn random(m: usize, seed: u64, density: f64) -> Result<(), CliError> {
    if !(2..=pliable_core::set::MAX_MESSAGES).contains(&m) {
        return Err(CliError::Usage(format!("m = {m} outside 2..=24")));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(CliError::Usage(format!("density {density} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let absent: Vec<_> = proper_subsets(m)
        .filter(|_| rng.gen_bool(density))
        .collect();
    let inst = PicInstance::from_absent(m, absent).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{}", serialize_instance(&inst));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let (outcome, output) = match cli.command {
        Command::Analyze {
            path,
            search,
            no_oracle,
            oracle,
            output,
        } => (analyze(&path, &search, no_oracle, oracle)?, output),
        Command::Verify {
            instance,
            code,
            output,
        } => (verify(&instance, &code)?, output),
        Command::Sweep {
            m,
            k,
            include_empty,
            search,
            output,
        } => (sweep(m, k, include_empty, &search)?, output),
        Command::Construct {
            path,
            out,
            q,
            field_cap,
        } => return construct(&path, out.as_deref(), q, field_cap),
        Command::Random { m, seed, density } => return random(m, seed, density),
    };
    emit(&finish(outcome.report, &output, start), &output);
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
