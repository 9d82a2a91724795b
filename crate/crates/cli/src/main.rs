use std::io::{self, Write};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hulldim::avgdim::{self, DEFAULT_ENUMERATION_LIMIT};
use hulldim::codes::ConstacyclicCode;
use hulldim::error::HullError;
use hulldim::gf::{FieldElement, FieldSpec};
use hulldim::polyalg::{factor_xn_minus_lambda, FactorizationReport};
use hulldim::sweep::{self, SweepOptions, SweepRow};
use serde::Serialize;
use serde_json::Value;

const EXIT_USAGE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

/// Hermitian hulls of constacyclic codes over F_{q^2}.
#[derive(Parser)]
#[command(name = "hulldim", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Pretty, global = true)]
    format: Format,

    /// Reserved; factorization is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Maximum number of codes the brute-force oracle may enumerate.
    #[arg(long, env = "HULLDIM_LIMIT", global = true)]
    limit: Option<u128>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepOut {
    Csv,
    Json,
}

#[derive(Args)]
struct Target {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    n: u64,
    /// Order of lambda; must divide q + 1.
    #[arg(long, required_unless_present = "lambda")]
    r: Option<u64>,
    /// Explicit lambda in bracketed coefficient form, e.g. "[0,1]".
    #[arg(long)]
    lambda: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Factor x^n - lambda into SCR factors and conjugate-reciprocal pairs.
    Factor(Target),
    /// Generator, dual and hull of the code with the given exponents.
    Hull {
        #[command(flatten)]
        target: Target,
        /// Exponents u_1..u_s, then z_1..z_t, then w_1..w_t.
        #[arg(long, value_delimiter = ',', required = true)]
        exp: Vec<u64>,
    },
    /// Average hull dimension over all codes of length n.
    Avg {
        #[command(flatten)]
        target: Target,
        /// Also average by enumerating every code.
        #[arg(long)]
        verify: bool,
    },
    /// Bound class for the average hull dimension.
    Classify {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u64,
    },
    /// Table of averages over a grid of (q, r | q + 1, n <= n-max).
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u64>,
        #[arg(long)]
        n_max: u64,
        #[arg(long, value_enum, default_value_t = SweepOut::Csv)]
        out: SweepOut,
        /// Oracle-check points with at most this many codes.
        #[arg(long)]
        verify_max: Option<u128>,
        #[arg(long, env = "HULLDIM_WORKERS")]
        workers: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Precondition(HullError),
    Mismatch(String),
    Io(io::Error),
}

impl From<HullError> for Failure {
    fn from(e: HullError) -> Self {
        match e {
            HullError::VerificationMismatch(msg) => Failure::Mismatch(msg),
            other => Failure::Precondition(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Precondition(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_PRECONDITION)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("error: verification failed: {msg}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> CliResult<ExitCode> {
    let limit = cli.limit.unwrap_or(DEFAULT_ENUMERATION_LIMIT);
    match &cli.command {
        Command::Factor(target) => {
            let (report, _) = factor_target(target)?;
            emit(cli.format, &report.to_doc())?;
        }
        Command::Hull { target, exp } => {
            let (report, _) = factor_target(target)?;
            let want = report.s() + 2 * report.t();
            if exp.len() != want {
                return Err(Failure::Usage(format!(
                    "--exp needs {want} values (s = {}, t = {}), got {}",
                    report.s(),
                    report.t(),
                    exp.len()
                )));
            }
            let code = ConstacyclicCode::new(Arc::new(report), exp.clone())?;
            emit(cli.format, &hull_doc(&code)?)?;
        }
        Command::Avg { target, verify } => return cmd_avg(cli.format, target, *verify, limit),
        Command::Classify { q, n, r } => {
            let bounds = avgdim::classify_bounds(*n, *r, *q)?;
            if cli.format == Format::Csv {
                emit_rows(&[SweepRow::compute(*n, *r, *q)?])?;
            } else {
                let mut doc = serde_json::to_value(&bounds).expect("serializable");
                doc["clause"] = Value::String(bounds.clause.to_string());
                emit(cli.format, &doc)?;
            }
        }
        Command::Sweep {
            q,
            n_max,
            out,
            verify_max,
            workers,
        } => {
            if q.is_empty() || *n_max == 0 {
                return Err(Failure::Usage("sweep grid is empty".into()));
            }
            let opts = SweepOptions {
                verify_max: *verify_max,
                workers: *workers,
            };
            let rows = sweep::run_sweep(q, *n_max, &opts)?;
            match out {
                SweepOut::Csv => emit_rows(&rows)?,
                SweepOut::Json => emit(Format::Json, &rows)?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_avg(format: Format, target: &Target, verify: bool, limit: u128) -> CliResult<ExitCode> {
    let (field, lambda, r) = resolve_lambda(target)?;
    let mut report = avgdim::avg_hull_dim_closed(target.n, r, target.q)?;
    if verify {
        match avgdim::avg_hull_dim_bruteforce(&field, target.n, lambda, limit) {
            Ok(oracle) => report = report.with_oracle(oracle),
            Err(e @ HullError::ScaleLimit { .. }) => {
                eprintln!("warning: oracle skipped: {e}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    if format == Format::Csv {
        emit_rows(&[SweepRow::compute(target.n, r, target.q)?])?;
    } else {
        emit(format, &report)?;
    }
    if report.oracle_agrees == Some(false) {
        eprintln!(
            "error: verification failed: closed form {} vs oracle {}",
            report.eh,
            report.oracle_eh.as_ref().expect("set with oracle_agrees")
        );
        return Ok(ExitCode::from(EXIT_MISMATCH));
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve_lambda(target: &Target) -> CliResult<(Arc<FieldSpec>, FieldElement, u64)> {
    let field = Arc::new(FieldSpec::new(target.q)?);
    match &target.lambda {
        Some(text) => {
            let lambda = field.parse_element(text)?;
            let r = field.element_order(lambda)?;
            if let Some(given) = target.r {
                if given != r {
                    return Err(Failure::Precondition(HullError::DomainError(format!(
                        "--r {given} does not match the order {r} of lambda {text}"
                    ))));
                }
            }
            Ok((field, lambda, r))
        }
        None => {
            let r = target.r.expect("clap requires --r without --lambda");
            let lambda = field.find_element_of_order(r)?;
            Ok((field, lambda, r))
        }
    }
}

fn factor_target(target: &Target) -> CliResult<(FactorizationReport, u64)> {
    let (field, lambda, r) = resolve_lambda(target)?;
    Ok((factor_xn_minus_lambda(&field, target.n, lambda)?, r))
}

#[derive(Serialize)]
struct HullDoc {
    n: u64,
    lambda: String,
    exponents: Vec<u64>,
    g: String,
    dim: u64,
    dual_exponents: Vec<u64>,
    dual_g: String,
    dual_dim: u64,
    hull_exponents: Vec<u64>,
    hull_g: String,
    hull_dim: u64,
}

fn hull_doc(code: &ConstacyclicCode) -> CliResult<HullDoc> {
    let report = code.report();
    let ring = report.ring();
    let doc = code.to_doc();
    let dual = code.dual_code();
    let dual_g = code.dual_generator()?;
    let hull_g = code.hull_generator()?;
    Ok(HullDoc {
        n: doc.n,
        lambda: doc.lambda,
        exponents: doc.exponents,
        g: doc.g,
        dim: doc.dim,
        dual_exponents: dual.exponents().to_vec(),
        dual_g: ring.format(&dual_g),
        dual_dim: dual.dimension(),
        hull_exponents: hulldim::codes::hull_exponents(report, code.exponents()),
        hull_g: ring.format(&hull_g),
        hull_dim: doc.hull_dim,
    })
}

fn emit<T: Serialize>(format: Format, doc: &T) -> CliResult<()> {
    let value = serde_json::to_value(doc).expect("documents serialize to JSON");
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &value).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Pretty => write_pretty(&mut out, &value, 0)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["key", "value"]).map_err(io::Error::from)?;
            if let Value::Object(map) = &value {
                for (k, v) in map {
                    w.write_record([k.as_str(), &scalar_text(v)])
                        .map_err(io::Error::from)?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_rows(rows: &[SweepRow]) -> CliResult<()> {
    let stdout = io::stdout();
    sweep::write_csv(rows, stdout.lock()).map_err(|e| match e {
        HullError::Parse(msg) => Failure::Io(io::Error::other(msg)),
        other => Failure::Precondition(other),
    })
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(map) if map.contains_key("num") && map.contains_key("den") => {
            format!("{}/{}", scalar_text(&map["num"]), scalar_text(&map["den"]))
        }
        other => other.to_string(),
    }
}

fn write_pretty<W: Write>(out: &mut W, value: &Value, indent: usize) -> io::Result<()> {
    let pad = " ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Object(inner) if !is_rational(inner) => {
                        writeln!(out, "{pad}{k}:")?;
                        write_pretty(out, v, indent + 2)?;
                    }
                    Value::Array(items) if items.iter().any(|x| x.is_array() || x.is_object()) => {
                        writeln!(out, "{pad}{k}:")?;
                        for item in items {
                            write_pretty(out, item, indent + 2)?;
                        }
                    }
                    _ => writeln!(out, "{pad}{k}: {}", pretty_scalar(v))?,
                }
            }
            if indent > 0 {
                writeln!(out)?;
            }
        }
        other => writeln!(out, "{pad}{}", pretty_scalar(other))?,
    }
    Ok(())
}

fn is_rational(map: &serde_json::Map<String, Value>) -> bool {
    map.contains_key("num") && map.contains_key("den") && map.contains_key("decimal")
}

fn pretty_scalar(v: &Value) -> String {
    match v {
        Value::Object(map) if is_rational(map) => {
            format!("{} ({})", scalar_text(v), scalar_text(&map["decimal"]))
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            parts.join(" ")
        }
        other => scalar_text(other),
    }
}
