use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use ljb::oracle::{flatten, ljplus_prove_iterative, FreshNames};
use ljb::prover::rule_histogram;
use ljb::syntax::Atom;
use ljb::systemf::{inhabited_with, type_notation};
use ljb::{
    derivable_with, parse_context, parse_formula, parse_type, Context, LogicError, Outcome,
    SearchOptions, Sequent,
};

const EXIT_NOT_DERIVABLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_ORACLE: u8 = 4;

/// Decide positive formulæ of minimal predicate logic.
#[derive(Parser)]
#[command(name = "ljb", version)]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
}

#[derive(Subcommand)]
enum Mode {
    /// Decide whether a positive formula is provable.
    Decide(Query),
    /// Decide whether a positive System F type is inhabited.
    Inhabit(Query),
    /// Clean a bracketed context and print its normal form.
    Normalize(Query),
}

#[derive(Args)]
struct Query {
    /// Formula, type or context text.
    #[arg(required_unless_present = "file", conflicts_with = "file")]
    input: Option<String>,
    /// Read the input from a file instead.
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
    /// Print the derivation (or the rewrite sequence in normalize mode).
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    stats: bool,
    /// Check search invariants on every visited sequent.
    #[arg(long)]
    audit: bool,
    /// Re-run the query through the eigenvariable prover up to depth N.
    #[arg(long, value_name = "N")]
    oracle_check: Option<usize>,
    #[arg(long, value_name = "SECONDS")]
    timeout: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Decide,
    Inhabit,
    Normalize,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Decide => "decide",
            Kind::Inhabit => "inhabit",
            Kind::Normalize => "normalize",
        }
    }
}

struct Failure {
    message: String,
    column: Option<usize>,
}

struct OracleReport {
    depth: usize,
    proved_at: Option<usize>,
    agrees: bool,
}

enum Report {
    Search { outcome: Outcome, oracle: Option<OracleReport> },
    Normalize { input: Context, normal: Context, steps: Vec<Context>, elapsed: Duration },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, q) = match cli.mode {
        Mode::Decide(q) => (Kind::Decide, q),
        Mode::Inhabit(q) => (Kind::Inhabit, q),
        Mode::Normalize(q) => (Kind::Normalize, q),
    };
    if kind == Kind::Normalize && (q.oracle_check.is_some() || q.audit) {
        eprintln!("error: --oracle-check and --audit need a search and are not valid with normalize");
        return ExitCode::from(EXIT_USAGE);
    }
    if q.timeout.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
        eprintln!("error: --timeout must be a positive number of seconds");
        return ExitCode::from(EXIT_USAGE);
    }
    let text = match (&q.input, &q.file) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => match std::fs::read_to_string(path) {
            Ok(s) => s.trim_end().to_string(),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        },
        (None, None) => unreachable!("clap requires an input"),
    };

    let options = SearchOptions { audit: q.audit, ..SearchOptions::default() };
    let oracle_depth = q.oracle_check;
    let job_text = text.clone();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let _ = tx.send(run(kind, &job_text, options, oracle_depth));
    });
    let result = match q.timeout {
        Some(secs) => match rx.recv_timeout(Duration::from_secs_f64(secs)) {
            Ok(r) => r,
            Err(_) => {
                eprintln!("error: timed out after {secs} s");
                return ExitCode::from(EXIT_TIMEOUT);
            }
        },
        None => rx.recv().expect("worker thread panicked"),
    };

    match result {
        Ok(report) => emit(kind, &text, &q, report),
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(col) = f.column {
                eprintln!("  {text}");
                eprintln!("  {}^ column {col}", " ".repeat(col - 1));
            }
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(kind: Kind, text: &str, options: SearchOptions, oracle: Option<usize>) -> Result<Report, Failure> {
    let outcome = match kind {
        Kind::Normalize => {
            let start = Instant::now();
            let input = parse_context(text).map_err(|e| parse_failure(text, &e))?;
            let normal = input.normalize();
            let steps = rewrite_chain(&input);
            return Ok(Report::Normalize { input, normal, steps, elapsed: start.elapsed() });
        }
        Kind::Decide => {
            let f = parse_formula(text).map_err(|e| parse_failure(text, &e))?;
            derivable_with(&f, options)
        }
        Kind::Inhabit => {
            let t = parse_type(text).map_err(|e| parse_failure(text, &e))?;
            inhabited_with(&t, options)
        }
    }
    .map_err(|e| logic_failure(text, e))?;
    let oracle = oracle.map(|depth| {
        let flat = flatten(&Sequent::new(Context::empty(), outcome.input.clone()), &mut FreshNames::starting_at(0));
        let proved_at = ljplus_prove_iterative(&flat, depth);
        OracleReport { depth, proved_at, agrees: proved_at.is_some() == outcome.verdict }
    });
    Ok(Report::Search { outcome, oracle })
}

/// One possible sequence of single rewrite steps down to a clean context.
fn rewrite_chain(ctx: &Context) -> Vec<Context> {
    let mut out = vec![ctx.clone()];
    loop {
        let next = out.last().and_then(|c| c.rewrite_steps().into_iter().next());
        match next {
            Some(c) => out.push(c),
            None => break out,
        }
    }
}

fn parse_failure(text: &str, e: &ljb::ParseError) -> Failure {
    Failure { message: e.message.clone(), column: Some(e.column(text)) }
}

fn logic_failure(text: &str, e: LogicError) -> Failure {
    let column = match &e {
        LogicError::Parse(p) => Some(p.column(text)),
        LogicError::NotPositive(m) => nth_forall(text, m.quantifier),
        _ => None,
    };
    Failure { message: e.to_string(), column }
}

/// Column of the `n`-th `forall` keyword (0-based).
fn nth_forall(text: &str, n: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let is_ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_' || b == b'\'';
    let offset = text
        .match_indices("forall")
        .map(|(i, _)| i)
        .filter(|&i| {
            let before = i == 0 || !is_ident(bytes[i - 1]);
            let after = bytes.get(i + 6).is_none_or(|&b| !is_ident(b));
            before && after
        })
        .nth(n)?;
    Some(text[..offset].chars().count() + 1)
}

fn emit(kind: Kind, text: &str, q: &Query, report: Report) -> ExitCode {
    match report {
        Report::Normalize { input, normal, steps, elapsed } => {
            if q.json {
                let mut obj = base_json(text, kind, Value::Null, Value::Null, elapsed, Value::Null, Value::Null, &[]);
                obj.insert("normal_form".into(), json!(normal.to_string()));
                obj.insert("measure_before".into(), json!(input.measure()));
                obj.insert("measure_after".into(), json!(normal.measure()));
                obj.insert("clean".into(), json!(normal.is_clean()));
                if q.trace {
                    let chain: Vec<_> = steps.iter().map(|c| json!({ "context": c.to_string(), "measure": c.measure() })).collect();
                    obj.insert("trace".into(), Value::Array(chain));
                }
                if q.stats {
                    obj.insert("stats".into(), json!({ "depth": normal.depth(), "items": normal.len(), "steps": steps.len() - 1 }));
                }
                println!("{}", Value::Object(obj));
            } else {
                if q.trace {
                    for (i, c) in steps.iter().enumerate() {
                        println!("{i:>3}  [{}]  {c}", c.measure());
                    }
                }
                println!("{normal}");
                if q.stats {
                    println!("measure: {} -> {}", input.measure(), normal.measure());
                    println!("bracket depth: {}", normal.depth());
                    println!("rewrite steps: {}", steps.len() - 1);
                    println!("elapsed: {:.3} ms", elapsed.as_secs_f64() * 1e3);
                }
            }
            ExitCode::SUCCESS
        }
        Report::Search { outcome, oracle } => {
            let atom: &dyn Fn(&Atom) -> String = match kind {
                Kind::Inhabit => &type_notation,
                _ => &|a: &Atom| a.to_string(),
            };
            if q.json {
                let derivation = outcome.derivation.as_ref().map_or(Value::Null, |d| d.to_json());
                let agrees = oracle.as_ref().map_or(Value::Null, |o| json!(o.agrees));
                let mut obj = base_json(
                    text,
                    kind,
                    json!(outcome.verdict),
                    json!(outcome.stats.visited),
                    outcome.stats.elapsed,
                    derivation,
                    agrees,
                    &outcome.warnings,
                );
                obj.insert("formula".into(), json!(outcome.input.text()));
                if q.stats {
                    obj.insert("stats".into(), stats_json(&outcome));
                }
                if q.audit {
                    let v: Vec<_> = outcome
                        .stats
                        .violations
                        .iter()
                        .map(|(s, v)| json!({ "sequent": s, "violation": v.to_string() }))
                        .collect();
                    obj.insert("violations".into(), Value::Array(v));
                }
                if let Some(o) = &oracle {
                    obj.insert("oracle_depth".into(), json!(o.depth));
                    obj.insert("oracle_height".into(), json!(o.proved_at));
                }
                println!("{}", Value::Object(obj));
            } else {
                for w in &outcome.warnings {
                    eprintln!("warning: {w}");
                }
                if q.trace {
                    match &outcome.derivation {
                        Some(d) => print!("{}", d.render_tree(atom)),
                        None => println!("no derivation of {}", outcome.input.render_with(atom)),
                    }
                }
                let verdict = match (kind, outcome.verdict) {
                    (Kind::Inhabit, true) => "inhabited",
                    (Kind::Inhabit, false) => "not inhabited",
                    (_, true) => "derivable",
                    (_, false) => "not derivable",
                };
                println!("{verdict}");
                if q.stats {
                    let s = &outcome.stats;
                    println!("visited: {}", s.visited);
                    println!("max branch length: {}", s.max_seen);
                    println!("max bracket depth: {}", s.max_bracket_depth);
                    println!("elapsed: {:.3} ms", s.elapsed.as_secs_f64() * 1e3);
                    if let Some(d) = &outcome.derivation {
                        println!("derivation size: {}, height: {}", d.size(), d.height());
                    }
                }
                if q.audit {
                    println!("audit: {} violation(s)", outcome.stats.violations.len());
                    for (s, v) in &outcome.stats.violations {
                        println!("  {v} in {s}");
                    }
                }
                if let Some(o) = &oracle {
                    let found = match o.proved_at {
                        Some(h) => format!("proved at height {h}"),
                        None => format!("no proof up to depth {}", o.depth),
                    };
                    let verdict = if o.agrees { "agrees" } else { "DISAGREES" };
                    println!("oracle: {found}, {verdict}");
                }
            }
            if oracle.is_some_and(|o| !o.agrees) {
                ExitCode::from(EXIT_ORACLE)
            } else if outcome.verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NOT_DERIVABLE)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn base_json(
    text: &str,
    kind: Kind,
    derivable: Value,
    visited: Value,
    elapsed: Duration,
    derivation: Value,
    oracle_agrees: Value,
    warnings: &[String],
) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert("input".into(), json!(text));
    obj.insert("mode".into(), json!(kind.name()));
    obj.insert("derivable".into(), derivable);
    obj.insert("visited".into(), visited);
    obj.insert("elapsed_ms".into(), json!(elapsed.as_secs_f64() * 1e3));
    obj.insert("derivation".into(), derivation);
    obj.insert("oracle_agrees".into(), oracle_agrees);
    obj.insert("warnings".into(), json!(warnings));
    obj
}

fn stats_json(outcome: &Outcome) -> Value {
    let s = &outcome.stats;
    let mut rules = Map::new();
    if let Some(d) = &outcome.derivation {
        let mut h: Vec<_> = rule_histogram(d).into_iter().collect();
        h.sort_by_key(|(r, _)| r.name());
        for (r, n) in h {
            rules.insert(r.name().into(), json!(n));
        }
    }
    json!({
        "visited": s.visited,
        "max_seen": s.max_seen,
        "max_bracket_depth": s.max_bracket_depth,
        "derivation_size": outcome.derivation.as_ref().map(|d| d.size()),
        "derivation_height": outcome.derivation.as_ref().map(|d| d.height()),
        "rules": rules,
    })
}
