//! The `qpcalc` command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 the input was rejected.

use std::ffi::OsString;
use std::io::Read;
use std::ops::RangeInclusive;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dgmod::{phi_interval, BimoduleData};
use crate::field::{Coeff, Fp, Rational};
use crate::format::{self, ParseError};
use crate::ginzburg::{degree0_criterion, truncation_homology, GinzburgAlgebra};
use crate::mutation::{involution_report, mutate_checked, premutate, MutationResult};
use crate::ncseries::VertexId;
use crate::qp::{jacobian_dims, split, validate_qp, Accuracy, Qp};
use crate::{corpus, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qpcalc", version, about = "Quivers with potential: mutation, reduction and Ginzburg homology")]
pub struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Coefficient field: `rational` or `fp:<prime>`.
    #[arg(long, global = true, default_value = "rational")]
    pub field: String,
    /// Override the truncation order of the input.
    #[arg(long, global = true)]
    pub truncation: Option<usize>,
    /// Seed for the `@random` input.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report to a file instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the QP and the mutability of every vertex.
    Validate { input: String },
    /// Mutate at one vertex and print the result in the QP text format.
    Mutate {
        #[arg(short = 'i', long)]
        vertex: String,
        /// Print the premutation instead of its reduced part.
        #[arg(long)]
        premutation: bool,
        input: String,
    },
    /// Mutate at a sequence of vertices, e.g. `-i 1,2,1`.
    MutateSeq {
        #[arg(short = 'i', long, value_delimiter = ',', required = true)]
        vertex: Vec<String>,
        input: String,
    },
    /// Split off the trivial part.
    Reduce { input: String },
    /// Dimensions of the truncated Jacobian algebra.
    Jacobian {
        #[arg(long)]
        orders: Option<String>,
        input: String,
    },
    /// Homology of the truncated Ginzburg algebra.
    GinzburgHomology {
        #[arg(long)]
        orders: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        degrees: Option<String>,
        input: String,
    },
    /// Check the identities of the mutation bimodule.
    VerifyBimodule {
        #[arg(short = 'i', long)]
        vertex: String,
        /// Negate the map of one generator (a negative control).
        #[arg(long)]
        inject_fault: Option<String>,
        input: String,
    },
    /// Homology of the images of the simples of the mutated algebra.
    ImageOfSimple {
        #[arg(short = 'i', long)]
        vertex: String,
        /// Only this simple (default: all).
        #[arg(short = 'j', long)]
        simple: Option<String>,
        input: String,
    },
    /// Check that mutating twice gives back the reduced part.
    Involution {
        #[arg(short = 'i', long)]
        vertex: String,
        input: String,
    },
    /// The degree-0 criterion at a vertex.
    Degree0 {
        #[arg(short = 'i', long)]
        vertex: String,
        #[arg(long)]
        orders: Option<String>,
        input: String,
    },
    /// Serve the HTTP session API.
    Serve {
        #[arg(long, env = "QPCALC_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
        /// Append accepted commands to this JSON-lines file and replay it on start.
        #[arg(long, env = "QPCALC_PERSIST")]
        persist: Option<std::path::PathBuf>,
    },
    /// Write the QP as `qp` text, `json`, `dot`, or the Ginzburg quiver as `ginzburg-dot`.
    Export {
        #[arg(long, value_enum, default_value = "json")]
        format: ExportFormat,
        input: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Qp,
    Json,
    Dot,
    GinzburgDot,
}

/// What a command printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A command-level failure, rendered as diagnostics.
#[derive(Debug)]
enum Failure {
    Parse(ParseError),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<crate::qp::QpError> for Failure {
    fn from(e: crate::qp::QpError) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Report {
    text: String,
    result: Value,
    passed: bool,
    /// Printed verbatim, without the common envelope.
    raw: bool,
}

impl Report {
    fn new(text: String, result: Value) -> Self {
        Report { text, result, passed: true, raw: false }
    }
}

/// Parses `A..B` (inclusive).
pub fn parse_range<T: std::str::FromStr + PartialOrd + Copy>(s: &str) -> Result<RangeInclusive<T>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a range A..B, got `{s}`"))?;
    let a: T = a.trim().parse().map_err(|_| format!("bad range start in `{s}`"))?;
    let b: T = b.trim().parse().map_err(|_| format!("bad range end in `{s}`"))?;
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok(a..=b)
}

fn load<K: Coeff>(cli: &Cli, input: &str) -> Result<Qp<K>, Failure> {
    let n = cli.truncation.unwrap_or(format::DEFAULT_TRUNCATION);
    let q: Qp<K> = match input {
        "@a2" => corpus::a2(n),
        "@c3" => corpus::c3(n),
        "@triv" => corpus::triv(n),
        "@k2" => corpus::k2(n),
        "@random" => corpus::random_qp(cli.seed, n),
        "-" => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("cannot read stdin: {e}")))?;
            format::parse_any(&s).map_err(Failure::Parse)?
        }
        _ if input.starts_with('@') => return Err(Failure::Input(format!("unknown built-in example `{input}`"))),
        path => format::parse_qp_file(path).map_err(Failure::Parse)?,
    };
    match cli.truncation {
        Some(n) if n != q.truncation() => Ok(q.with_truncation(n)?),
        _ => Ok(q),
    }
}

fn vertex<K: Coeff>(q: &Qp<K>, name: &str) -> Result<VertexId, Failure> {
    q.vertex(name).map_err(|_| Failure::Input(format!("unknown vertex `{name}`")))
}

fn range_arg<T: std::str::FromStr + PartialOrd + Copy>(arg: &Option<String>, default: RangeInclusive<T>) -> Result<RangeInclusive<T>, Failure> {
    match arg {
        Some(s) => parse_range(s).map_err(Failure::Input),
        None => Ok(default),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn accuracy_json(a: Accuracy) -> Value {
    match a {
        Accuracy::Exact => json!("exact"),
        Accuracy::UpTo(w) => json!(w),
    }
}

fn header<K: Coeff>(q: &Qp<K>) -> String {
    format!("order {}, accuracy {}, watermark {}", q.truncation(), q.accuracy(), q.watermark())
}

fn mutation_text<K: Coeff>(r: &MutationResult<K>, before: &Qp<K>, premutation: bool) -> String {
    let q = if premutation { &r.premutated } else { r.result() };
    let name = before.quiver().vertex_name(r.vertex);
    let kind = if premutation { "premutation" } else { "mutation" };
    let mut s = format!("# {kind} at {name}\n# {}\n", header(q));
    if !premutation {
        let d = r.delta(before);
        if !d.cancelled.is_empty() {
            let pairs: Vec<String> = d.cancelled.iter().map(|(a, b)| format!("{a}.{b}")).collect();
            s.push_str(&format!("# cancelled: {}\n", pairs.join(", ")));
        }
    }
    s.push_str(&format::print_qp(q));
    s
}

fn run_typed<K: Coeff>(cli: &Cli, q: &Qp<K>) -> Result<Report, Failure> {
    match &cli.command {
        Command::Validate { .. } => {
            let v = validate_qp(q);
            let g = GinzburgAlgebra::new(q)?;
            let d2 = g.d_squared_failures();
            let mut t = format!("{}\n", header(q));
            t.push_str(&format!(
                "vertices {}, arrows {}, potential terms {}\n",
                q.quiver().vertex_count(),
                q.quiver().arrow_count(),
                q.potential().num_terms()
            ));
            t.push_str(&format!("potential in m^2: {}\ncyclically normalized: {}\n", yes(v.in_m2), yes(v.cyclically_normalized)));
            t.push_str(&format!("{:<8} {:<5} {:<9} {:<12} {}\n", "vertex", "loop", "two-cycle", "cycle-split", "mutable"));
            for r in &v.vertices {
                t.push_str(&format!(
                    "{:<8} {:<5} {:<9} {:<12} {}\n",
                    r.vertex,
                    yes(r.has_loop),
                    yes(r.on_two_cycle),
                    yes(r.cycle_split_here),
                    yes(r.mutable)
                ));
            }
            t.push_str(&format!("ginzburg d^2 = 0: {}", if d2.is_empty() { "pass".to_string() } else { format!("fail at {}", d2.join(", ")) }));
            let mut r = Report::new(t, json!({"validation": v, "d_squared_failures": d2}));
            r.passed = v.is_valid() && d2.is_empty();
            Ok(r)
        }
        Command::Mutate { vertex: name, premutation, .. } => {
            let i = vertex(q, name)?;
            let r = if *premutation { premutate(q, i)? } else { mutate_checked(q, i)? };
            let out = if *premutation { &r.premutated } else { r.result() };
            let result = json!({
                "vertex": name,
                "qp": format::to_json_value(out),
                "provenance": r.names,
                "delta": if *premutation { Value::Null } else { json!(r.delta(q)) },
                "result_order": out.truncation(),
                "result_watermark": out.watermark(),
            });
            Ok(Report::new(mutation_text(&r, q, *premutation), result))
        }
        Command::MutateSeq { vertex: names, .. } => {
            let mut cur = q.clone();
            let mut steps = Vec::new();
            let mut text = String::new();
            for name in names {
                let i = vertex(&cur, name)?;
                let r = mutate_checked(&cur, i).map_err(|e| Failure::Input(format!("step {}: mutation at {name}: {e}", steps.len() + 1)))?;
                let next = r.result().clone();
                text.push_str(&format!(
                    "# mutation at {name}: {} arrows, watermark {}\n",
                    next.quiver().arrow_count(),
                    next.watermark()
                ));
                steps.push(json!({"vertex": name, "arrows": next.quiver().arrow_count(), "watermark": next.watermark(), "delta": r.delta(&cur)}));
                cur = next;
            }
            text.push_str(&format!("# {}\n", header(&cur)));
            text.push_str(&format::print_qp(&cur));
            Ok(Report::new(text, json!({"steps": steps, "qp": format::to_json_value(&cur), "result_watermark": cur.watermark()})))
        }
        Command::Reduce { .. } => {
            let s = split(q)?;
            let pairs = s.trivial_pair_names(q.quiver());
            let mut text = format!("# reduced part\n# {}\n", header(&s.reduced));
            let shown: Vec<String> = pairs.iter().map(|(a, b)| format!("{a}.{b}")).collect();
            text.push_str(&format!("# trivial pairs: {}\n", if shown.is_empty() { "none".to_string() } else { shown.join(", ") }));
            text.push_str(&format::print_qp(&s.reduced));
            let result = json!({"trivial_pairs": pairs, "passes": s.passes, "reduced": format::to_json_value(&s.reduced)});
            Ok(Report::new(text, result))
        }
        Command::Jacobian { orders, .. } => {
            let range = range_arg(orders, 1..=q.truncation())?;
            let dims = jacobian_dims(q, range.clone())?;
            let mut t = format!("{}\n{:>5} {:>8}", header(q), "n", "dim");
            for (n, d) in range.clone().zip(&dims) {
                t.push_str(&format!("\n{n:>5} {d:>8}"));
            }
            Ok(Report::new(t, json!({"orders": range.collect::<Vec<_>>(), "dims": dims})))
        }
        Command::GinzburgHomology { orders, degrees, .. } => {
            let orders: Vec<usize> = range_arg(orders, 1..=q.truncation())?.collect();
            let degrees: Vec<i32> = range_arg(degrees, -4..=0)?.collect();
            let g = GinzburgAlgebra::new(q)?;
            let table = truncation_homology(&g, &orders, &degrees)?;
            let t = format!("{}\n{}", header(q), table.to_text());
            Ok(Report::new(t, json!({"table": table, "exact_length": g.exact_length()})))
        }
        Command::VerifyBimodule { vertex: name, inject_fault, .. } => {
            let i = vertex(q, name)?;
            let mut b = BimoduleData::new(q, i)?;
            if let Some(x) = inject_fault {
                b.negate_map(x)?;
            }
            let rep = b.verify();
            let mut t = format!("{}\n", header(q));
            for c in &rep.checks {
                t.push_str(&format!("{}  {}", if c.passed { "pass" } else { "FAIL" }, c.identity));
                if let Some(g) = &c.first_offending {
                    t.push_str(&format!("  (first difference at {g})"));
                }
                t.push('\n');
            }
            let failed = rep.failures().count();
            if failed == 0 {
                t.push_str(&format!("all identities verified at order {}", rep.order));
            } else {
                t.push_str(&format!("{failed} of {} identities failed at order {}", rep.checks.len(), rep.order));
            }
            let mut r = Report::new(t, json!(rep));
            r.passed = failed == 0;
            Ok(r)
        }
        Command::ImageOfSimple { vertex: name, simple, .. } => {
            let i = vertex(q, name)?;
            let b = BimoduleData::new(q, i)?;
            let mutated = b.mutation().result().clone();
            let js: Vec<(String, VertexId)> = match simple {
                Some(j) => vec![(j.clone(), vertex(&mutated, j)?)],
                None => mutated.quiver().vertices().map(|v| (mutated.quiver().vertex_name(v).to_string(), v)).collect(),
            };
            let n = q.truncation();
            let mut t = format!("{}\n{:<8} {:<8} {:<24} {}\n", header(q), "simple", "window", "interior homology", "phi interval");
            let mut rows = Vec::new();
            for (jn, j) in js {
                let (cx, h) = b.image_of_simple(j, n)?;
                let phi = phi_interval(q, i, q.vertex(&jn)?, n)?;
                let support: Vec<String> = h.support().iter().map(|(p, d)| format!("H^{p}={d}")).collect();
                let sup = if support.is_empty() { "0".to_string() } else { support.join(" ") };
                t.push_str(&format!("{:<8} {:<8} {:<24} [{}, {}]\n", jn, h.window, sup, phi.lo, phi.hi));
                rows.push(json!({"simple": jn, "homology": h, "phi": phi, "complex": cx.to_json()}));
            }
            Ok(Report::new(t.trim_end().to_string(), json!({"images": rows})))
        }
        Command::Involution { vertex: name, .. } => {
            let i = vertex(q, name)?;
            let rep = involution_report(q, i)?;
            let t = format!(
                "{}\narrow counts match: {}\njacobian dims to order {}: {:?} vs {:?}\ninvolution: {}",
                header(q),
                yes(rep.arrows_match),
                rep.orders_compared,
                rep.original_dims,
                rep.twice_mutated_dims,
                if rep.passed() { "pass" } else { "FAIL" }
            );
            let mut r = Report::new(t, json!(rep));
            r.passed = rep.passed();
            Ok(r)
        }
        Command::Degree0 { vertex: name, orders, .. } => {
            let i = vertex(q, name)?;
            let n = q.truncation();
            let range = range_arg(orders, n.saturating_sub(1).max(2)..=n)?;
            let mut t = header(q);
            let mut reps = Vec::new();
            for k in range {
                let r = degree0_criterion(q, i, k)?;
                let dims: Vec<String> = r.interior.iter().map(|(p, d)| format!("H^{p}={d}")).collect();
                t.push_str(&format!(
                    "\nn={k} window {}: {} ({})",
                    r.window,
                    if r.consistent { "consistent" } else { "inconsistent" },
                    dims.join(" ")
                ));
                reps.push(r);
            }
            Ok(Report::new(t, json!({"reports": reps})))
        }
        Command::Serve { .. } => unreachable!("handled by run"),
        Command::Export { format: f, .. } => {
            let text = match f {
                ExportFormat::Qp => format::print_qp(q),
                ExportFormat::Json => format::to_json(q) + "\n",
                ExportFormat::Dot => format::qp_to_dot(q),
                ExportFormat::GinzburgDot => format::quiver_to_dot(GinzburgAlgebra::new(q)?.quiver(), "Ginzburg", true),
            };
            Ok(Report { text, result: Value::Null, passed: true, raw: true })
        }
    }
}

fn verb(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Mutate { .. } => "mutate",
        Command::MutateSeq { .. } => "mutate-seq",
        Command::Reduce { .. } => "reduce",
        Command::Jacobian { .. } => "jacobian",
        Command::GinzburgHomology { .. } => "ginzburg-homology",
        Command::VerifyBimodule { .. } => "verify-bimodule",
        Command::ImageOfSimple { .. } => "image-of-simple",
        Command::Involution { .. } => "involution",
        Command::Degree0 { .. } => "degree0",
        Command::Export { .. } => "export",
        Command::Serve { .. } => "serve",
    }
}

fn input_of(c: &Command) -> &str {
    match c {
        Command::Validate { input }
        | Command::Mutate { input, .. }
        | Command::MutateSeq { input, .. }
        | Command::Reduce { input }
        | Command::Jacobian { input, .. }
        | Command::GinzburgHomology { input, .. }
        | Command::VerifyBimodule { input, .. }
        | Command::ImageOfSimple { input, .. }
        | Command::Involution { input, .. }
        | Command::Degree0 { input, .. }
        | Command::Export { input, .. } => input,
        Command::Serve { .. } => "",
    }
}

/// Envelope fields shared by every JSON report: the verb, the effective
/// order and the accuracy watermark of the input.
fn envelope<K: Coeff>(cli: &Cli, q: &Qp<K>, r: &Report) -> Value {
    json!({
        "verb": verb(&cli.command),
        "field": cli.field,
        "order": q.truncation(),
        "accuracy": accuracy_json(q.accuracy()),
        "watermark": q.watermark(),
        "passed": r.passed,
        "result": r.result,
    })
}

fn execute<K: Coeff>(cli: &Cli) -> Outcome {
    let q = match load::<K>(cli, input_of(&cli.command)) {
        Ok(q) => q,
        Err(f) => return failure(cli.json, f),
    };
    match run_typed::<K>(cli, &q) {
        Ok(r) => {
            let code = if r.passed { EXIT_OK } else { EXIT_CHECK_FAILED };
            let stdout = if r.raw {
                r.text.clone()
            } else if cli.json {
                serde_json::to_string_pretty(&envelope(cli, &q, &r)).expect("plain data serializes") + "\n"
            } else {
                r.text.clone() + "\n"
            };
            Outcome { code, stdout, stderr: String::new() }
        }
        Err(f) => failure(cli.json, f),
    }
}

fn failure(json: bool, f: Failure) -> Outcome {
    let (message, diagnostics) = match f {
        Failure::Parse(e) => (e.to_string(), e.diagnostics),
        Failure::Input(m) => (m, Vec::new()),
    };
    let stdout = if json { serde_json::to_string_pretty(&json!({"error": message, "diagnostics": diagnostics})).expect("plain data") + "\n" } else { String::new() };
    Outcome { code: EXIT_INPUT_ERROR, stdout, stderr: format!("error: {message}\n") }
}

macro_rules! dispatch_primes {
    ($cli:expr, $p:expr, $($prime:literal),*) => {
        match $p {
            $($prime => execute::<Fp<$prime>>($cli),)*
            other => failure($cli.json, Failure::Input(format!(
                "unsupported prime {other}; supported: {}",
                [$($prime.to_string()),*].join(", ")
            ))),
        }
    };
}

fn serve(cli: &Cli, bind: &str, persist: &Option<std::path::PathBuf>) -> Outcome {
    let config = crate::server::ServerConfig {
        default_truncation: cli.truncation.unwrap_or(format::DEFAULT_TRUNCATION),
        persistence: persist.clone(),
        ..Default::default()
    };
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => return failure(false, Failure::Input(format!("cannot start runtime: {e}"))),
    };
    eprintln!("qpcalc: serving on http://{bind}");
    match rt.block_on(crate::server::serve(bind, config)) {
        Ok(()) => Outcome { code: EXIT_OK, stdout: String::new(), stderr: String::new() },
        Err(e) => failure(false, Failure::Input(format!("server: {e}"))),
    }
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Outcome {
    if let Command::Serve { bind, persist } = &cli.command {
        return serve(cli, bind, persist);
    }
    match cli.field.as_str() {
        "rational" => execute::<Rational>(cli),
        f => match f.strip_prefix("fp:").and_then(|p| p.parse::<u64>().ok()) {
            Some(p) => dispatch_primes!(cli, p, 2, 3, 5, 65521, 2147483647),
            None => failure(cli.json, Failure::Input(format!("unknown field `{f}`; use rational or fp:<prime>"))),
        },
    }
}

/// Parses arguments (including the program name) and runs. Writes the report
/// to `--output` when given.
pub fn main_with_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let mut out = run(&cli);
    if let Some(path) = &cli.output {
        if let Err(e) = std::fs::write(path, &out.stdout) {
            return Outcome { code: EXIT_INPUT_ERROR, stdout: String::new(), stderr: format!("error: cannot write {}: {e}\n", path.display()) };
        }
        out.stdout.clear();
    }
    out
}
