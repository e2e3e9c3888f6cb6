//! Command-line surface. Exit codes: 0 success, 1 input or parse error,
//! 2 verification mismatch, 3 backend failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{read_query_suite, run_bench, BenchOptions, NamedQuery};
use crate::dispatch::DispatchError;
use crate::mql::translate_with_label;
use crate::ntriples::{documents_to_jsonl, ParseMode};
use crate::results;
use crate::routing::{select_backends, RoutingPolicy};
use crate::shape::label_query;
use crate::sparql::parse_query;
use crate::workspace::Workspace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "symphony",
    version,
    about = "Route knowledge-graph queries across SPARQL and document backends"
)]
struct Cli {
    /// Routing policy file (TOML). Defaults to $SYMPHONY_CONFIG, then the built-in policy.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// N-Triples file to load before running.
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load an N-Triples file and report what was ingested.
    Load {
        file: PathBuf,
        #[arg(long, conflicts_with = "lenient")]
        strict: bool,
        #[arg(long)]
        lenient: bool,
        /// Print the derived documents as JSON lines.
        #[arg(long)]
        dump_docs: bool,
    },
    /// Run a query (text or file) and print its bindings.
    Query {
        query: String,
        #[command(flatten)]
        data: DataArgs,
        /// Print the standard SPARQL JSON results document.
        #[arg(long)]
        json: bool,
    },
    /// Show label, routing decision and pipeline translation. Needs no data.
    Explain { query: String },
    /// Run a query on every capable backend and compare results.
    Verify {
        query: String,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Time every backend on each query of a suite file.
    Bench {
        file: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        repeat: u64,
        /// Rebuild engines before each repeat.
        #[arg(long)]
        cold: bool,
        /// Run repeats concurrently.
        #[arg(long)]
        parallel: bool,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

impl From<DispatchError> for Failure {
    fn from(e: DispatchError) -> Self {
        Failure {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let policy = RoutingPolicy::resolve(cli.config.as_deref()).map_err(Failure::input)?;
    policy.validate().map_err(Failure::input)?;
    match cli.command {
        Command::Load {
            file,
            lenient,
            dump_docs,
            ..
        } => cmd_load(&file, mode(lenient), dump_docs, policy, out),
        Command::Query { query, data, json } => {
            let ws = load(&data, policy)?;
            cmd_query(&ws, &query_text(&query)?, json, out)
        }
        Command::Explain { query } => cmd_explain(&query_text(&query)?, &policy, out),
        Command::Verify { query, data } => {
            let ws = load(&data, policy)?;
            cmd_verify(&ws, &query_text(&query)?, out)
        }
        Command::Bench {
            file,
            data,
            repeat,
            cold,
            parallel,
        } => {
            let ws = load(&data, policy)?;
            let text = read(&file)?;
            let opts = BenchOptions {
                repeat: repeat as usize,
                cold,
                parallel,
            };
            cmd_bench(&ws, &read_query_suite(&text), &opts, out)
        }
    }
}

fn mode(lenient: bool) -> ParseMode {
    if lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

/// An existing file path is read; anything else is taken as query text.
fn query_text(arg: &str) -> Result<String, Failure> {
    let p = Path::new(arg);
    if !arg.contains('{') && p.is_file() {
        read(p)
    } else {
        Ok(arg.to_string())
    }
}

fn load(data: &DataArgs, policy: RoutingPolicy) -> Result<Workspace, Failure> {
    Workspace::load(&data.data, mode(data.lenient), policy).map_err(Failure::input)
}

fn io(e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: format!("write failed: {e}"),
    }
}

fn cmd_load(file: &Path, mode: ParseMode, dump_docs: bool, policy: RoutingPolicy, out: &mut dyn Write) -> CmdResult {
    let ws = Workspace::load(file, mode, policy).map_err(Failure::input)?;
    let r = ws.report();
    let mut line = format!("{} triples, {} documents", ws.graph().len(), r.documents_emitted);
    if mode == ParseMode::Lenient {
        line.push_str(&format!(", {} malformed lines skipped", r.malformed.len()));
    }
    writeln!(out, "{line}").map_err(io)?;
    for (n, why) in &r.malformed {
        writeln!(out, "  line {n}: {why}").map_err(io)?;
    }
    if dump_docs {
        out.write_all(documents_to_jsonl(ws.documents()).as_bytes())
            .map_err(io)?;
    }
    Ok(())
}

fn cmd_query(ws: &Workspace, q: &str, json: bool, out: &mut dyn Write) -> CmdResult {
    let o = ws.dispatcher().execute(q)?;
    log::info!("{} answered via {}", o.winner, o.decision);
    if json {
        writeln!(out, "{}", results::to_json_string(&o.result)).map_err(io)
    } else {
        writeln!(out, "{}", o.result).map_err(io)
    }
}

fn cmd_explain(q: &str, policy: &RoutingPolicy, out: &mut dyn Write) -> CmdResult {
    let ast = parse_query(q).map_err(Failure::input)?;
    let label = label_query(&ast).map_err(Failure::input)?;
    let decision = select_backends(&label, policy);
    writeln!(out, "shape={}; route={}", label.shape.name(), decision).map_err(io)?;
    writeln!(
        out,
        "label: {} (modifiers={}, optional={}, filter={})",
        label.summary(&ast),
        label.has_modifiers,
        label.has_optional,
        label.has_filter
    )
    .map_err(io)?;
    if !decision.requires_translation() {
        return writeln!(out, "translation: n/a").map_err(io);
    }
    match translate_with_label(&ast, &label, crate::mql::DEFAULT_COLLECTION) {
        Ok(t) => writeln!(out, "translation:\n{}", t.pipeline.to_pretty()).map_err(io),
        Err(e) => writeln!(out, "translation: unavailable ({e}); pipeline targets would be skipped").map_err(io),
    }
}

fn cmd_verify(ws: &Workspace, q: &str, out: &mut dyn Write) -> CmdResult {
    match ws.dispatcher().execute_verified(q) {
        Ok((_, report)) => write!(out, "{report}").map_err(io),
        Err(DispatchError::VerificationMismatch(m)) => {
            write!(out, "{}", m.report).map_err(io)?;
            writeln!(
                out,
                "{} returned:\n{}\n{} returned:\n{}",
                m.reference, m.expected, m.slot, m.actual
            )
            .map_err(io)?;
            Err(DispatchError::VerificationMismatch(m).into())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_bench(ws: &Workspace, queries: &[NamedQuery], opts: &BenchOptions, out: &mut dyn Write) -> CmdResult {
    let lines = run_bench(ws, queries, opts).map_err(Failure::input)?;
    for l in &lines {
        writeln!(out, "{l}").map_err(io)?;
    }
    Ok(())
}
