//! Command-line entry point: every engine, driven from wire-format
//! documents.
//!
//! One invocation is one session: read a document, run one engine, print the
//! result (text by default, the JSON summary with `--json`). Exit codes are
//! part of the interface so scripts can branch on outcomes without parsing:
//! 0 for success / `Complete` / `Entailed`, 2 for `NotEntailed`, 3 for a
//! tripped budget or an undecided chase, 1 for usage and input errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::chase::{chase_entails, expand_chase, ChaseBudget, ChaseVerdict};
use crate::construct::{build_nonfus_family, build_reduction, unfold_closure, ConstructError};
use crate::harness::{run_cross_check_suite, run_property_suite, CrossSuiteReport, SuiteReport};
use crate::model::{AtomSet, RuleSet, Symbol};
use crate::rewrite::{
    rewrite_with, s_rewrite, RewriteBudget, RewriteError, RewriteOptions, RewriteOutcome,
    RewriteStatus,
};
use crate::textio::{
    export_json, parse, serialize_document, serialize_ucq, Document, JsonSummary, NamedQuery,
    TextError,
};

/// What one invocation produced. `stdout` is the deliverable; `stderr`
/// carries warnings and error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Pure apart from file I/O, so tests can drive it directly.
pub fn run<I, T>(argv: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            // --help and --version arrive as errors but are successes.
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                RunOutput { code: 0, stdout: rendered, stderr: String::new() }
            } else {
                RunOutput { code: 1, stdout: String::new(), stderr: rendered }
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Rewrite(args) => cmd_rewrite(args),
        Cmd::SRewrite(args) => cmd_s_rewrite(args),
        Cmd::Chase(args) => cmd_chase(args),
        Cmd::Entail(args) => cmd_entail(args),
        Cmd::Check(args) => cmd_check(args),
        Cmd::GenNonfus(args) => cmd_gen_nonfus(args),
        Cmd::GenReduction(args) => cmd_gen_reduction(args),
        Cmd::Unfold(args) => cmd_unfold(args),
    };
    result.unwrap_or_else(|e| RunOutput {
        code: 1,
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    })
}

/// Binary entry point: prints what [`run`] returns and exits with its code.
pub fn main() -> ExitCode {
    let out = run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code)
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {err}")]
    Read { path: String, err: std::io::Error },
    #[error("{path}: {err}")]
    Write { path: String, err: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

#[derive(Debug, Parser)]
#[command(
    name = "drules",
    version,
    about = "UCQ rewriting and chasing with disjunctive existential rules"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Rewrite the document's queries over its rules (sound and complete).
    Rewrite(RewriteArgs),
    /// Rewrite over a mapping and keep only source-predicate CQs.
    SRewrite(SRewriteArgs),
    /// Grow the disjunctive chase tree from the document's facts.
    Chase(ChaseArgs),
    /// Decide whether the facts and rules entail the document's queries.
    Entail(ChaseArgs),
    /// Run the seeded duality checks and the engine cross-check.
    Check(CheckArgs),
    /// Emit the query family on which rewriting cannot terminate.
    GenNonfus(GenNonfusArgs),
    /// Translate a datalog instance into a disjunctive mapping instance.
    GenReduction(GenReductionArgs),
    /// Emit the bounded composition closure of datalog rules.
    Unfold(UnfoldArgs),
}

#[derive(Debug, Args)]
struct IoFlags {
    /// Input document.
    #[arg(short = 'i', long = "input", value_name = "FILE")]
    input: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BudgetFlags {
    /// Generate/prune rounds to run before giving up.
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
    /// Drop generated CQs larger than this many atoms.
    #[arg(long, value_name = "N")]
    max_atoms: Option<usize>,
    /// Cap on unifier applications across the whole run.
    #[arg(long, value_name = "N")]
    max_generated: Option<usize>,
    /// Wall-clock limit in seconds, checked between iterations.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<u64>,
}

#[derive(Debug, Args)]
struct RewriteArgs {
    #[command(flatten)]
    io: IoFlags,
    #[command(flatten)]
    budget: BudgetFlags,
    /// Unify one query atom per part: faster, complete only for
    /// conjunctive rules.
    #[arg(long)]
    single_piece: bool,
    /// Emit the JSON summary instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SRewriteArgs {
    #[command(flatten)]
    io: IoFlags,
    #[command(flatten)]
    budget: BudgetFlags,
    /// Emit the JSON summary instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ChaseArgs {
    #[command(flatten)]
    io: IoFlags,
    /// Leaves at this depth are not expanded further.
    #[arg(long, value_name = "N")]
    depth: Option<usize>,
    /// Stop before any trigger application would exceed this many vertices.
    #[arg(long, value_name = "N")]
    max_nodes: Option<usize>,
    /// Apply triggers even where they are already satisfied.
    #[arg(long)]
    oblivious: bool,
    /// Emit the JSON summary instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Base seed for instance generation.
    #[arg(long, value_name = "S", default_value_t = 0)]
    seed: u64,
    /// Number of generated instances per suite.
    #[arg(long, value_name = "N", default_value_t = 50)]
    count: usize,
    /// Derivation/rewriting depth for the cross-check.
    #[arg(long, value_name = "K", default_value_t = 3)]
    depth: usize,
    /// Write the report here instead of stdout.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenNonfusArgs {
    #[command(flatten)]
    io: IoFlags,
    /// Name of the two-disjunct rule to build the family from.
    #[arg(long, value_name = "NAME")]
    rule: String,
    /// Family size: emits members 0 through K.
    #[arg(long, value_name = "K", default_value_t = 0)]
    family: usize,
}

#[derive(Debug, Args)]
struct GenReductionArgs {
    #[command(flatten)]
    io: IoFlags,
    /// Name of the query to translate.
    #[arg(long, value_name = "NAME")]
    query: String,
}

#[derive(Debug, Args)]
struct UnfoldArgs {
    #[command(flatten)]
    io: IoFlags,
    /// Number of composition rounds to close under.
    #[arg(long, value_name = "K")]
    max_comp: usize,
}

fn load(path: &Path) -> Result<Document, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|err| CliError::Read { path: path.display().to_string(), err })?;
    Ok(parse(&text)?)
}

fn positive(flag: &str, value: Option<usize>) -> Result<(), CliError> {
    if value == Some(0) {
        return Err(CliError::Usage(format!("{flag} must be positive")));
    }
    Ok(())
}

fn rewrite_budget(flags: &BudgetFlags) -> Result<RewriteBudget, CliError> {
    positive("--max-iter", flags.max_iter)?;
    positive("--max-atoms", flags.max_atoms)?;
    positive("--max-generated", flags.max_generated)?;
    positive("--time-limit", flags.time_limit.map(|s| s as usize))?;
    let mut budget = RewriteBudget::default();
    if let Some(n) = flags.max_iter {
        budget.max_iterations = n;
    }
    if let Some(n) = flags.max_atoms {
        budget.max_cq_atoms = n;
    }
    if let Some(n) = flags.max_generated {
        budget.max_generated = n;
    }
    if let Some(secs) = flags.time_limit {
        budget.time_limit = Some(Duration::from_secs(secs));
    }
    Ok(budget)
}

fn chase_budget(args: &ChaseArgs) -> Result<ChaseBudget, CliError> {
    positive("--depth", args.depth)?;
    positive("--max-nodes", args.max_nodes)?;
    let mut budget = ChaseBudget::default();
    if let Some(n) = args.depth {
        budget.max_depth = n;
    }
    if let Some(n) = args.max_nodes {
        budget.max_nodes = n;
    }
    budget.restricted = !args.oblivious;
    Ok(budget)
}

/// Routes the deliverable to `-o FILE` or stdout.
fn emit(
    body: String,
    code: u8,
    stderr: String,
    out: Option<&Path>,
) -> Result<RunOutput, CliError> {
    match out {
        Some(path) => {
            fs::write(path, &body)
                .map_err(|err| CliError::Write { path: path.display().to_string(), err })?;
            Ok(RunOutput { code, stdout: String::new(), stderr })
        }
        None => Ok(RunOutput { code, stdout: body, stderr }),
    }
}

fn rewrite_output(
    outcome: &RewriteOutcome,
    json: bool,
    io: &IoFlags,
    stderr: String,
) -> Result<RunOutput, CliError> {
    let status = match outcome.status {
        RewriteStatus::Complete => "complete",
        RewriteStatus::BudgetExhausted => "budget_exhausted",
    };
    let body = if json {
        export_json(&JsonSummary {
            status: status.to_string(),
            iterations: outcome.iterations as u64,
            generated_count: outcome.generated_count as u64,
            cover_size: outcome.result.len() as u64,
            cqs: outcome.result.canonical_strings(),
            elapsed_ms: outcome.elapsed.as_millis() as u64,
        })
    } else {
        format!(
            "status: {status}\niterations: {}\ngenerated: {}\ncover: {}\n{}",
            outcome.iterations,
            outcome.generated_count,
            outcome.result.len(),
            serialize_ucq(&outcome.result)
        )
    };
    let code = match outcome.status {
        RewriteStatus::Complete => 0,
        RewriteStatus::BudgetExhausted => 3,
    };
    emit(body, code, stderr, io.output.as_deref())
}

fn cmd_rewrite(args: RewriteArgs) -> Result<RunOutput, CliError> {
    let doc = load(&args.io.input)?;
    let budget = rewrite_budget(&args.budget)?;
    let options = RewriteOptions { single_piece: args.single_piece };
    let outcome = rewrite_with(&doc.ucq(), doc.rules(), &budget, options, &doc.var_gen());
    let stderr = if args.single_piece {
        "warning: single-piece unification is incomplete for disjunctive rules; \
         the result is sound but may miss rewritings\n"
            .to_string()
    } else {
        String::new()
    };
    rewrite_output(&outcome, args.json, &args.io, stderr)
}

fn cmd_s_rewrite(args: SRewriteArgs) -> Result<RunOutput, CliError> {
    let doc = load(&args.io.input)?;
    let budget = rewrite_budget(&args.budget)?;
    let mapping = doc.mapping()?;
    let outcome = s_rewrite(&doc.ucq(), &mapping, &budget, &doc.var_gen())?;
    rewrite_output(&outcome, args.json, &args.io, String::new())
}

fn cmd_chase(args: ChaseArgs) -> Result<RunOutput, CliError> {
    let doc = load(&args.io.input)?;
    let budget = chase_budget(&args)?;
    let tree = expand_chase(doc.facts(), doc.rules(), budget, &doc.var_gen());
    let saturated = tree.is_saturated();
    let status = if saturated { "complete" } else { "budget_exhausted" };
    let body = if args.json {
        export_json(&JsonSummary {
            status: status.to_string(),
            iterations: tree.depth() as u64,
            generated_count: tree.len() as u64,
            cover_size: 0,
            cqs: Vec::new(),
            elapsed_ms: 0,
        })
    } else {
        tree.render(doc.rules())
    };
    emit(body, if saturated { 0 } else { 3 }, String::new(), args.io.output.as_deref())
}

fn cmd_entail(args: ChaseArgs) -> Result<RunOutput, CliError> {
    let doc = load(&args.io.input)?;
    if doc.queries().is_empty() {
        return Err(CliError::Usage(format!(
            "{}: document has no queries to entail",
            args.io.input.display()
        )));
    }
    let budget = chase_budget(&args)?;
    let verdict =
        chase_entails(doc.facts(), doc.rules(), &doc.ucq(), budget, &doc.var_gen());
    let (code, depth, nodes) = match &verdict {
        ChaseVerdict::Entailed(tree) => (0, tree.depth(), tree.len()),
        ChaseVerdict::NotEntailed(tree, _) => (2, tree.depth(), tree.len()),
        ChaseVerdict::Unknown(stats) => (3, stats.depth, stats.nodes),
    };
    let body = if args.json {
        export_json(&JsonSummary {
            status: verdict.status().to_string(),
            iterations: depth as u64,
            generated_count: nodes as u64,
            cover_size: 0,
            cqs: Vec::new(),
            elapsed_ms: 0,
        })
    } else {
        format!("{}\n", verdict.status())
    };
    emit(body, code, String::new(), args.io.output.as_deref())
}

/// The `check` report: both suites plus the verdict, always JSON.
#[derive(Debug, Serialize)]
struct CheckReport {
    seed: u64,
    count: usize,
    depth: usize,
    clean: bool,
    properties: SuiteReport,
    cross_check: CrossSuiteReport,
}

fn cmd_check(args: CheckArgs) -> Result<RunOutput, CliError> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be positive".to_string()));
    }
    let properties = run_property_suite(args.seed, args.count);
    let cross_check = run_cross_check_suite(args.seed, args.count, args.depth);
    let clean = properties.is_clean() && cross_check.is_clean();
    let report =
        CheckReport { seed: args.seed, count: args.count, depth: args.depth, clean, properties, cross_check };
    let mut body = serde_json::to_string_pretty(&report).expect("report serializes");
    body.push('\n');
    emit(body, if clean { 0 } else { 2 }, String::new(), args.output.as_deref())
}

fn cmd_gen_nonfus(args: GenNonfusArgs) -> Result<RunOutput, CliError> {
    let doc = load(&args.io.input)?;
    let rule = doc
        .rules()
        .iter()
        .find(|r| r.name().map(Symbol::as_str) == Some(args.rule.as_str()))
        .ok_or_else(|| {
            CliError::Usage(format!(
                "no rule named {} in {}",
                args.rule,
                args.io.input.display()
            ))
        })?;
    let family = build_nonfus_family(rule, args.family, &doc.var_gen())?;
    let queries: Vec<NamedQuery> = family
        .into_iter()
        .enumerate()
        .map(|(i, cq)| NamedQuery { name: Some(Symbol::new(&format!("q{i}"))), cq })
        .collect();
    let out = Document::new(AtomSet::new(), RuleSet::new(Vec::new(), &doc.var_gen()), queries, None)?;
    emit(serialize_document(&out), 0, String::new(), args.io.output.as_deref())
}

fn cmd_gen_reduction(args: GenReductionArgs) -> Result<RunOutput, CliError> {
    let doc = load(&args.io.input)?;
    let named = doc
        .queries()
        .iter()
        .find(|nq| nq.name.as_ref().map(Symbol::as_str) == Some(args.query.as_str()))
        .ok_or_else(|| {
            CliError::Usage(format!(
                "no query named {} in {}",
                args.query,
                args.io.input.display()
            ))
        })?;
    let red = build_reduction(&named.cq, doc.rules(), &doc.var_gen())?;
    // The translated input query is the one member without a marker atom.
    let q_q = red
        .ucq
        .iter()
        .find(|cq| !red.entries.iter().any(|e| &e.query == *cq))
        .expect("the translated query carries no marker atom")
        .clone();
    let mut queries = vec![NamedQuery { name: Some(Symbol::new("q")), cq: q_q }];
    for entry in &red.entries {
        queries.push(NamedQuery {
            name: Some(Symbol::new(&format!("q_{}", entry.rule_name))),
            cq: entry.query.clone(),
        });
    }
    let out = Document::new(
        AtomSet::new(),
        red.mapping.rules().clone(),
        queries,
        Some(red.mapping.source().clone()),
    )?;
    emit(serialize_document(&out), 0, String::new(), args.io.output.as_deref())
}

fn cmd_unfold(args: UnfoldArgs) -> Result<RunOutput, CliError> {
    let doc = load(&args.io.input)?;
    let datalog = doc.rules().is_datalog()
        && doc.rules().iter().all(|r| r.head_atom().is_some());
    if !datalog {
        return Err(CliError::Usage(
            "unfold requires conjunctive datalog rules with atomic heads".to_string(),
        ));
    }
    let closure = unfold_closure(doc.rules(), args.max_comp, &doc.var_gen());
    let out = Document::new(AtomSet::new(), closure, Vec::new(), None)?;
    emit(serialize_document(&out), 0, String::new(), args.io.output.as_deref())
}
