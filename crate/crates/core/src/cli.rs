//! Command-line front end.
//!
//! Exit codes: 0 everything passes or holds, 1 a violation or failure was
//! found, 2 usage, parse or load error, 3 not applicable (hypotheses unmet).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::agreement::{default_thresholds, AgreementChecker, Outcome, RenderedVerdict, Theorem};
use crate::axioms::{self, AxiomOptions};
use crate::event::Event;
use crate::expr::{self, ExprError};
use crate::model::{EpistemicModel, DEFAULT_MAX_STATES};
use crate::modelfile::{self, LoadError};
use crate::report::{AxiomId, CheckReport, RenderedReport, Subject, Verdict};
use crate::search::{self, Family, SearchParams, Target};
use crate::values::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_APPLICABLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "plausia", version, about = "Check agreement theorems on finite epistemic plausibility models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Seed for sampled checks and random search.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model file.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate an operator expression such as `CB(1/2, {w1 w2})`.
    Eval {
        file: PathBuf,
        expression: String,
        /// Print the fixpoint iterations.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the axiom suite.
    Axioms {
        file: PathBuf,
        /// Comma-separated subset, e.g. `CP3,CP7`; also accepts `M3-SAT` and `CP6-IMPL`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Skip A3 tuples whose summands are both ⊥.
        #[arg(long)]
        exempt_bot_bot: bool,
        /// Extra CP7 thresholds, checked first.
        #[arg(long)]
        threshold: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Check an agreement theorem. Without `--event` every event is swept.
    Agreement {
        file: PathBuf,
        #[arg(long)]
        theorem: String,
        /// Event name, set literal or expression.
        #[arg(long)]
        event: Option<String>,
        /// Threshold `d`; repeat to sweep several.
        #[arg(long)]
        threshold: Vec<String>,
        /// Hypotheses to ignore, comma-separated.
        #[arg(long, value_delimiter = ',')]
        drop: Vec<String>,
        #[arg(long)]
        exempt_bot_bot: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Mine counterexamples over enumerated or random models.
    Search {
        /// Axiom id, `M3-SAT`, or a theorem (aumann, msn, msn-mult, msn-nomult).
        #[arg(long)]
        target: String,
        /// Hypotheses to drop, comma-separated.
        #[arg(long, value_delimiter = ',')]
        drop: Vec<String>,
        #[arg(long, default_value = "probability")]
        family: String,
        #[arg(long, default_value_t = 1)]
        min_states: usize,
        #[arg(long, default_value_t = 3)]
        max_states: usize,
        #[arg(long, default_value_t = 2)]
        agents: usize,
        /// Largest prior denominator.
        #[arg(long, default_value_t = 4)]
        denominator: u32,
        /// Draw this many random models instead of enumerating.
        #[arg(long)]
        random: Option<usize>,
        /// Maximum number of models examined.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 10)]
        max_witnesses: usize,
        /// Theorem thresholds (default: per-model candidates).
        #[arg(long)]
        threshold: Vec<String>,
        /// Directory for `witness_NNN.epm` files and `manifest.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare fixpoint C and CB with brute-force subset enumeration.
    OracleDiff {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        event: Option<String>,
        #[arg(long)]
        threshold: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

/// A failure that ends the command with exit code 2.
struct UsageError(String);

impl From<String> for UsageError {
    fn from(s: String) -> Self {
        UsageError(s)
    }
}

type CmdResult = Result<i32, UsageError>;

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{text}");
                EXIT_OK
            } else {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate { file, common } => cmd_validate(&file, &common, out),
        Command::Eval {
            file,
            expression,
            trace,
            common,
        } => cmd_eval(&file, &expression, trace, &common, out),
        Command::Axioms {
            file,
            only,
            exempt_bot_bot,
            threshold,
            common,
        } => cmd_axioms(&file, &only, exempt_bot_bot, &threshold, &common, out),
        Command::Agreement {
            file,
            theorem,
            event,
            threshold,
            drop,
            exempt_bot_bot,
            common,
        } => cmd_agreement(
            &file,
            &theorem,
            event.as_deref(),
            &threshold,
            &drop,
            exempt_bot_bot,
            &common,
            out,
        ),
        Command::Search {
            target,
            drop,
            family,
            min_states,
            max_states,
            agents,
            denominator,
            random,
            budget,
            max_witnesses,
            threshold,
            out: dir,
            common,
        } => {
            let family: Family = family.parse()?;
            let params = SearchParams {
                family,
                min_states,
                max_states,
                agents,
                denominator,
                random,
                thresholds: Vec::new(),
                seed: common.seed,
                budget,
                max_witnesses,
            };
            cmd_search(&target, &drop, params, &threshold, dir.as_deref(), &common, out)
        }
        Command::OracleDiff {
            files,
            event,
            threshold,
            common,
        } => cmd_oracle_diff(&files, event.as_deref(), &threshold, &common, out),
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, format: Format, value: &T, text: impl FnOnce() -> String) -> Result<(), UsageError> {
    let s = match format {
        Format::Json => serde_json::to_string_pretty(value).expect("outputs serialize"),
        Format::Text => text(),
    };
    writeln!(out, "{}", s.trim_end()).map_err(|e| UsageError(format!("cannot write output: {e}")))
}

fn read(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<EpistemicModel, UsageError> {
    let text = read(path)?;
    modelfile::parse_with_limit(&text, DEFAULT_MAX_STATES).map_err(|e| match e {
        LoadError::Syntax(errors) => UsageError(
            errors
                .iter()
                .map(|e| format!("{}:{e}", path.display()))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        LoadError::Invalid(report) => UsageError(format!(
            "{}: model is invalid (run `plausia validate` for details): {}",
            path.display(),
            report.notes.first().cloned().unwrap_or_else(|| format!("{} failure(s)", report.failures))
        )),
    })
}

fn expr_error(source: &str, what: &str, e: ExprError) -> UsageError {
    UsageError(format!(
        "in {what} `{source}`: {e}\n  {source}\n  {caret:>width$}",
        caret = "^",
        width = e.column
    ))
}

fn parse_event(model: &EpistemicModel, text: &str) -> Result<Event, UsageError> {
    let e = expr::parse_expression(text).map_err(|e| expr_error(text, "event", e))?;
    Ok(expr::evaluate(model, &e).map_err(|e| expr_error(text, "event", e))?.event)
}

fn parse_thresholds(model: &EpistemicModel, texts: &[String]) -> Result<Vec<Value>, UsageError> {
    texts
        .iter()
        .map(|t| expr::parse_threshold(t, model).map_err(|e| expr_error(t, "threshold", e)))
        .collect()
}

fn parse_axiom_ids(texts: &[String]) -> Result<Vec<AxiomId>, UsageError> {
    texts
        .iter()
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<AxiomId>().map_err(UsageError))
        .collect()
}

/// Exit code for a set of reports.
fn reports_exit(reports: &[CheckReport]) -> i32 {
    if reports.iter().any(CheckReport::failed) {
        EXIT_VIOLATION
    } else if !reports.is_empty() && reports.iter().all(|r| r.verdict == Verdict::NotApplicable) {
        EXIT_NOT_APPLICABLE
    } else {
        EXIT_OK
    }
}

#[derive(Serialize)]
struct ValidateOutput {
    model: String,
    report: RenderedReport,
}

fn cmd_validate(file: &Path, common: &Common, out: &mut dyn Write) -> CmdResult {
    let text = read(file)?;
    let model = match modelfile::parse_unvalidated(&text, DEFAULT_MAX_STATES) {
        Ok(m) => m,
        Err(errors) => {
            let msg: Vec<String> = errors.iter().map(|e| format!("{}:{e}", file.display())).collect();
            return Err(UsageError(msg.join("\n")));
        }
    };
    let report = crate::model::validate_model(&model);
    let output = ValidateOutput {
        model: model.name().to_string(),
        report: report.render(model.states(), model.agents()),
    };
    emit(out, common.format, &output, || output.report.to_string())?;
    Ok(reports_exit(std::slice::from_ref(&report)))
}

#[derive(Serialize)]
struct RenderedTrace {
    operator: String,
    initial: String,
    iterations: Vec<String>,
    result: String,
}

#[derive(Serialize)]
struct EvalOutput {
    expression: String,
    event: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    traces: Option<Vec<RenderedTrace>>,
}

fn cmd_eval(file: &Path, expression: &str, trace: bool, common: &Common, out: &mut dyn Write) -> CmdResult {
    let model = load(file)?;
    let parsed = expr::parse_expression(expression).map_err(|e| expr_error(expression, "expression", e))?;
    let eval = expr::evaluate(&model, &parsed).map_err(|e| expr_error(expression, "expression", e))?;
    let states = model.states();
    let output = EvalOutput {
        expression: parsed.to_string(),
        event: states.render(eval.event),
        traces: trace.then(|| {
            eval.traces
                .iter()
                .map(|t| RenderedTrace {
                    operator: t.operator.clone(),
                    initial: states.render(t.trace.initial),
                    iterations: t.trace.iterations.iter().map(|z| states.render(*z)).collect(),
                    result: states.render(t.trace.result),
                })
                .collect()
        }),
    };
    emit(out, common.format, &output, || {
        let mut s = output.event.clone();
        for t in output.traces.iter().flatten() {
            let _ = write!(s, "\n{}: start {}", t.operator, t.initial);
            for (k, z) in t.iterations.iter().enumerate() {
                let _ = write!(s, "\n  iteration {}: {z}", k + 1);
            }
            let _ = write!(s, "\n  result {}", t.result);
        }
        s
    })?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AxiomsOutput {
    model: String,
    reports: Vec<RenderedReport>,
}

fn cmd_axioms(
    file: &Path,
    only: &[String],
    exempt_bot_bot: bool,
    thresholds: &[String],
    common: &Common,
    out: &mut dyn Write,
) -> CmdResult {
    let model = load(file)?;
    let mut opts = AxiomOptions::from_env();
    opts.exempt_bot_bot = exempt_bot_bot;
    opts.seed = common.seed;
    opts.thresholds = parse_thresholds(&model, thresholds)?;
    let mut ids = Vec::new();
    let mut extra = Vec::new();
    for token in only.iter().map(|t| t.trim()).filter(|t| !t.is_empty()) {
        match token.to_ascii_uppercase().as_str() {
            "M3-SAT" => extra.push(Subject::M3Satisfiability),
            "CP6-IMPL" => extra.push(Subject::Cp6Implication),
            _ => ids.push(token.parse::<AxiomId>().map_err(UsageError)?),
        }
    }
    let mut reports = if ids.is_empty() && !extra.is_empty() {
        Vec::new()
    } else {
        axioms::run_suite(&model, &ids, &opts)
    };
    for subject in extra {
        reports.push(match subject {
            Subject::M3Satisfiability => axioms::check_m3_satisfiability(&model, &opts),
            _ => axioms::check_cp6_implication(&model, &opts),
        });
    }
    let output = AxiomsOutput {
        model: model.name().to_string(),
        reports: reports.iter().map(|r| r.render(model.states(), model.agents())).collect(),
    };
    emit(out, common.format, &output, || {
        output.reports.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
    })?;
    Ok(reports_exit(&reports))
}

#[derive(Serialize)]
struct AgreementOutput {
    model: String,
    theorem: String,
    summary: BTreeMap<String, usize>,
    verdicts: Vec<RenderedVerdict>,
}

fn verdicts_exit(outcomes: &[Outcome]) -> i32 {
    if outcomes.contains(&Outcome::Violated) {
        EXIT_VIOLATION
    } else if !outcomes.is_empty() && outcomes.iter().all(|o| *o == Outcome::NotApplicable) {
        EXIT_NOT_APPLICABLE
    } else {
        EXIT_OK
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_agreement(
    file: &Path,
    theorem: &str,
    event: Option<&str>,
    thresholds: &[String],
    drop: &[String],
    exempt_bot_bot: bool,
    common: &Common,
    out: &mut dyn Write,
) -> CmdResult {
    let theorem: Theorem = theorem.parse()?;
    let model = load(file)?;
    let dropped = parse_axiom_ids(drop)?;
    let thresholds = parse_thresholds(&model, thresholds)?;
    let mut opts = AxiomOptions::from_env();
    opts.exempt_bot_bot = exempt_bot_bot;
    opts.seed = common.seed;
    opts.thresholds = thresholds.clone();
    let checker = AgreementChecker::new(&model, opts);
    let events: Vec<Event> = match event {
        Some(text) => vec![parse_event(&model, text)?],
        None => Event::all(model.num_states()).collect(),
    };
    let ds: Vec<Option<Value>> = if !theorem.needs_threshold() {
        vec![None]
    } else if thresholds.is_empty() {
        if event.is_some() {
            return Err(UsageError(format!("--threshold is required for {theorem}")));
        }
        default_thresholds(&model).into_iter().map(Some).collect()
    } else {
        thresholds.into_iter().map(Some).collect()
    };
    let mut verdicts = Vec::new();
    for &e in &events {
        for d in &ds {
            verdicts.push(
                checker
                    .check_with(theorem, e, d.as_ref(), &dropped)
                    .map_err(|e| UsageError(e.to_string()))?,
            );
        }
    }
    let outcomes: Vec<Outcome> = verdicts.iter().map(|v| v.outcome).collect();
    let mut summary = BTreeMap::new();
    for o in &outcomes {
        *summary.entry(o.to_string()).or_insert(0) += 1;
    }
    let rendered: Vec<RenderedVerdict> = verdicts.iter().map(|v| v.render(model.states(), model.agents())).collect();
    let single = rendered.len() == 1;
    let output = AgreementOutput {
        model: model.name().to_string(),
        theorem: theorem.to_string(),
        summary,
        verdicts: rendered,
    };
    emit(out, common.format, &output, || {
        if single {
            return output.verdicts[0].to_string();
        }
        let mut s = String::new();
        for v in &output.verdicts {
            if v.outcome == Outcome::Violated {
                let _ = writeln!(s, "{v}");
            } else {
                let d = v.threshold.as_ref().map(|d| format!(" d={d}")).unwrap_or_default();
                let _ = writeln!(s, "{} E={}{d}: {}", v.theorem, v.event, v.outcome);
            }
        }
        let counts: Vec<String> = output.summary.iter().map(|(k, n)| format!("{n} {k}")).collect();
        let _ = write!(s, "summary: {}", counts.join(", "));
        s
    })?;
    Ok(verdicts_exit(&outcomes))
}

fn cmd_search(
    target: &str,
    drop: &[String],
    mut params: SearchParams,
    thresholds: &[String],
    dir: Option<&Path>,
    common: &Common,
    out: &mut dyn Write,
) -> CmdResult {
    let target: Target = target.parse()?;
    let dropped = parse_axiom_ids(drop)?;
    if !thresholds.is_empty() {
        let probe = search::enumerate_models(&SearchParams {
            min_states: 1,
            max_states: 1,
            budget: 1,
            random: None,
            ..params.clone()
        })
        .map_err(|e| UsageError(e.to_string()))?;
        let model = probe
            .models
            .first()
            .ok_or_else(|| UsageError("cannot build a model to type thresholds".into()))?;
        params.thresholds = parse_thresholds(model, thresholds)?;
    }
    let outcome = search::mine_counterexamples(target, &dropped, &params).map_err(|e| UsageError(e.to_string()))?;
    let manifest = match dir {
        Some(dir) => search::write_witnesses(&outcome, &params, dir).map_err(|e| UsageError(e.to_string()))?,
        None => search::Manifest::new(&outcome, &params),
    };
    emit(out, common.format, &manifest, || {
        let mut s = format!(
            "target {}: examined {} model(s), {} satisfied the hypotheses",
            manifest.target, manifest.examined, manifest.eligible
        );
        if !manifest.dropped.is_empty() {
            let _ = write!(s, " (dropped {})", manifest.dropped.join(","));
        }
        if manifest.exhausted {
            s.push_str("\nbudget exhausted before the corpus ended");
        }
        if manifest.witnesses.is_empty() {
            s.push_str("\nno counterexample found");
        }
        for w in &manifest.witnesses {
            let _ = write!(s, "\n{}: {} [{}]\n  reproduce: {}", w.file, w.summary, w.model, w.reproduce);
        }
        s
    })?;
    Ok(if outcome.witnesses.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

#[derive(Serialize)]
struct OracleMismatch {
    event: String,
    threshold: Option<String>,
    fixpoint: String,
    brute_force: String,
}

#[derive(Serialize)]
struct OracleModelOutput {
    file: String,
    model: String,
    comparisons: usize,
    mismatches: Vec<OracleMismatch>,
}

fn cmd_oracle_diff(
    files: &[PathBuf],
    event: Option<&str>,
    thresholds: &[String],
    common: &Common,
    out: &mut dyn Write,
) -> CmdResult {
    let mut outputs = Vec::new();
    for file in files {
        let model = load(file)?;
        let events: Vec<Event> = match event {
            Some(text) => vec![parse_event(&model, text)?],
            None => Event::all(model.num_states()).collect(),
        };
        let ds = if thresholds.is_empty() {
            default_thresholds(&model)
        } else {
            parse_thresholds(&model, thresholds)?
        };
        let comparisons = search::oracle_diff(&model, &events, &ds).map_err(|e| UsageError(e.to_string()))?;
        let states = model.states();
        outputs.push(OracleModelOutput {
            file: file.display().to_string(),
            model: model.name().to_string(),
            comparisons: comparisons.len(),
            mismatches: comparisons
                .iter()
                .filter(|c| !c.agrees())
                .map(|c| OracleMismatch {
                    event: states.render(c.event),
                    threshold: c.threshold.as_ref().map(ToString::to_string),
                    fixpoint: states.render(c.fixpoint),
                    brute_force: states.render(c.brute_force),
                })
                .collect(),
        });
    }
    emit(out, common.format, &outputs, || {
        let mut s = String::new();
        for o in &outputs {
            let _ = write!(
                s,
                "{}: {} comparison(s), {} mismatch(es)",
                o.file,
                o.comparisons,
                o.mismatches.len()
            );
            for m in &o.mismatches {
                let op = m.threshold.as_ref().map(|d| format!("CB({d}, ")).unwrap_or_else(|| "C(".into());
                let _ = write!(s, "\n  {op}{}): fixpoint {} vs brute force {}", m.event, m.fixpoint, m.brute_force);
            }
            s.push('\n');
        }
        s
    })?;
    Ok(if outputs.iter().any(|o| !o.mismatches.is_empty()) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}
