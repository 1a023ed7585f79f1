//! Command-line front end over the JSON formats of `hrpn`.
//!
//! [`run`] parses arguments and executes one command, returning the exit code
//! and the text meant for stdout and stderr, so tests need no subprocess.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hrpn::dpo::{check_gluing, parallel_independent, transform, Rule};
use hrpn::format::{to_json, Document, FlatDoc, FormatError, Model};
use hrpn::hier::diagnostics;
use hrpn::matching::{find_occurrences, isomorphic, NetMorphism, Occurrence};
use hrpn::net::PTNet;
use hrpn::sim::{replay, simulate, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "hrpn", version, about = "Hierarchical reconfigurable Petri nets")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub format: OutputFormat,
    /// Re-flatten hierarchies and compare with their cached flat component.
    #[arg(long, global = true)]
    pub verify_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a document is well defined.
    Validate { input: PathBuf },
    /// Flatten a hierarchy into one net with the combined rule set.
    Flatten {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the hierarchy with its flat component attached.
        #[arg(long)]
        persist: Option<PathBuf>,
    },
    /// Fire transitions and apply rules at random; prints the trace.
    Simulate {
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Where to write the final snapshot.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a trace and print the final snapshot.
    Replay {
        input: PathBuf,
        trace: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the occurrences of a rule's left-hand side.
    Match {
        input: PathBuf,
        #[arg(long)]
        rule: String,
    },
    /// Apply a rule at one of its occurrences.
    Apply {
        input: PathBuf,
        #[arg(long)]
        rule: String,
        /// Index into the list printed by `match`.
        #[arg(long, default_value_t = 0)]
        occurrence: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide parallel independence of two matches, given as `rule@index`.
    Independent {
        input: PathBuf,
        first: String,
        second: String,
    },
    /// Decide whether the nets of two documents are isomorphic.
    Isomorphic { left: PathBuf, right: PathBuf },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// 1: the input is well formed but violates a condition. 2: bad input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn domain(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Json(_) | FormatError::Invalid(_) | FormatError::CyclicLayout(_) => {
                CliError::input(e.to_string())
            }
            _ => CliError::domain(e.to_string()),
        }
    }
}

type CmdResult = Result<Outcome, CliError>;

fn ok(stdout: String) -> CmdResult {
    Ok(Outcome { code: 0, stdout, stderr: String::new() })
}

pub fn load(path: &Path) -> Result<Document, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Document::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Writes to `out` when given, else returns the text for stdout.
fn emit(out: &Option<PathBuf>, text: String) -> Result<String, CliError> {
    match out {
        Some(p) => write_file(p, &text).map(|_| String::new()),
        None => Ok(text),
    }
}

fn summary(net: &PTNet, rules: &[Rule]) -> String {
    format!(
        "{} places, {} transitions, {} rules, {} tokens\n",
        net.places().len(),
        net.transitions().len(),
        rules.len(),
        net.token_count()
    )
}

pub fn cmd_validate(path: &Path, verify_cache: bool, format: OutputFormat) -> CmdResult {
    let doc = load(path)?;
    let mut problems: Vec<String> = Vec::new();
    if let Document::Hier(h) = &doc {
        let hn = h.build()?;
        problems.extend(diagnostics(&hn).iter().map(ToString::to_string));
    }
    if problems.is_empty() {
        if let Err(e) = doc.model(verify_cache) {
            let e = CliError::from(e);
            if e.code != 1 {
                return Err(e);
            }
            problems.push(e.message);
        }
    }
    let code = i32::from(!problems.is_empty());
    let stdout = match format {
        OutputFormat::Json => to_json(&json!({ "valid": problems.is_empty(), "diagnostics": problems })),
        OutputFormat::Text if problems.is_empty() => "ok\n".to_string(),
        OutputFormat::Text => problems.iter().map(|p| format!("{p}\n")).collect(),
    };
    Ok(Outcome { code, stdout, stderr: String::new() })
}

/// The flat document of any input. Flat inputs come back unchanged.
pub fn flat_doc(doc: &Document, verify_cache: bool) -> Result<FlatDoc, CliError> {
    let model = doc.model(verify_cache)?;
    Ok(FlatDoc::of(&model.net, &model.rules))
}

pub fn cmd_flatten(
    path: &Path,
    out: &Option<PathBuf>,
    persist: &Option<PathBuf>,
    verify_cache: bool,
    format: OutputFormat,
) -> CmdResult {
    let doc = load(path)?;
    if let Document::Hier(h) = &doc {
        let hn = h.build()?;
        let problems = diagnostics(&hn);
        if !problems.is_empty() {
            let lines: Vec<String> = problems.iter().map(ToString::to_string).collect();
            return Err(CliError::domain(lines.join("\n")));
        }
    }
    let flat = flat_doc(&doc, verify_cache)?;
    if let Some(p) = persist {
        let Document::Hier(h) = &doc else {
            return Err(CliError::input("--persist needs a hierarchical input"));
        };
        let mut cached = (**h).clone();
        cached.flat = Some(flat.clone());
        write_file(p, &to_json(&cached))?;
    }
    let text = match format {
        OutputFormat::Json => to_json(&flat),
        OutputFormat::Text => {
            let model = flat.build()?;
            summary(&model.net, &model.rules)
        }
    };
    ok(emit(out, text)?)
}

fn trace_text(trace: &Trace) -> String {
    let mut s = String::new();
    for (i, e) in trace.events.iter().enumerate() {
        let line = serde_json::to_string(e).expect("events serialize");
        let _ = writeln!(s, "{i}: {line}");
    }
    s
}

pub fn cmd_simulate(
    path: &Path,
    steps: usize,
    seed: u64,
    out: &Option<PathBuf>,
    verify_cache: bool,
    format: OutputFormat,
) -> CmdResult {
    let model = load(path)?.model(verify_cache)?;
    let (trace, net) = simulate(&model, steps, seed).map_err(|e| CliError::domain(e.to_string()))?;
    let snapshot = to_json(&FlatDoc::of(&net, &model.rules));
    match out {
        Some(p) => write_file(p, &snapshot)?,
        None if format == OutputFormat::Text => {}
        None => {
            // Trace and snapshot together when there is nowhere else to put it.
            let both = json!({ "trace": trace, "snapshot": FlatDoc::of(&net, &model.rules) });
            return ok(to_json(&both));
        }
    }
    ok(match format {
        OutputFormat::Json => to_json(&trace),
        OutputFormat::Text => trace_text(&trace),
    })
}

pub fn cmd_replay(path: &Path, trace_path: &Path, out: &Option<PathBuf>, verify_cache: bool) -> CmdResult {
    let model = load(path)?.model(verify_cache)?;
    let text = fs::read_to_string(trace_path)
        .map_err(|e| CliError::input(format!("{}: {e}", trace_path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", trace_path.display())))?;
    // Accept both a bare trace and the combined output of `simulate`.
    let value = value.get("trace").cloned().unwrap_or(value);
    let trace: Trace =
        serde_json::from_value(value).map_err(|e| CliError::input(format!("{}: {e}", trace_path.display())))?;
    let net = replay(&model, &trace).map_err(|e| CliError::domain(e.to_string()))?;
    ok(emit(out, to_json(&FlatDoc::of(&net, &model.rules)))?)
}

fn find_rule<'a>(model: &'a Model, name: &str) -> Result<&'a Rule, CliError> {
    model
        .rules
        .iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| CliError::input(format!("no rule named `{name}`")))
}

fn occurrence_at(rule: &Rule, net: &PTNet, index: usize) -> Result<Occurrence, CliError> {
    let mut all = find_occurrences(rule.lhs(), net);
    if index >= all.len() {
        return Err(CliError::input(format!(
            "rule `{}` has {} occurrences, no index {index}",
            rule.name(),
            all.len()
        )));
    }
    Ok(all.swap_remove(index))
}

fn mapping_text(f: &NetMorphism) -> String {
    let part = |m: &std::collections::BTreeMap<String, String>| {
        m.iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(", ")
    };
    format!("places {{{}}} transitions {{{}}}", part(&f.places), part(&f.transitions))
}

pub fn cmd_match(path: &Path, rule: &str, verify_cache: bool, format: OutputFormat) -> CmdResult {
    let model = load(path)?.model(verify_cache)?;
    let rule = find_rule(&model, rule)?;
    let found = find_occurrences(rule.lhs(), &model.net);
    let rows: Vec<(usize, &Occurrence, Option<String>)> = found
        .iter()
        .enumerate()
        .map(|(i, o)| (i, o, check_gluing(rule, &model.net, o).err().map(|e| e.to_string())))
        .collect();
    ok(match format {
        OutputFormat::Json => to_json(&json!({
            "rule": rule.name(),
            "occurrences": rows.iter().map(|(i, o, why)| json!({
                "index": i,
                "places": o.places,
                "transitions": o.transitions,
                "applicable": why.is_none(),
                "reason": why,
            })).collect::<Vec<_>>(),
        })),
        OutputFormat::Text => {
            let mut s = format!("{}: {} occurrences\n", rule.name(), rows.len());
            for (i, o, why) in rows {
                let state = why.unwrap_or_else(|| "applicable".into());
                let _ = writeln!(s, "#{i} {} [{state}]", mapping_text(o));
            }
            s
        }
    })
}

pub fn cmd_apply(
    path: &Path,
    rule: &str,
    occurrence: usize,
    out: &Option<PathBuf>,
    verify_cache: bool,
    format: OutputFormat,
) -> CmdResult {
    let model = load(path)?.model(verify_cache)?;
    let rule = find_rule(&model, rule)?;
    let o = occurrence_at(rule, &model.net, occurrence)?;
    let step = transform(&model.net, rule, &o).map_err(|e| CliError::domain(e.to_string()))?;
    let text = match format {
        OutputFormat::Json => to_json(&FlatDoc::of(&step.result, &model.rules)),
        OutputFormat::Text => summary(&step.result, &model.rules),
    };
    ok(emit(out, text)?)
}

fn parse_match(s: &str) -> Result<(&str, usize), CliError> {
    let (name, idx) = s
        .rsplit_once('@')
        .ok_or_else(|| CliError::input(format!("expected `rule@index`, got `{s}`")))?;
    let idx = idx
        .parse()
        .map_err(|_| CliError::input(format!("bad occurrence index in `{s}`")))?;
    Ok((name, idx))
}

/// Exit code 0 when independent, 1 when not.
pub fn cmd_independent(path: &Path, first: &str, second: &str, verify_cache: bool, format: OutputFormat) -> CmdResult {
    let model = load(path)?.model(verify_cache)?;
    let (n1, i1) = parse_match(first)?;
    let (n2, i2) = parse_match(second)?;
    let (r1, r2) = (find_rule(&model, n1)?, find_rule(&model, n2)?);
    let o1 = occurrence_at(r1, &model.net, i1)?;
    let o2 = occurrence_at(r2, &model.net, i2)?;
    let yes = parallel_independent(r1, &o1, r2, &o2);
    let stdout = match format {
        OutputFormat::Json => to_json(&json!({ "independent": yes })),
        OutputFormat::Text => if yes { "independent\n" } else { "dependent\n" }.to_string(),
    };
    Ok(Outcome { code: i32::from(!yes), stdout, stderr: String::new() })
}

/// Exit code 0 with a witness when isomorphic, 1 when not.
pub fn cmd_isomorphic(left: &Path, right: &Path, verify_cache: bool, format: OutputFormat) -> CmdResult {
    let a = load(left)?.model(verify_cache)?;
    let b = load(right)?.model(verify_cache)?;
    let witness = isomorphic(&a.net, &b.net);
    let stdout = match (format, &witness) {
        (OutputFormat::Json, w) => to_json(&json!({ "isomorphic": w.is_some(), "witness": w })),
        (OutputFormat::Text, Some(w)) => format!("isomorphic\n{}\n", mapping_text(w)),
        (OutputFormat::Text, None) => "not isomorphic\n".to_string(),
    };
    Ok(Outcome { code: i32::from(witness.is_none()), stdout, stderr: String::new() })
}

pub fn execute(cli: &Cli) -> CmdResult {
    let (fmt, vc) = (cli.format, cli.verify_cache);
    match &cli.command {
        Command::Validate { input } => cmd_validate(input, vc, fmt),
        Command::Flatten { input, out, persist } => cmd_flatten(input, out, persist, vc, fmt),
        Command::Simulate { input, seed, steps, out } => cmd_simulate(input, *steps, *seed, out, vc, fmt),
        Command::Replay { input, trace, out } => cmd_replay(input, trace, out, vc),
        Command::Match { input, rule } => cmd_match(input, rule, vc, fmt),
        Command::Apply { input, rule, occurrence, out } => cmd_apply(input, rule, *occurrence, out, vc, fmt),
        Command::Independent { input, first, second } => cmd_independent(input, first, second, vc, fmt),
        Command::Isomorphic { left, right } => cmd_isomorphic(left, right, vc, fmt),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: e.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", e.message),
        },
    }
}
