use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use capi::catalog::{self, CatalogError};
use capi::engine::{Answer, EngineError, Session};
use capi::format::parse_document;
use capi::format::Severity;
use capi::lint::{lint_tree, LintConfig};
use capi::model::{ArchStyle, DecisionTree};
use capi::service::{self, ServiceConfig};
use capi::simulate::{
    analytic_profile, monte_carlo_profile, AnswerModel, FlowVariant, SelectionProfile,
};
use capi::{export_dot, run_batch};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ABORT: u8 = 130;

#[derive(Parser)]
#[command(
    name = "capi",
    version,
    about = "Suggest architectural design patterns from yes/no answers"
)]
struct Cli {
    /// Decision tree document; the built-in tree when omitted.
    #[arg(long, global = true, env = "CAPI_CATALOG")]
    catalog: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Answer the questions for one style in the terminal.
    Interactive { style: ArchStyle },
    /// Replay a fixed answer sequence and print the result.
    Batch {
        style: ArchStyle,
        /// A file with one yes/no per line, or a comma-separated list.
        answers: String,
    },
    /// Check a tree document; prints nothing when it is clean.
    Lint { path: Option<PathBuf> },
    /// Estimate how many patterns an answer model selects.
    Simulate {
        style: ArchStyle,
        #[arg(long, default_value_t = 0.5)]
        p_yes: f64,
        #[arg(long)]
        p_yes_indication: Option<f64>,
        #[arg(long)]
        p_yes_contraindication: Option<f64>,
        #[arg(long, default_value = "revised")]
        variant: FlowVariant,
        /// Sample this many sessions instead of computing exactly.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print one style's path as a Graphviz digraph.
    ExportDot { style: ArchStyle },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, env = "CAPI_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long = "log", env = "CAPI_LOG", default_value = "capi-events.ndjson")]
        log_path: PathBuf,
        /// Idle time after which a session is dropped, e.g. `24h` or `90s`.
        #[arg(long, env = "CAPI_SESSION_TTL", default_value = "24h", value_parser = humantime::parse_duration)]
        ttl: Duration,
        /// Directory of static files served for non-API paths.
        #[arg(long, env = "CAPI_STATIC_DIR")]
        static_dir: Option<PathBuf>,
    },
}

/// A message for stderr and the exit status that goes with it.
struct Failure(u8, String);

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure(EXIT_USAGE, message.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            if !message.is_empty() {
                eprintln!("capi: {message}");
            }
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Interactive { style } => interactive(cli, *style),
        Command::Batch { style, answers } => batch(cli, *style, answers),
        Command::Lint { path } => lint(cli, path.as_deref().or(cli.catalog.as_deref())),
        Command::Simulate {
            style,
            p_yes,
            p_yes_indication,
            p_yes_contraindication,
            variant,
            trials,
            seed,
        } => {
            let model = AnswerModel::per_kind(
                p_yes_indication.unwrap_or(*p_yes),
                p_yes_contraindication.unwrap_or(*p_yes),
            )
            .map_err(Failure::usage)?;
            let tree = load(cli)?;
            let profile = match trials {
                None => analytic_profile(&tree, *style, &model, *variant),
                Some(trials) => {
                    monte_carlo_profile(&tree, *style, &model, *variant, *trials, *seed)
                        .map_err(Failure::usage)?
                }
            };
            match cli.format {
                Format::Json => println!("{}", profile.to_json()),
                Format::Text => print!("{}", profile_text(&profile)),
            }
            Ok(())
        }
        Command::ExportDot { style } => {
            print!("{}", export_dot(&load(cli)?, *style));
            Ok(())
        }
        Command::Serve {
            addr,
            log_path,
            ttl,
            static_dir,
        } => {
            let config = ServiceConfig {
                addr: *addr,
                catalog: cli.catalog.clone(),
                log_path: log_path.clone(),
                session_ttl: *ttl,
                static_dir: static_dir.clone(),
            };
            let runtime =
                tokio::runtime::Runtime::new().map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
            runtime
                .block_on(service::serve(config))
                .map_err(|e| Failure(EXIT_FAILURE, e.to_string()))
        }
    }
}

fn load(cli: &Cli) -> Result<DecisionTree, Failure> {
    catalog::open_tree(cli.catalog.as_deref()).map_err(|e| match e {
        CatalogError::Parse(parse) => Failure(
            EXIT_USAGE,
            std::iter::once("invalid catalog".to_owned())
                .chain(parse.diagnostics.iter().map(|d| format!("  {d}")))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        other => Failure::usage(other),
    })
}

fn print_result(format: Format, session: &Session) -> Result<(), Failure> {
    let result = session
        .result_set()
        .map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&result).expect("results always serialize")
        ),
        Format::Text => print!("{}", result.render_text()),
    }
    Ok(())
}

fn interactive(cli: &Cli, style: ArchStyle) -> Result<(), Failure> {
    let tree = Arc::new(load(cli)?);
    let mut session = Session::start(tree, style);
    // Prompts stay off stdout in json mode so the result is the only output.
    let mut out: Box<dyn Write> = match cli.format {
        Format::Text => Box::new(io::stdout()),
        Format::Json => Box::new(io::stderr()),
    };
    let mut lines = io::stdin().lock().lines();
    let io_failure = |e: io::Error| Failure(EXIT_FAILURE, e.to_string());

    while let Ok(prompt) = session.current_prompt() {
        let progress = prompt.progress;
        write!(
            out,
            "[flow {}/{}] {}\n(y)es, (n)o, (u)ndo, (q)uit > ",
            progress.flows_completed + 1,
            progress.flows_total,
            prompt.question_text
        )
        .and_then(|()| out.flush())
        .map_err(io_failure)?;

        loop {
            let Some(line) = lines.next() else {
                writeln!(out).map_err(io_failure)?;
                return Err(Failure(EXIT_ABORT, "aborted".into()));
            };
            let line = line.map_err(io_failure)?;
            let answer = match line.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" => Answer::Yes,
                "n" | "no" => Answer::No,
                "u" | "undo" => {
                    if let Err(EngineError::EmptyHistory) = session.undo() {
                        writeln!(out, "nothing to undo").map_err(io_failure)?;
                    }
                    break;
                }
                "q" | "quit" => return Err(Failure(EXIT_ABORT, "aborted".into())),
                _ => {
                    write!(out, "answer y or n > ")
                        .and_then(|()| out.flush())
                        .map_err(io_failure)?;
                    continue;
                }
            };
            session
                .answer(answer)
                .map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
            break;
        }
    }
    writeln!(out).map_err(io_failure)?;
    drop(out);
    print_result(cli.format, &session)
}

/// Reads `yes`/`no` tokens from a file (one per line, `#` starts a comment)
/// or, when no such file exists, from a comma-separated list.
fn parse_answers(source: &str) -> Result<Vec<Answer>, Failure> {
    let text;
    let tokens: Vec<&str> = if Path::new(source).is_file() {
        text = std::fs::read_to_string(source).map_err(Failure::usage)?;
        text.lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|line| !line.is_empty())
            .collect()
    } else {
        source
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .collect()
    };
    tokens
        .into_iter()
        .map(|t| {
            t.to_ascii_lowercase()
                .parse::<Answer>()
                .map_err(Failure::usage)
        })
        .collect()
}

fn batch(cli: &Cli, style: ArchStyle, source: &str) -> Result<(), Failure> {
    let answers = parse_answers(source)?;
    let tree = Arc::new(load(cli)?);
    let result =
        run_batch(tree, style, &answers).map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&result).expect("results always serialize")
        ),
        Format::Text => print!("{}", result.render_text()),
    }
    Ok(())
}

fn lint(cli: &Cli, path: Option<&Path>) -> Result<(), Failure> {
    let text = match path {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?,
        None => catalog::DEFAULT_CATALOG.to_owned(),
    };
    let report = parse_document(&text);
    let mut entries: Vec<(Severity, String, Value)> = report
        .diagnostics
        .iter()
        .map(|d| {
            (
                d.severity,
                d.to_string(),
                json!({
                    "severity": d.severity.to_string(),
                    "code": d.code.as_str(),
                    "location": d.location.to_string(),
                    "message": d.message,
                }),
            )
        })
        .collect();
    if let Some(tree) = &report.tree {
        entries.extend(lint_tree(tree, &LintConfig::default()).iter().map(|f| {
            (
                f.severity,
                f.to_string(),
                json!({
                    "severity": f.severity.to_string(),
                    "rule": f.rule.as_str(),
                    "location": f.location.to_string(),
                    "message": f.message,
                }),
            )
        }));
    }

    match cli.format {
        Format::Text => entries.iter().for_each(|(_, line, _)| println!("{line}")),
        Format::Json => {
            let list: Vec<&Value> = entries.iter().map(|(_, _, v)| v).collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&list).expect("findings serialize")
            );
        }
    }
    if entries.iter().any(|(s, _, _)| *s == Severity::Error) {
        Err(Failure(EXIT_FAILURE, String::new()))
    } else {
        Ok(())
    }
}

fn profile_text(profile: &SelectionProfile) -> String {
    let mut out = match (profile.trials, profile.seed) {
        (Some(trials), Some(seed)) => format!("monte carlo, {trials} trials, seed {seed}\n"),
        _ => "analytic\n".to_owned(),
    };
    out.push_str(&format!(
        "expected set size: {:.6}\n",
        profile.expected_set_size
    ));
    let width = profile
        .per_pattern
        .keys()
        .map(String::len)
        .max()
        .unwrap_or(0);
    for (pattern, p) in &profile.per_pattern {
        out.push_str(&format!("  {pattern:<width$}  {p:.6}\n"));
    }
    out
}
