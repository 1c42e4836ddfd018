//! Argument parsing and command execution for the `exadam` binary.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use exadam::config::ExperimentFile;
use exadam::conformance;
use exadam::harness::{
    compare_optimizers, run_experiment, ComparisonReport, RunTrace, TraceSummary,
};
use exadam::optim::goldens::SingleStepGoldens;

pub const USAGE: &str = "\
usage: exadam <verb> [flags]

verbs:
  run             run every experiment in a config file and write its traces
  compare         run a sweep and write a comparison report
  check           run the invariant suites (optionally against a goldens file)
  export-goldens  write single-step reference diagnostics

flags:
  --config PATH   experiment file (run, compare) or goldens file (check)
  --out DIR       output directory (default: .)
  --seed N        override the seed in the config
  --format F      csv, json or md

environment:
  EXADAM_THREADS  cap on parallel runs in a sweep";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Md,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Md => "md",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Run,
    Compare,
    Check,
    ExportGoldens,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliCommand {
    pub verb: Verb,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    UnknownVerb(String),
    MissingConfig(String),
    BadFlag(String),
    /// `--help` or `--version`; the text goes to stdout and the exit code is 0.
    Help(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::UnknownVerb(m) => write!(f, "unknown verb: {m}"),
            CliError::MissingConfig(m) => write!(f, "missing config: {m}"),
            CliError::BadFlag(m) => write!(f, "bad flag: {m}"),
            CliError::Help(text) => f.write_str(text),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "exadam",
    disable_help_subcommand = true,
    override_usage = "exadam <verb> [flags]"
)]
struct Cli {
    #[command(subcommand)]
    verb: VerbArgs,
}

#[derive(Subcommand)]
enum VerbArgs {
    Run(Flags),
    Compare(Flags),
    Check(Flags),
    ExportGoldens(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_enum, value_name = "F")]
    format: Option<Format>,
}

fn first_line(e: &clap::Error) -> String {
    let text = e.to_string();
    let line = text.lines().next().unwrap_or_default();
    line.trim_start_matches("error: ").to_string()
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, S>(argv: I) -> Result<CliCommand, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    use clap::error::ErrorKind;
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        ErrorKind::InvalidSubcommand => CliError::UnknownVerb(first_line(&e)),
        ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            CliError::UnknownVerb("no verb given".into())
        }
        _ => CliError::BadFlag(first_line(&e)),
    })?;
    let (verb, flags) = match cli.verb {
        VerbArgs::Run(f) => (Verb::Run, f),
        VerbArgs::Compare(f) => (Verb::Compare, f),
        VerbArgs::Check(f) => (Verb::Check, f),
        VerbArgs::ExportGoldens(f) => (Verb::ExportGoldens, f),
    };
    let needs_config = matches!(verb, Verb::Run | Verb::Compare);
    match &flags.config {
        None if needs_config => {
            return Err(CliError::MissingConfig(
                "this verb requires --config PATH".into(),
            ))
        }
        Some(p) if !p.is_file() => {
            return Err(CliError::MissingConfig(format!(
                "{} does not exist",
                p.display()
            )))
        }
        _ => {}
    }
    let format = match (verb, flags.format) {
        (Verb::Check, Some(_)) | (Verb::ExportGoldens, Some(Format::Csv | Format::Md)) => {
            return Err(CliError::BadFlag(
                "--format does not apply to this verb".into(),
            ))
        }
        (_, Some(f)) => f,
        (Verb::Compare, None) => Format::Md,
        (Verb::ExportGoldens, None) => Format::Json,
        (_, None) => Format::Csv,
    };
    if flags.seed.is_some() && !needs_config {
        return Err(CliError::BadFlag(
            "--seed only applies to run and compare".into(),
        ));
    }
    Ok(CliCommand {
        verb,
        config_path: flags.config,
        output_dir: flags.out.unwrap_or_else(|| PathBuf::from(".")),
        seed: flags.seed,
        format,
    })
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn load_experiments(cmd: &CliCommand) -> Result<ExperimentFile, String> {
    let path = cmd.config_path.as_ref().expect("checked by parse_args");
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file = ExperimentFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(match cmd.seed {
        Some(seed) => file.with_seed(seed),
        None => file,
    })
}

fn trace_output(trace: &RunTrace, format: Format) -> String {
    match format {
        Format::Csv => trace.to_csv(),
        Format::Json => trace.to_json(),
        Format::Md => {
            let summary = TraceSummary::of(trace).expect("epochs >= 1");
            ComparisonReport {
                problem: trace.problem.clone(),
                seed: trace.config.seed,
                epochs: trace.config.epochs,
                batch_size: trace.config.batch_size,
                target_val_loss: trace.config.target_val_loss,
                rows: vec![exadam::harness::ReportRow {
                    optimizer: trace.optimizer.clone(),
                    outcome: exadam::harness::RunOutcome::Completed(summary),
                }],
                traces: Vec::new(),
            }
            .to_markdown()
        }
    }
}

fn write_output(out: &mut dyn Write, path: &Path, text: &str) -> Result<(), String> {
    write_atomic(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))?;
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(())
}

fn run_verb(cmd: &CliCommand, out: &mut dyn Write) -> Result<bool, String> {
    let file = load_experiments(cmd)?;
    for cfg in &file.experiments {
        let id = cfg.optimizer.kind().id();
        let trace = run_experiment(cfg).map_err(|e| format!("{id}: {e}"))?;
        let path = cmd
            .output_dir
            .join(format!("{id}.{}", cmd.format.extension()));
        write_output(out, &path, &trace_output(&trace, cmd.format))?;
        if !trace.step_losses.is_empty() {
            let path = cmd.output_dir.join(format!("{id}.steps.csv"));
            write_output(out, &path, &trace.step_losses_csv())?;
        }
    }
    Ok(true)
}

fn compare_verb(cmd: &CliCommand, out: &mut dyn Write) -> Result<bool, String> {
    let file = load_experiments(cmd)?;
    let report = compare_optimizers(&file.experiments).map_err(|e| e.to_string())?;
    let text = match cmd.format {
        Format::Md => report.to_markdown(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    let path = cmd
        .output_dir
        .join(format!("report.{}", cmd.format.extension()));
    write_output(out, &path, &text)?;
    if !report.all_completed() {
        let _ = writeln!(out, "some runs diverged; see the report");
    }
    Ok(report.all_completed())
}

fn check_verb(cmd: &CliCommand, out: &mut dyn Write) -> Result<bool, String> {
    let supplied = match &cmd.config_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Some(
                SingleStepGoldens::from_json(&text)
                    .map_err(|e| format!("{}: {e}", path.display()))?,
            )
        }
        None => None,
    };
    let outcomes = conformance::run_all(supplied.as_ref());
    for c in &outcomes {
        let _ = writeln!(out, "{c}");
    }
    let failed = outcomes.iter().filter(|c| !c.passed).count();
    let _ = writeln!(out, "{} checks, {failed} failed", outcomes.len());
    Ok(failed == 0)
}

fn export_verb(cmd: &CliCommand, out: &mut dyn Write) -> Result<bool, String> {
    let goldens = SingleStepGoldens::generate().map_err(|e| e.to_string())?;
    let path = cmd.output_dir.join("single_step.json");
    write_output(out, &path, &(goldens.to_json() + "\n"))?;
    Ok(true)
}

/// Runs a parsed command. Returns the process exit code: 0 when all work
/// succeeded, 1 otherwise.
pub fn execute(cmd: &CliCommand, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cmd.verb {
        Verb::Run => run_verb(cmd, out),
        Verb::Compare => compare_verb(cmd, out),
        Verb::Check => check_verb(cmd, out),
        Verb::ExportGoldens => export_verb(cmd, out),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Parse and execute; usage errors print the usage and a one-line cause.
pub fn main_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cmd) => execute(&cmd, out, err),
        Err(CliError::Help(_)) => {
            let _ = writeln!(out, "{USAGE}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{USAGE}\n\nerror: {e}");
            e.exit_code()
        }
    }
}
