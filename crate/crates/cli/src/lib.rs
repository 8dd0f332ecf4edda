//! File formats and the `vagueness` command line on top of
//! [`vagueness_core`].
//!
//! - [`scenario`]: strict versioned scenario JSON
//! - [`systems`]: systems CSV ingestion
//! - [`report`]: report payloads, JSON and table rendering
//! - [`run`]: the command-line entry point
//!
//! Exit codes: 0 success, 1 internal error, 2 validation error, 3 the run
//! ended in a faithfulness violation (the report is still written).

#![forbid(unsafe_code)]

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;
pub mod systems;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, Result};
pub use report::Format;
pub use scenario::{load_scenario, Scenario, ScenarioFile};
pub use systems::{ingest_rows, ingest_systems_csv, SystemRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vagueness", version, about = "Exemplar-defined properties, thresholds and borderline cases")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Scenario JSON file.
    #[arg(long, global = true, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Systems CSV (id, features..., optional provenance / target).
    #[arg(long, global = true, value_name = "PATH")]
    pub systems: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Comparison tolerance; overrides the scenario's.
    #[arg(long, global = true, value_name = "FLOAT")]
    pub epsilon: Option<f64>,
    /// Simulation seed; overrides the scenario's.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Derive eta0 and gamma0.
    Thresholds,
    /// Classify systems (from --systems, else the scenario's probes).
    Classify,
    /// Check the exemplars against the metric.
    Faithfulness,
    /// Weak and strong sharpness.
    Sharpness,
    /// Flag probes above the metric floor when gamma0 sits on it.
    PanCheck,
    /// Apply exemplar updates from --systems (needs a `target` column).
    Update,
    /// Run the scenario's seeded exemplar stream; JSON-lines trace.
    Simulate {
        /// Overrides the scenario's step count.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Compare with a second observer's scenario.
    Compare {
        #[arg(long, value_name = "PATH")]
        against: PathBuf,
        /// Grid resolution per feature when --systems is absent.
        #[arg(long, default_value_t = 101)]
        grid_points: usize,
    },
    /// Merge clear non-cases into the clear set under a rescaled metric.
    Rescale,
    /// Replace the metric with its 0/1 thresholded version.
    Binarize,
}

/// What a command produced: the full report text and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    pub code: i32,
}

/// Parses `argv` and runs the command, writing to the process's stdout and
/// stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => match emit(&cli.global, &outcome.report, stdout) {
            Ok(()) => outcome.code,
            Err(e) => report_error(&e, stderr),
        },
        Err(e) => report_error(&e, stderr),
    }
}

fn report_error(e: &CliError, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "vagueness: error[{}]: {e}", e.code());
    e.exit_code()
}

/// Runs a parsed command and returns the rendered report.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    commands::dispatch(&cli.global, &cli.command)
}

fn emit(global: &GlobalArgs, report: &str, stdout: &mut dyn Write) -> Result<()> {
    match &global.out {
        Some(path) => write_atomically(path, report.as_bytes()),
        None => stdout.write_all(report.as_bytes()).map_err(|source| CliError::Write {
            file: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

/// Writes to a sibling temporary file and renames it into place, so a failed
/// run never leaves a truncated report behind.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| CliError::Write {
        file: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .ok_or_else(|| err(std::io::Error::other("not a file path")))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes).map_err(err)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        err(e)
    })
}
