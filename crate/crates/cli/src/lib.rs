//! Command-line driver: parses flags, runs a batch and emits a JSON or CSV
//! report, optionally checked against the expected values.

pub mod args;
pub mod check;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use hyperqkd_core::montecarlo::run_batch;
use hyperqkd_core::QkdError;
use thiserror::Error;

pub use args::{parse_config, AttackArg, EveBasesArg, Format, Invocation, OutputOptions};
pub use check::{evaluate, Verdict};
pub use report::{CsvRow, ReportDocument, SCHEMA_VERSION};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("simulation rejected the configuration: {0}")]
    Config(#[from] QkdError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot serialize report: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => EXIT_OK,
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Write { .. } | CliError::Serialize(_) => EXIT_IO,
        }
    }
}

/// Runs the batch described by `invocation` and assembles its report.
pub fn build_report(invocation: &Invocation) -> Result<ReportDocument, CliError> {
    let output = run_batch(&invocation.config)?;
    let checks = invocation
        .output
        .check
        .then(|| evaluate(&invocation.config, &output.stats));
    let generated_at = (!invocation.output.deterministic).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });
    Ok(ReportDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        generated_at,
        config: invocation.config,
        stats: output.stats,
        checks,
    })
}

pub fn render(doc: &ReportDocument, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => doc
            .to_json()
            .map_err(|e| CliError::Serialize(e.to_string())),
        Format::Csv => doc.to_csv().map_err(|e| CliError::Serialize(e.to_string())),
    }
}

/// Writes the rendered report to `--out`, or standard output without it.
pub fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    let written = match out {
        Some(path) => std::fs::write(path, text).map_err(|source| (path.clone(), source)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| (PathBuf::from("<stdout>"), source)),
    };
    written.map_err(|(path, source)| CliError::Write { path, source })
}

fn summarize(verdicts: &[Verdict]) {
    for v in verdicts {
        let observed = v
            .observed
            .map_or("undefined".to_string(), |x| format!("{x:.5}"));
        eprintln!(
            "[{}] {}: {observed} (expected {} ± {})",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.expected,
            v.tolerance
        );
    }
}

/// Full command: parse, simulate, write. Returns the process exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_config(args).map_err(CliError::from).and_then(|inv| {
        let doc = build_report(&inv)?;
        emit(&render(&doc, inv.output.format)?, inv.output.out.as_ref())?;
        Ok(doc)
    });
    match result {
        Ok(doc) => {
            if let Some(verdicts) = &doc.checks {
                summarize(verdicts);
            }
            if doc.passed() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            CliError::Usage(e).exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
