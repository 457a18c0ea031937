//! Command-line front end: option parsing, the subcommands and their
//! reproducible CSV / JSON output.

pub mod args;
pub mod commands;
pub mod error;
pub mod selftest;
pub mod table;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use args::{Cli, Command, Format, GridKind, ProbeKind, RunArgs};
pub use error::CliError;
pub use table::{Cell, Report, Table, BOUNDARY_TOKEN};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs one subcommand and returns its report together with the number of
/// failed selftest checks (zero for every other command).
pub fn execute(command: Command, args: &RunArgs) -> Result<(Report, usize), CliError> {
    validate_shared(args)?;
    let run = || match command {
        Command::QfiCurve => commands::cmd_qfi_curve(args).map(|r| (r, 0)),
        Command::McValidate => commands::cmd_mc_validate(args).map(|r| (r, 0)),
        Command::ThresholdCurve => commands::cmd_threshold_curve(args).map(|r| (r, 0)),
        Command::Bures => commands::cmd_bures(args).map(|r| (r, 0)),
        Command::Selftest => selftest::cmd_selftest(args.perturb),
    };
    match args.workers {
        None => run(),
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {w} workers: {e}")))?
            .install(run),
    }
}

/// Checks options every command accepts, even where a command ignores them,
/// so a malformed value never passes silently.
fn validate_shared(args: &RunArgs) -> Result<(), CliError> {
    if let Some(eta) = args.eta {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(CliError::Usage(format!(
                "--eta must lie in (0, 1], got {eta}"
            )));
        }
    }
    if !args.perturb.is_finite() {
        return Err(CliError::Usage("--perturb must be finite".into()));
    }
    Ok(())
}

/// Config, version and summary recorded next to every table.
pub fn metadata(command: Command, args: &RunArgs, report: &Report) -> Value {
    json!({
        "tool": "gainsense",
        "version": VERSION,
        "command": command.name(),
        "config": args,
        "summary": {
            "rows": report.table.rows.len(),
            "warnings": report.warnings,
            "details": report.summary,
        },
    })
}

fn encode_json(value: &Value) -> Result<Vec<u8>, CliError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Encode(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Sidecar path `PATH.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Table bytes in the requested format. Without an output file the metadata
/// travels in the same stream: as `#` comment lines before a CSV header, or
/// under a `meta` key in JSON.
pub fn render(format: Format, report: &Report, meta: Option<&Value>) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut bytes = Vec::new();
            if let Some(meta) = meta {
                let line =
                    serde_json::to_string(meta).map_err(|e| CliError::Encode(e.to_string()))?;
                writeln!(bytes, "# {line}")?;
            }
            bytes.extend(report.table.to_csv()?);
            Ok(bytes)
        }
        Format::Json => {
            let mut doc = json!({ "columns": report.table.to_json_value() });
            if let Some(meta) = meta {
                doc["meta"] = meta.clone();
            }
            encode_json(&doc)
        }
    }
}

/// Writes the table (and, for a file, its sidecar).
pub fn emit(command: Command, args: &RunArgs, report: &Report) -> Result<(), CliError> {
    let meta = metadata(command, args, report);
    match &args.out {
        Some(path) => {
            std::fs::write(path, render(args.format, report, None)?)?;
            std::fs::write(sidecar_path(path), encode_json(&meta)?)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&render(args.format, report, Some(&meta))?)?;
            stdout.flush()?;
        }
    }
    if report.warnings > 0 {
        eprintln!(
            "warning: {} cells flagged (see the run summary)",
            report.warnings
        );
    }
    Ok(())
}

/// Full run: execute, write output, and map the outcome to an exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = execute(cli.command, &cli.run).and_then(|(report, failed)| {
        emit(cli.command, &cli.run, &report)?;
        if failed > 0 {
            return Err(CliError::Selftest(format!(
                "{failed} selftest checks failed"
            )));
        }
        Ok(())
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gainsense: {e}");
            e.exit_code()
        }
    }
}
