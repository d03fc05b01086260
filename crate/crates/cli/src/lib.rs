//! Library behind the `revshare` binary: argument parsing, scenario
//! dispatch and output formatting.

pub mod args;
pub mod format;
pub mod records;
pub mod run;
pub mod svg;
pub mod verify;

use std::io::Write;

pub use args::{parse_args, Command, Format, RunSpec, ScenarioName, Settings, SweepAxis, SweepParam};
pub use run::{run, RunOutput};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    /// Help or version text; not an error.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
        }
    }
}

fn write_file(path: &std::path::Path, text: &str, flag: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{flag}: cannot write {}: {e}", path.display())))
}

fn execute(argv: Vec<std::ffi::OsString>, stdout: &mut dyn Write) -> Result<Vec<String>, CliError> {
    let spec = parse_args(argv)?;
    let out = run(&spec)?;
    match &spec.out {
        Some(path) => write_file(path, &out.text, "--out")?,
        None => stdout
            .write_all(out.text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?,
    }
    if let (Some(path), Some(svg)) = (&spec.plot, &out.plot) {
        write_file(path, svg, "--plot")?;
    }
    Ok(out.failures)
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 for
/// usage errors, 2 for numerical or verification failures.
pub fn main_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString>,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    match execute(argv, stdout) {
        Ok(failures) if failures.is_empty() => 0,
        Ok(failures) => {
            for f in &failures {
                let _ = writeln!(stderr, "error: {f}");
            }
            2
        }
        Err(CliError::Info(text)) => {
            let _ = write!(stdout, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
