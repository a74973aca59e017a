use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Sends `contents` to `out` when given, else to stdout.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// `traj.csv` becomes `traj.drift.json`.
pub fn drift_path(out: &Path) -> PathBuf {
    out.with_extension("drift.json")
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub struct Style {
    color: bool,
}

impl Style {
    /// ANSI styling only on a terminal, and never when `Z2TOP_NO_COLOR` is set.
    pub fn detect(stream_is_terminal: bool) -> Self {
        Style { color: stream_is_terminal && std::env::var_os("Z2TOP_NO_COLOR").is_none() }
    }

    pub fn stdout() -> Self {
        Style::detect(std::io::stdout().is_terminal())
    }

    pub fn stderr() -> Self {
        Style::detect(std::io::stderr().is_terminal())
    }

    pub fn bold(&self, s: &str) -> String {
        if self.color { format!("\x1b[1m{s}\x1b[0m") } else { s.to_string() }
    }

    pub fn warn(&self, s: &str) -> String {
        if self.color { format!("\x1b[33m{s}\x1b[0m") } else { s.to_string() }
    }
}
