use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numeric(qckit::Error),
    /// A residual above its gate. The report has already been written.
    Gate { residual: f64, tolerance: f64 },
}

impl From<qckit::Error> for CliError {
    fn from(e: qckit::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Numeric(e) => e.code(),
            CliError::Gate { .. } => "tolerance_exceeded",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) => m.clone(),
            CliError::Numeric(e) => e.to_string(),
            CliError::Gate { residual, tolerance } => {
                format!("residual {residual:e} exceeds tolerance {tolerance:e}")
            }
        }
    }

    fn exit_status(&self) -> u8 {
        match self {
            CliError::Gate { .. } => 2,
            _ => 1,
        }
    }
}

pub fn report_error(e: &CliError) -> ExitCode {
    let body = json!({"error": {"code": e.code(), "message": e.message()}});
    eprintln!("{body}");
    ExitCode::from(e.exit_status())
}

/// Reads a path, `-` for stdin, or the argument itself when it is inline JSON.
pub fn read_input(arg: &str) -> Result<String, CliError> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(arg).map_err(|e| CliError::Io(format!("{arg}: {e}")))
}

/// JSON with object keys sorted and floats in shortest round-trip form.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    // serde_json's Value map is ordered by key, which fixes the field order
    let v: Value = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    let mut s = serde_json::to_string(&v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path` through a temporary file in the same directory, or to stdout.
pub fn emit(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes()).map_err(io)?;
            out.flush().map_err(io)
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(body.as_bytes()).map_err(io)?;
            tmp.as_file().sync_all().map_err(io)?;
            tmp.persist(p).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

/// CSV body with a `# {json}` header line.
pub fn csv_with_header<R: Serialize>(header: &Value, rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(format!("# {header}\n{body}"))
}
