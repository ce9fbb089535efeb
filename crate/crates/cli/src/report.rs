use std::io::Write;
use std::path::Path;
use std::time::Instant;

use delstab::Result;
use serde::Serialize;
use serde_json::Value;

/// Self-describing result of one command.
#[derive(Debug, Serialize)]
pub struct ReportEnvelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    /// SHA-256 of the canonical point file.
    pub dataset_digest: Option<String>,
    /// `ok`, or the reason for a non-zero exit code.
    pub status: String,
    pub outputs: Value,
    pub timings: Timings,
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
}

impl ReportEnvelope {
    pub fn new(command: &'static str, config: &impl Serialize, started: Instant) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: serde_json::to_value(config)?,
            dataset_digest: None,
            status: "ok".into(),
            outputs: Value::Null,
            timings: Timings {
                total_seconds: started.elapsed().as_secs_f64(),
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `text` to `path`, or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// CSV text from a header and rows.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| delstab::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

fn csv_error(e: csv::Error) -> delstab::Error {
    delstab::Error::Io(std::io::Error::other(e))
}

pub fn ids(v: &[usize]) -> String {
    v.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
