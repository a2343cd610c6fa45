//! Serialization of result tables and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// JSON envelope shared by the tabular commands.
#[derive(Serialize)]
struct Envelope<'a, H: Serialize, R: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    header: H,
    rows: &'a [R],
}

/// Renders `rows` as CSV (with a leading `schema_version` column, which each
/// row type carries) or as a JSON envelope with `header` merged in.
pub fn render_table<H: Serialize, R: Serialize>(
    command: &str,
    header: H,
    rows: &[R],
    format: Format,
) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            Ok(w.into_inner().context("flushing csv")?)
        }
        Format::Json => {
            let env = Envelope { schema_version: SCHEMA_VERSION, command, header, rows };
            let mut out = serde_json::to_vec_pretty(&env)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn render_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes to `path` through a sibling temporary file and a rename, so a failed
/// run never leaves a partial file; `None` writes to stdout.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        return Ok(out.flush()?);
    };
    let tmp = temp_sibling(path);
    let result = fs::write(&tmp, bytes).and_then(|()| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}
